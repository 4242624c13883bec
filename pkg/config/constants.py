"""
系統常數與設定 - 單一真相來源
所有預算、預設引擎與實驗參數統一在此管理；可由環境變數 / .env 覆蓋
"""

import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

from dotenv import load_dotenv

# 載入 .env（本機開發用）
load_dotenv()


def get_env(var: str, default: Optional[str] = None) -> Optional[str]:
    """從 os.environ 讀取設定，沒有則回傳預設值。"""
    value = os.getenv(var)
    if value:
        return value
    return default


def _env_int(var: str, default: int) -> int:
    raw = get_env(var)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


@dataclass
class BudgetConfig:
    """資源預算"""
    DOMAIN_CELLS: int = 2_000_000    # naive refinement 的 assignment 總數上限
    GAME_STATES: int = 3_000_000     # pebble / cop 遊戲狀態數上限
    ISO_NODES: int = 2_000_000       # 同構回溯搜尋節點上限
    TD_VERTICES: int = 16            # 精確 tree-depth 的頂點數上限

    def __post_init__(self):
        self.DOMAIN_CELLS = _env_int("KWL_DOMAIN_CELLS", self.DOMAIN_CELLS)
        self.GAME_STATES = _env_int("KWL_GAME_STATES", self.GAME_STATES)
        self.ISO_NODES = _env_int("KWL_ISO_NODES", self.ISO_NODES)
        self.TD_VERTICES = _env_int("KWL_TD_VERTICES", self.TD_VERTICES)


@dataclass
class EngineConfig:
    """引擎設定"""
    ENGINES: Tuple[str, ...] = ("naive", "stream")
    DEFAULT_ENGINE: str = "naive"
    STREAM_MODES: Tuple[str, ...] = ("faithful", "fast")
    STREAM_MODE: str = "faithful"
    DEFAULT_SEED: int = 0

    def __post_init__(self):
        mode = get_env("KWL_STREAM_MODE", self.STREAM_MODE)
        if mode in self.STREAM_MODES:
            self.STREAM_MODE = mode


@dataclass
class ExperimentConfig:
    """實驗套件設定"""
    SUITES: List[str] = None
    ITERATION_GRAPHS: int = 100
    ITERATION_MAX_N: int = 6
    ITERATION_PARAMS: List[Tuple[int, int]] = None
    STREAM_PAIRS: int = 200
    STREAM_MAX_N: int = 6
    STREAM_MAX_K: int = 3
    STREAM_MODE: str = "fast"
    STREAM_SPACE_MODE: str = "faithful"  # 空間列不用快取
    STREAM_SPACE_PARAMS: Tuple[int, int] = (1, 2)
    STREAM_SPACE_NS: List[int] = None
    DEGSEQ_MAX_N: int = 5
    TD_SETTINGS: List[Tuple[int, int]] = None  # (tree-depth 上限 d, 頂點數上限)
    CHAR_MAX_N: int = 4
    CHAR_COLORS: int = 2
    CHAR_RANDOM_PAIRS: int = 200
    CHAR_RANDOM_N: int = 5
    CHAR_MAX_ROUNDS: int = 3
    CHAR_FORMULAS: int = 4  # 每個 (k1,k2,r) 的隨機公式數
    WLOWL_MAX_N: int = 5
    WLOWL_DIMS: List[int] = None

    def __post_init__(self):
        self.SUITES = [
            "hierarchy-separations",
            "iteration-bound",
            "treedepth-identification",
            "stream-vs-naive",
            "cfi-parity",
            "degree-sequences",
            "characterization",
            "wl-owl",
        ]
        self.ITERATION_PARAMS = [(1, 0), (1, 1), (1, 2), (2, 1)]
        self.STREAM_SPACE_NS = [2, 3]
        self.TD_SETTINGS = [(1, 7), (2, 7), (3, 6)]
        self.WLOWL_DIMS = [1, 2]


@dataclass
class UIConfig:
    """UI 設定"""
    PAGE_ICON: str = "🕸️"
    PAGE_TITLE: str = "k-WL 等價性工作台"
    ITEMS_PER_PAGE: int = 50


@dataclass
class SystemConfig:
    """系統設定"""
    LOG_LEVEL: str = "INFO"

    def __post_init__(self):
        self.LOG_LEVEL = get_env("LOG_LEVEL", self.LOG_LEVEL).upper()


# ============== 全域常數實例 ==============
BUDGET = BudgetConfig()
ENGINE = EngineConfig()
EXPERIMENT = ExperimentConfig()
UI = UIConfig()
SYSTEM = SystemConfig()


# ============== 輔助函數 ==============
def get_suite_names() -> List[str]:
    """取得所有實驗套件名稱"""
    return EXPERIMENT.SUITES.copy()


def override_budget(limit: int) -> None:
    """CLI --budget：同時覆蓋 domain 與遊戲狀態預算"""
    BUDGET.DOMAIN_CELLS = limit
    BUDGET.GAME_STATES = limit
