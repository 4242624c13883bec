import logging
import os
from typing import Optional


def _get_log_level() -> int:
    """從環境變數讀取 LOG_LEVEL，預設 INFO。"""
    level_str = os.getenv("LOG_LEVEL", "INFO").upper()
    return getattr(logging, level_str, logging.INFO)


# 設定基本 logging 格式（只會在第一次 import 時執行）
logging.basicConfig(
    level=_get_log_level(),
    format="%(asctime)s [%(levelname)s] %(name)s - %(message)s",
)

# 專用的 engine logger
logger = logging.getLogger("kwl_engine")
logger.setLevel(_get_log_level())


def log_engine_run(
    engine: str,
    subject: str,
    success: bool,
    rounds: Optional[int] = None,
    cells: Optional[int] = None,
    error: Optional[str] = None,
) -> None:
    """統一的演算法執行日誌格式。

    Args:
        engine: 演算法名稱，例如 "owl_restricted", "stream", "bp_solve"
        subject: 輸入描述，例如 "G|H (k1=1,k2=1)"
        success: 是否成功
        rounds: refinement / 遊戲回合數（可選）
        cells: MemoryMeter 峰值 cells（可選）
        error: 錯誤訊息（失敗時可選）
    """
    status = "SUCCESS" if success else "FAILED"
    base_msg = f"[ENGINE] {engine} {subject} - {status}"

    details = []
    if rounds is not None:
        details.append(f"rounds={rounds}")
    if cells is not None:
        details.append(f"cells={cells}")
    if details:
        base_msg += f" ({', '.join(details)})"

    if error and not success:
        base_msg += f" | error={error}"

    if success:
        logger.info(base_msg)
    else:
        logger.error(base_msg)
