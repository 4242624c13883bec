# repository/report_repository.py
"""
報表資料存取層
職責：實驗報表 CSV（pandas）與巢狀產物 JSON（meter、witness、conflict 清單）
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from repository.base_repository import BaseRepository, PathLike
from services.logger import logger


def _plain(value: Any) -> Any:
    """numpy 純量 / 陣列轉成 JSON 可序列化的 Python 值"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, lineterminator="\n")


def to_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2, default=_plain) + "\n"


class ReportRepository(BaseRepository):
    """報表 Repository：同名的 .csv 與 .json"""

    def __init__(self, root: PathLike = "reports"):
        super().__init__(root)

    def save_frame(self, name: PathLike, frame: pd.DataFrame) -> Path:
        """DataFrame -> CSV（欄位順序固定、無 index）"""
        path = self.save(Path(name).with_suffix(".csv"), frame_to_csv(frame))
        logger.info(f"✅ report saved: {path} ({len(frame)} rows)")
        return path

    def save_json(self, name: PathLike, data: Dict) -> Path:
        return self.save(Path(name).with_suffix(".json"), to_json(data))

    def load_frame(self, name: PathLike) -> Optional[pd.DataFrame]:
        path = self.path_for(Path(name).with_suffix(".csv"))
        if not path.is_file():
            return None
        return pd.read_csv(path)

    def load_json(self, name: PathLike) -> Optional[Dict]:
        text = self.find_by_name(Path(name).with_suffix(".json"))
        return None if text is None else json.loads(text)

    def save_report(self, name: PathLike, frame: pd.DataFrame, artifacts: Optional[Dict] = None) -> Dict[str, Path]:
        """
        同時寫出 CSV 與（有產物時）JSON

        Returns:
            {'csv': 路徑, 'json': 路徑}
        """
        paths = {"csv": self.save_frame(name, frame)}
        if artifacts:
            paths["json"] = self.save_json(name, artifacts)
        return paths
