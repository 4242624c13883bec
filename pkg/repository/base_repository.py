# repository/base_repository.py
"""
基礎 Repository 類別
提供檔案為底的通用存取模式（find / save / delete），寫入一律 atomic
"""
import os
import tempfile
from pathlib import Path
from typing import List, Optional, Union

from services.errors import EngineError
from services.logger import logger

PathLike = Union[str, Path]


class RepositoryError(EngineError):
    """讀寫檔案失敗"""


class BaseRepository:
    """Repository 基礎類別：root 目錄下副檔名為 suffix 的檔案"""

    def __init__(self, root: PathLike = ".", suffix: str = ""):
        self.root = Path(root)
        self.suffix = suffix

    def path_for(self, name: PathLike) -> Path:
        """名稱 -> 路徑；絕對路徑或已含副檔名者原樣使用"""
        path = Path(name)
        if self.suffix and not path.suffix:
            path = path.with_suffix(self.suffix)
        return path if path.is_absolute() else self.root / path

    def find_all(self) -> List[str]:
        """root 下所有檔案名稱（不含副檔名），依名稱排序"""
        if not self.root.is_dir():
            return []
        pattern = f"*{self.suffix}" if self.suffix else "*"
        return sorted(p.stem for p in self.root.glob(pattern) if p.is_file())

    def exists(self, name: PathLike) -> bool:
        return self.path_for(name).is_file()

    def find_by_name(self, name: PathLike) -> Optional[str]:
        """讀取檔案文字；不存在時回傳 None"""
        path = self.path_for(name)
        if not path.is_file():
            return None
        try:
            return path.read_text(encoding="utf-8")
        except OSError as e:
            logger.error(f"Read error on {path}: {e}")
            raise RepositoryError(f"cannot read {path}: {e}") from e

    def save(self, name: PathLike, text: str) -> Path:
        """
        寫入檔案（暫存檔 + os.replace）

        Args:
            name: 檔名或路徑
            text: 檔案內容

        Returns:
            實際寫入的路徑
        """
        path = self.path_for(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            os.replace(tmp, path)
        except OSError as e:
            if os.path.exists(tmp):
                os.unlink(tmp)
            logger.error(f"Write error on {path}: {e}")
            raise RepositoryError(f"cannot write {path}: {e}") from e
        logger.debug(f"saved {path} ({len(text)} chars)")
        return path

    def delete(self, name: PathLike) -> bool:
        """刪除檔案；回傳是否有刪除"""
        path = self.path_for(name)
        if not path.is_file():
            return False
        path.unlink()
        return True
