# repository/graph_repository.py
"""
圖資料存取層
職責：JSON 圖格式 {"n", "edges", "colors"} 的讀寫、CFI 來源 sidecar、
      "-" 代表 stdin / stdout 以便串接
"""
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, TextIO

from repository.base_repository import BaseRepository, PathLike, RepositoryError
from services.cfi import CfiGraph
from services.errors import GraphError
from services.graphs import ColoredGraph, graph_from_dict

STDIO = "-"
PROVENANCE_SUFFIX = ".provenance.json"


def dumps_graph(G: ColoredGraph) -> str:
    return json.dumps(G.to_dict(), separators=(",", ":")) + "\n"


def loads_graph(text: str) -> ColoredGraph:
    """
    解析 JSON 圖

    Raises:
        GraphError: 不是合法 JSON，或不符合圖格式
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise GraphError(f"invalid JSON graph: {e}") from e
    if not isinstance(data, dict):
        raise GraphError("JSON graph must be an object with keys n, edges, colors")
    return graph_from_dict(data)


class GraphRepository(BaseRepository):
    """圖 Repository"""

    def __init__(self, root: PathLike = ".", stdin: Optional[TextIO] = None, stdout: Optional[TextIO] = None):
        super().__init__(root, ".json")
        self.stdin = stdin
        self.stdout = stdout

    def load(self, name: PathLike) -> ColoredGraph:
        """讀取一張圖；name 為 "-" 時讀 stdin"""
        if str(name) == STDIO:
            return loads_graph((self.stdin or sys.stdin).read())
        text = self.find_by_name(name)
        if text is None:
            raise RepositoryError(f"graph file not found: {self.path_for(name)}")
        return loads_graph(text)

    def load_many(self, names: List[PathLike]) -> List[ColoredGraph]:
        if sum(1 for name in names if str(name) == STDIO) > 1:
            raise RepositoryError("stdin can supply at most one graph")
        return [self.load(name) for name in names]

    def save_graph(self, G: ColoredGraph, name: Optional[PathLike] = None) -> Optional[Path]:
        """寫出一張圖；name 為 None 或 "-" 時寫到 stdout"""
        text = dumps_graph(G)
        if name is None or str(name) == STDIO:
            (self.stdout or sys.stdout).write(text)
            return None
        return self.save(name, text)

    def provenance_path(self, name: PathLike) -> Path:
        path = self.path_for(name).resolve()
        return path.with_name(path.stem + PROVENANCE_SUFFIX)

    def save_cfi(self, cfi: CfiGraph, name: Optional[PathLike] = None) -> Dict[str, Optional[Path]]:
        """
        寫出 CFI 圖與 sidecar

        寫到 stdout 時，輸出 {"graph": ..., "provenance": ...} 單一 JSON 物件

        Returns:
            {'graph': 路徑, 'provenance': 路徑}（stdout 時皆為 None）
        """
        provenance = {str(x): value for x, value in cfi.provenance().items()}
        if name is None or str(name) == STDIO:
            payload = {"graph": cfi.graph.to_dict(), "provenance": provenance}
            (self.stdout or sys.stdout).write(json.dumps(payload, separators=(",", ":")) + "\n")
            return {"graph": None, "provenance": None}
        graph_path = self.save(name, dumps_graph(cfi.graph))
        sidecar = self.save(self.provenance_path(name), json.dumps(provenance, sort_keys=True, indent=2) + "\n")
        return {"graph": graph_path, "provenance": sidecar}

    def load_provenance(self, name: PathLike) -> Dict[int, List]:
        text = self.find_by_name(self.provenance_path(name))
        if text is None:
            raise RepositoryError(f"no provenance sidecar for {name}")
        return {int(x): value for x, value in json.loads(text).items()}
