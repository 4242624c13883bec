# services/cfi.py
"""
CFI 圖產生服務
職責：驗證 base graph、建構（扭轉的）CFI 圖並保留來源資訊

特性:
- gadget F(v) = 偶同位位元向量，依 itertools.product 順序（即二進位數遞增）
- 頂點 v 的第 i 條邊 = 依鄰居索引遞增排序後的第 i 個鄰居
- CFI 頂點編號依 (base 頂點, 位元向量) 字典序，跨執行穩定
"""
import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import networkx as nx

from services.errors import GraphError
from services.graphs import ColoredGraph, Edge, make_graph
from services.logger import logger

CfiTag = Tuple[int, Tuple[int, ...]]


@dataclass(frozen=True)
class BaseGraph:
    """連通、每個頂點顏色相異的圖；顏色順序即頂點順序"""
    graph: ColoredGraph

    @property
    def n(self) -> int:
        return self.graph.n

    def edges(self) -> List[Edge]:
        return self.graph.sorted_edges()


@dataclass(frozen=True)
class CfiGraph:
    """CFI 圖 + 來源：base graph、每個頂點的 (v, ā)、扭轉集合 S"""
    graph: ColoredGraph
    base: BaseGraph
    tags: Tuple[CfiTag, ...]
    twist: FrozenSet[Edge]

    def gadget(self, v: int) -> List[int]:
        return [x for x, (u, _) in enumerate(self.tags) if u == v]

    def provenance(self) -> Dict[int, List]:
        return provenance_map(self)


def validate_base(G: ColoredGraph) -> BaseGraph:
    """
    檢查 base graph 條件

    Raises:
        GraphError: 空圖、不連通或顏色重複
    """
    if G.n == 0:
        raise GraphError("base graph needs at least one vertex")
    if len(set(G.colors)) != G.n:
        raise GraphError("base graph colors must be pairwise distinct")
    if not nx.is_connected(G.to_networkx()):
        raise GraphError("base graph must be connected")
    return BaseGraph(G)


def as_base(G: ColoredGraph) -> BaseGraph:
    """以頂點索引為顏色重新著色後驗證"""
    return validate_base(make_graph(G.n, G.edges, range(G.n)))


def _even_vectors(d: int) -> List[Tuple[int, ...]]:
    return [a for a in itertools.product((0, 1), repeat=d) if sum(a) % 2 == 0]


def _normalize_twist(B: BaseGraph, S: Iterable[Sequence[int]]) -> FrozenSet[Edge]:
    twist = set()
    for edge in S:
        u, v = int(edge[0]), int(edge[1])
        e = (min(u, v), max(u, v))
        if e not in B.graph.edges:
            raise GraphError(f"twist edge {tuple(edge)} is not an edge of the base graph")
        twist.add(e)
    return frozenset(twist)


def build_cfi(B: BaseGraph, S: Iterable[Sequence[int]] = ()) -> CfiGraph:
    """
    建構 X̃_S(B)

    Args:
        B: base graph
        S: 扭轉的 base 邊

    Returns:
        CfiGraph；base 邊 {u,v} 為 u 的第 i 條邊、v 的第 j 條邊時，
        (u,ā) ~ (v,b̄) iff a_i = b_j，{u,v} ∈ S 時改為 a_i ≠ b_j
    """
    G = B.graph
    twist = _normalize_twist(B, S)

    tags: List[CfiTag] = []
    ids: Dict[CfiTag, int] = {}
    gadgets: Dict[int, List[Tuple[int, ...]]] = {}
    for v in range(G.n):
        gadgets[v] = _even_vectors(G.degree(v))
        for a in gadgets[v]:
            ids[(v, a)] = len(tags)
            tags.append((v, a))

    edges = []
    for u, v in G.sorted_edges():
        i = G.neighbors(u).index(v)
        j = G.neighbors(v).index(u)
        twisted = (u, v) in twist
        for a in gadgets[u]:
            for b in gadgets[v]:
                if (a[i] == b[j]) != twisted:
                    edges.append((ids[(u, a)], ids[(v, b)]))

    colors = [G.colors[v] for v, _ in tags]
    graph = make_graph(len(tags), edges, colors)
    logger.debug(f"build_cfi: base n={G.n}, twist={sorted(twist)} -> {graph.n} vertices, {len(graph.edges)} edges")
    return CfiGraph(graph=graph, base=B, tags=tuple(tags), twist=twist)


def cfi_pair(B: BaseGraph) -> Tuple[CfiGraph, CfiGraph]:
    """(X(B), X̃(B))：扭轉放在最小的 base 邊上"""
    edges = B.edges()
    if not edges:
        raise GraphError("base graph has no edge to twist")
    return build_cfi(B), build_cfi(B, [edges[0]])


def _edge_set(S: Iterable[Sequence[int]]) -> FrozenSet[Edge]:
    return frozenset((min(int(u), int(v)), max(int(u), int(v))) for u, v in S)


def twist_parity_equal(S: Iterable, T: Iterable) -> bool:
    """X̃_S ≅ X̃_T iff |S| ≡ |T| (mod 2)；(u,v) 與 (v,u) 是同一條邊"""
    return len(_edge_set(S)) % 2 == len(_edge_set(T)) % 2


def provenance_map(cfi: CfiGraph) -> Dict[int, List]:
    """{CFI 頂點: [base 頂點, 位元向量]}"""
    return {x: [v, list(a)] for x, (v, a) in enumerate(cfi.tags)}
