# services/graphs.py
"""
圖形核心服務
職責：ColoredGraph 資料模型、各族群產生器、原子型別 (atomic type)、
小規模同構判定 (iso_oracle) 與 degree profile

特性:
- 頂點為 0..n-1 的整數；顏色為非負整數，整數大小即顏色順序
- 所有型別建構後不可變更
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple
import random

import networkx as nx
import numpy as np

from config.constants import BUDGET
from services.errors import ConfigurationError, GraphError, check_budget
from services.logger import logger

Edge = Tuple[int, int]

FAMILIES = (
    "grid",
    "bridged_grid",
    "tree_of_grids",
    "perfect_binary_tree",
    "complete",
    "star",
    "path",
    "cycle",
)


# ==================== 資料模型 ====================

@dataclass(frozen=True)
class ColoredGraph:
    """有限簡單圖 + 全域頂點著色"""
    n: int
    edges: FrozenSet[Edge]
    colors: Tuple[int, ...]

    @cached_property
    def neighbor_sets(self) -> Tuple[FrozenSet[int], ...]:
        adj: List[set] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(s) for s in adj)

    @cached_property
    def adjacency(self) -> np.ndarray:
        matrix = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges:
            matrix[u, v] = True
            matrix[v, u] = True
        return matrix

    def neighbors(self, v: int) -> Tuple[int, ...]:
        """依頂點索引遞增排序的鄰居"""
        return tuple(sorted(self.neighbor_sets[v]))

    def degree(self, v: int) -> int:
        return len(self.neighbor_sets[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def color_histogram(self) -> Dict[int, int]:
        hist: Dict[int, int] = {}
        for c in self.colors:
            hist[c] = hist.get(c, 0) + 1
        return dict(sorted(hist.items()))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        for v in range(self.n):
            g.add_node(v, color=self.colors[v])
        g.add_edges_from(self.sorted_edges())
        return g

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "edges": [list(e) for e in self.sorted_edges()],
            "colors": list(self.colors),
        }


@dataclass(frozen=True)
class PartialAssignment:
    """[x_{k1}, y_{k2}] -> V ∪ {⊥}；entries 依 x1..x{k1}, y1..y{k2} 排列，None 表示 ⊥"""
    k1: int
    k2: int
    entries: Tuple[Optional[int], ...] = field(default=())

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0:
            raise ConfigurationError("k1 and k2 must be non-negative")
        if not self.entries:
            object.__setattr__(self, "entries", (None,) * (self.k1 + self.k2))
        if len(self.entries) != self.k1 + self.k2:
            raise ConfigurationError(
                f"assignment needs {self.k1 + self.k2} entries, got {len(self.entries)}"
            )

    @classmethod
    def empty(cls, k1: int, k2: int) -> "PartialAssignment":
        return cls(k1, k2, (None,) * (k1 + k2))

    @classmethod
    def from_mapping(cls, k1: int, k2: int, mapping: Mapping[str, int]) -> "PartialAssignment":
        names = variable_names(k1, k2)
        entries: List[Optional[int]] = [None] * (k1 + k2)
        for name, vertex in mapping.items():
            if name not in names:
                raise ConfigurationError(f"unknown variable {name!r} for k1={k1}, k2={k2}")
            entries[names.index(name)] = vertex
        return cls(k1, k2, tuple(entries))

    @property
    def size(self) -> int:
        return self.k1 + self.k2

    @property
    def domain(self) -> FrozenSet[int]:
        """已賦值的位置"""
        return frozenset(p for p, v in enumerate(self.entries) if v is not None)

    @property
    def image(self) -> FrozenSet[int]:
        return frozenset(v for v in self.entries if v is not None)

    @property
    def unassigned_y(self) -> Tuple[int, ...]:
        """J(α)：尚未賦值的 y 位置（entries 索引）"""
        return tuple(p for p in range(self.k1, self.size) if self.entries[p] is None)

    @property
    def x_part(self) -> Tuple[Optional[int], ...]:
        return self.entries[: self.k1]

    @property
    def y_part(self) -> Tuple[Optional[int], ...]:
        return self.entries[self.k1:]

    def with_value(self, position: int, vertex: Optional[int]) -> "PartialAssignment":
        entries = list(self.entries)
        entries[position] = vertex
        return PartialAssignment(self.k1, self.k2, tuple(entries))

    def as_mapping(self) -> Dict[str, int]:
        names = variable_names(self.k1, self.k2)
        return {names[p]: v for p, v in enumerate(self.entries) if v is not None}

    def validate_for(self, G: ColoredGraph) -> None:
        for v in self.entries:
            if v is not None and not 0 <= v < G.n:
                raise ConfigurationError(f"vertex {v} out of range for graph of order {G.n}")


@dataclass(frozen=True, order=True)
class AtomicType:
    """原子型別的標準編碼：⊥ 模式、顏色、等號模式、鄰接模式"""
    code: Tuple[int, ...]


def variable_names(k1: int, k2: int) -> List[str]:
    return [f"x{i}" for i in range(1, k1 + 1)] + [f"y{j}" for j in range(1, k2 + 1)]


def variable_position(name: str, k1: int, k2: int) -> int:
    names = variable_names(k1, k2)
    if name not in names:
        raise ConfigurationError(f"unknown variable {name!r} for k1={k1}, k2={k2}")
    return names.index(name)


# ==================== 建構 ====================

def make_graph(n: int, edges: Iterable[Sequence[int]], colors: Sequence[int]) -> ColoredGraph:
    """
    建立並驗證 ColoredGraph

    Args:
        n: 頂點數
        edges: 邊列表（無向、重複者自動去除）
        colors: 長度 n 的顏色列表

    Returns:
        ColoredGraph
    """
    if n < 0:
        raise GraphError(f"vertex count must be non-negative, got {n}")
    colors = tuple(int(c) for c in colors)
    if len(colors) != n:
        raise GraphError(f"expected {n} colors, got {len(colors)}")
    if any(c < 0 for c in colors):
        raise GraphError("colors must be non-negative integers")

    normalized = set()
    for edge in edges:
        if len(edge) != 2:
            raise GraphError(f"edge {edge!r} is not a pair")
        u, v = int(edge[0]), int(edge[1])
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) has an endpoint out of range")
        normalized.add((min(u, v), max(u, v)))

    return ColoredGraph(n=n, edges=frozenset(normalized), colors=colors)


def graph_from_dict(data: Mapping) -> ColoredGraph:
    """JSON 圖格式 {"n", "edges", "colors"} -> ColoredGraph"""
    try:
        n = int(data["n"])
        edges = data.get("edges", [])
        colors = data.get("colors", [0] * n)
    except (KeyError, TypeError, ValueError) as e:
        raise GraphError(f"malformed graph object: {e}") from e
    return make_graph(n, edges, colors)


def from_networkx(g: nx.Graph, colors: Optional[Sequence[int]] = None) -> ColoredGraph:
    """networkx 圖 -> ColoredGraph（節點依排序重新編號）"""
    nodes = sorted(g.nodes())
    index = {node: i for i, node in enumerate(nodes)}
    edges = [(index[u], index[v]) for u, v in g.edges()]
    if colors is None:
        colors = [int(g.nodes[node].get("color", 0)) for node in nodes]
    return make_graph(len(nodes), edges, colors)


def _uniform(n: int, base_coloring: bool) -> List[int]:
    return list(range(n)) if base_coloring else [0] * n


def _grid_edges(h: int, l: int, offset: int = 0) -> List[Edge]:
    edges = []
    for i in range(h):
        for j in range(l):
            v = offset + i * l + j
            if j + 1 < l:
                edges.append((v, v + 1))
            if i + 1 < h:
                edges.append((v, v + l))
    return edges


def _bridged_grid_edges(h: int, l: int, offset: int = 0) -> List[Edge]:
    edges = _grid_edges(h, l, offset)
    bridge = offset + h * l
    # 橋接點連到每一列的第 ⌊l/2⌋ 與 ⌊l/2⌋+1 欄（1-indexed）
    left = l // 2 - 1
    for i in range(h):
        edges.append((bridge, offset + i * l + left))
        edges.append((bridge, offset + i * l + left + 1))
    return edges


def gen_family(family: str, *params: int, base_coloring: bool = False) -> ColoredGraph:
    """
    產生族群圖

    Args:
        family: grid / bridged_grid / tree_of_grids / perfect_binary_tree /
                complete / star / path / cycle
        params: 族群參數
        base_coloring: True 時每個頂點獨立顏色（依索引遞增）

    Returns:
        ColoredGraph
    """
    def need(count: int) -> None:
        if len(params) != count:
            raise ConfigurationError(f"{family} takes {count} parameter(s), got {len(params)}")

    if family == "grid":
        need(2)
        h, l = params
        if h < 1 or l < 1:
            raise ConfigurationError("grid requires h >= 1 and l >= 1")
        n, edges = h * l, _grid_edges(h, l)

    elif family == "bridged_grid":
        need(2)
        h, l = params
        if h < 1 or l < 2:
            raise ConfigurationError("bridged_grid requires h >= 1 and l >= 2")
        n, edges = h * l + 1, _bridged_grid_edges(h, l)

    elif family == "tree_of_grids":
        need(3)
        d, h, l = params
        if d < 1 or h < 1 or l < 2:
            raise ConfigurationError("tree_of_grids requires d >= 1, h >= 1, l >= 2")
        block = h * l + 1
        nodes = 2 ** (d + 1) - 1
        n = nodes * block
        edges = []
        for t in range(nodes):
            edges.extend(_bridged_grid_edges(h, l, offset=t * block))
            for child in (2 * t + 1, 2 * t + 2):
                if child < nodes:
                    # 父格最後一欄與子格第一欄逐列相連
                    for i in range(h):
                        edges.append((t * block + i * l + l - 1, child * block + i * l))

    elif family == "perfect_binary_tree":
        need(1)
        (d,) = params
        if d < 0:
            raise ConfigurationError("perfect_binary_tree requires d >= 0")
        n = 2 ** (d + 1) - 1
        edges = [((v - 1) // 2, v) for v in range(1, n)]

    elif family == "complete":
        need(1)
        (n,) = params
        if n < 1:
            raise ConfigurationError("complete requires n >= 1")
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)]

    elif family == "star":
        need(1)
        (leaves,) = params
        if leaves < 1:
            raise ConfigurationError("star requires n >= 1")
        n = leaves + 1
        edges = [(0, v) for v in range(1, n)]

    elif family == "path":
        need(1)
        (n,) = params
        if n < 1:
            raise ConfigurationError("path requires n >= 1")
        edges = _grid_edges(1, n)

    elif family == "cycle":
        need(1)
        (n,) = params
        if n < 3:
            raise ConfigurationError("cycle requires n >= 3")
        edges = [(v, (v + 1) % n) for v in range(n)]

    else:
        raise ConfigurationError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")

    return make_graph(n, edges, _uniform(n, base_coloring))


def disjoint_union(G: ColoredGraph, H: ColoredGraph) -> ColoredGraph:
    shifted = [(u + G.n, v + G.n) for u, v in H.edges]
    return make_graph(G.n + H.n, list(G.edges) + shifted, G.colors + H.colors)


def permuted(G: ColoredGraph, perm: Sequence[int]) -> ColoredGraph:
    """頂點 v 換成 perm[v] 的同構複本"""
    if sorted(perm) != list(range(G.n)):
        raise GraphError("perm is not a permutation of the vertex set")
    colors = [0] * G.n
    for v in range(G.n):
        colors[perm[v]] = G.colors[v]
    return make_graph(G.n, [(perm[u], perm[v]) for u, v in G.edges], colors)


def random_permutation(n: int, seed: int) -> List[int]:
    perm = list(range(n))
    random.Random(seed).shuffle(perm)
    return perm


def random_graph(n: int, p: float, seed: int, num_colors: int = 1) -> ColoredGraph:
    """G(n, p) 隨機圖，可選隨機著色"""
    g = nx.gnp_random_graph(n, p, seed=seed)
    rng = random.Random(seed)
    colors = [rng.randrange(num_colors) for _ in range(n)]
    return make_graph(n, g.edges(), colors)


def individualize(G: ColoredGraph, vs: Sequence[int]) -> ColoredGraph:
    """依序給 vs 中的頂點全新且遞增、大於所有既有顏色的顏色"""
    if len(set(vs)) != len(vs):
        raise GraphError("individualized vertices must be distinct")
    for v in vs:
        if not 0 <= v < G.n:
            raise GraphError(f"vertex {v} out of range")
    if not vs:
        return G
    colors = list(G.colors)
    fresh = max(colors) + 1
    for offset, v in enumerate(vs):
        colors[v] = fresh + offset
    return ColoredGraph(n=G.n, edges=G.edges, colors=tuple(colors))


# ==================== 不變量 ====================

def degree_sequence(G: ColoredGraph) -> Tuple[int, ...]:
    return tuple(sorted(G.degree(v) for v in range(G.n)))


def neighborhood_degree_sequence(G: ColoredGraph) -> Tuple[Tuple[int, ...], ...]:
    profile = [tuple(sorted(G.degree(w) for w in G.neighbor_sets[v])) for v in range(G.n)]
    return tuple(sorted(profile))


def degree_profiles(G: ColoredGraph) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
    """(degree sequence, neighborhood-degree sequence)，multiset 以排序 tuple 表示"""
    return degree_sequence(G), neighborhood_degree_sequence(G)


def atomic_type_rows(G: ColoredGraph, entries: np.ndarray) -> np.ndarray:
    """
    向量化原子型別編碼

    Args:
        G: 圖
        entries: shape (N, k) 的符號矩陣，⊥ 以 G.n 表示

    Returns:
        shape (N, width) 的整數矩陣；兩列相等 iff 原子型別相等，
        列的字典序與圖無關（可跨圖比較）
    """
    entries = np.asarray(entries, dtype=np.int64)
    count, k = entries.shape
    n = G.n
    colors_ext = np.append(np.asarray(G.colors, dtype=np.int64), -1)
    adj_ext = np.zeros((n + 1, n + 1), dtype=np.int64)
    adj_ext[:n, :n] = G.adjacency

    assigned = entries != n
    columns = [(~assigned).astype(np.int64), colors_ext[entries]]
    for p in range(k):
        for q in range(p + 1, k):
            both = assigned[:, p] & assigned[:, q]
            columns.append((both & (entries[:, p] == entries[:, q])).astype(np.int64)[:, None])
            columns.append(adj_ext[entries[:, p], entries[:, q]][:, None])
    if not columns or count == 0:
        return np.zeros((count, 0), dtype=np.int64)
    return np.concatenate(columns, axis=1)


def atomic_type(G: ColoredGraph, alpha: PartialAssignment) -> AtomicType:
    alpha.validate_for(G)
    row = np.array([[G.n if v is None else v for v in alpha.entries]], dtype=np.int64)
    return AtomicType(tuple(int(c) for c in atomic_type_rows(G, row)[0]))


# ==================== 同構判定 ====================

def _vertex_signature(G: ColoredGraph, v: int) -> Tuple:
    nbrs = sorted((G.colors[w], G.degree(w)) for w in G.neighbor_sets[v])
    return (G.colors[v], G.degree(v), tuple(nbrs))


def _search_order(G: ColoredGraph, candidates: List[List[int]]) -> List[int]:
    """每次挑「已排序鄰居最多、候選最少、索引最小」的頂點"""
    order: List[int] = []
    placed = set()
    while len(order) < G.n:
        best = min(
            (v for v in range(G.n) if v not in placed),
            key=lambda v: (-len(G.neighbor_sets[v] & placed), len(candidates[v]), v),
        )
        order.append(best)
        placed.add(best)
    return order


def iso_oracle(G: ColoredGraph, H: ColoredGraph, node_budget: Optional[int] = None) -> Optional[Dict[int, int]]:
    """
    回溯搜尋顏色與鄰接保持的雙射

    Args:
        G, H: 小圖（約 16 頂點以內）
        node_budget: 搜尋節點上限，預設 BUDGET.ISO_NODES

    Returns:
        同構映射 {v: w}，不同構則回傳 None
    """
    limit = BUDGET.ISO_NODES if node_budget is None else node_budget
    if G.n != H.n or len(G.edges) != len(H.edges):
        return None
    if G.color_histogram() != H.color_histogram() or degree_profiles(G) != degree_profiles(H):
        return None

    sig_h: Dict[Tuple, List[int]] = {}
    for w in range(H.n):
        sig_h.setdefault(_vertex_signature(H, w), []).append(w)
    candidates = [sig_h.get(_vertex_signature(G, v), []) for v in range(G.n)]
    if any(not c for c in candidates):
        return None

    order = _search_order(G, candidates)
    mapping: Dict[int, int] = {}
    used = set()
    nodes = 0

    def extend(depth: int) -> bool:
        nonlocal nodes
        if depth == len(order):
            return True
        v = order[depth]
        for w in candidates[v]:
            if w in used:
                continue
            nodes += 1
            check_budget("iso-nodes", limit, nodes)
            if all(G.has_edge(v, u) == H.has_edge(w, mapped) for u, mapped in mapping.items()):
                mapping[v] = w
                used.add(w)
                if extend(depth + 1):
                    return True
                del mapping[v]
                used.discard(w)
        return False

    found = extend(0)
    logger.debug(f"iso_oracle: n={G.n}, nodes={nodes}, found={found}")
    return dict(sorted(mapping.items())) if found else None


def is_isomorphism(G: ColoredGraph, H: ColoredGraph, f: Mapping[int, int]) -> bool:
    if G.n != H.n or sorted(f) != list(range(G.n)) or sorted(f.values()) != list(range(H.n)):
        return False
    if any(G.colors[v] != H.colors[f[v]] for v in range(G.n)):
        return False
    return {tuple(sorted((f[u], f[v]))) for u, v in G.edges} == set(H.edges)
