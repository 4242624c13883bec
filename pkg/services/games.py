# services/games.py
"""
遊戲求解服務
職責：bijective (k1,k2)-pebble game 與 (k1,k2) cops-and-robber game 的精確求解
      （有限回合與無限回合），以及兩者共用的 edge component 計算

特性:
- 兩種遊戲都以「整張狀態表 + 逐回合 backward induction」計算，直到勝集合不再變動
- BP：Duplicator 的雙射步驟以二分圖完美匹配判定，不枚舉雙射
- CR：回合順序為 宣告目的地 → 搶匪在 γ[z/⊥] 的元件內移動 → 警察落地，落地後檢查是否抓到
"""
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

import networkx as nx
import numpy as np

from config.constants import BUDGET
from services.cfi import BaseGraph
from services.errors import ConfigurationError, check_budget
from services.graphs import ColoredGraph, Edge, PartialAssignment, variable_names
from services.logger import logger
from services.matching import has_perfect_matching, maximum_matching
from services.wl import check_configuration
from utils.indexing import AssignmentIndexer


class Winner(str, Enum):
    SPOILER = "Spoiler"
    DUPLICATOR = "Duplicator"
    COPS = "Cops"
    ROBBER = "Robber"


@dataclass(frozen=True)
class BpConfiguration:
    """pebble game 局面：α 在 G 上，β 在 H 上，domain 相同"""
    alpha: PartialAssignment
    beta: PartialAssignment

    @classmethod
    def empty(cls, k1: int, k2: int) -> "BpConfiguration":
        return cls(PartialAssignment.empty(k1, k2), PartialAssignment.empty(k1, k2))


@dataclass(frozen=True)
class CrPosition:
    """cops-and-robber 局面：警察位置 γ 與搶匪所在的邊"""
    gamma: PartialAssignment
    edge: Edge


@dataclass
class FirstMove:
    """一個最佳的第一步"""
    player: Winner
    pebble: Optional[str] = None
    vertex: Optional[int] = None
    edge: Optional[Edge] = None
    bijection: Optional[Dict[int, int]] = None
    rounds: Optional[int] = None  # 勝方在幾回合內獲勝（Spoiler / Cops）

    def to_dict(self) -> Dict:
        data = {"player": self.player.value}
        if self.pebble is not None:
            data["pebble"] = self.pebble
        if self.vertex is not None:
            data["vertex"] = self.vertex
        if self.edge is not None:
            data["edge"] = list(self.edge)
        if self.bijection is not None:
            data["bijection"] = {str(v): w for v, w in sorted(self.bijection.items())}
        if self.rounds is not None:
            data["rounds"] = self.rounds
        return data


def _graph_of(B: Union[BaseGraph, ColoredGraph]) -> ColoredGraph:
    return B.graph if isinstance(B, BaseGraph) else B


# ==================== edge components ====================

def _edge_labels(G: ColoredGraph, occupied: FrozenSet[int]) -> Tuple[np.ndarray, int]:
    """每條邊（依 sorted_edges 順序）的元件編號；元件依最小邊排序"""
    edges = G.sorted_edges()
    g = nx.Graph()
    g.add_nodes_from(range(len(edges)))
    incident: Dict[int, List[int]] = defaultdict(list)
    for i, (u, v) in enumerate(edges):
        incident[u].append(i)
        incident[v].append(i)
    for u, ids in incident.items():
        if u not in occupied:
            g.add_edges_from(zip(ids, ids[1:]))

    labels = np.zeros(len(edges), dtype=np.int64)
    components = sorted(nx.connected_components(g), key=min)
    for c, component in enumerate(components):
        labels[sorted(component)] = c
    return labels, len(components)


def edge_components(G: ColoredGraph, gamma: PartialAssignment) -> List[FrozenSet[Edge]]:
    """
    依 γ 切分邊集合：兩條邊同類 iff 有一條內部頂點都不在 im(γ) 的路徑連接

    Returns:
        元件列表，依最小邊排序
    """
    gamma.validate_for(G)
    edges = G.sorted_edges()
    labels, count = _edge_labels(G, gamma.image)
    return [frozenset(e for e, c in zip(edges, labels) if c == label) for label in range(count)]


# ==================== bijective pebble game ====================

def partial_iso(G: ColoredGraph, H: ColoredGraph, c: BpConfiguration) -> bool:
    """α(z) ↦ β(z) 是否為保持等號、鄰接、非鄰接與顏色的部分同構"""
    a, b = c.alpha.entries, c.beta.entries
    if len(a) != len(b):
        return False
    for p in range(len(a)):
        if (a[p] is None) != (b[p] is None):
            return False
        if a[p] is not None and G.colors[a[p]] != H.colors[b[p]]:
            return False
    for p in range(len(a)):
        for q in range(p + 1, len(a)):
            if a[p] is None or a[q] is None:
                continue
            if (a[p] == a[q]) != (b[p] == b[q]):
                return False
            if G.has_edge(a[p], a[q]) != H.has_edge(b[p], b[q]):
                return False
    return True


def _pair_digits(G: ColoredGraph, H: ColoredGraph, c: BpConfiguration) -> Tuple[int, ...]:
    """局面編碼：0 = ⊥，否則 1 + v·|H| + w"""
    return tuple(
        0 if v is None else 1 + v * H.n + w
        for v, w in zip(c.alpha.entries, c.beta.entries)
    )


def _axis_shape(k: int, axes: Tuple[int, ...], radix: int) -> Tuple[int, ...]:
    return tuple(radix if i in axes else 1 for i in range(k))


def _partial_iso_array(G: ColoredGraph, H: ColoredGraph, k: int) -> np.ndarray:
    """所有局面的部分同構判定，shape (R,)*k"""
    radix = 1 + G.n * H.n
    v_of = np.repeat(np.arange(G.n), H.n)
    w_of = np.tile(np.arange(H.n), G.n)

    color_ok = np.ones(radix, dtype=bool)
    color_ok[1:] = np.asarray(G.colors, dtype=np.int64)[v_of] == np.asarray(H.colors, dtype=np.int64)[w_of]
    pair_ok = np.ones((radix, radix), dtype=bool)
    same = (v_of[:, None] == v_of[None, :]) == (w_of[:, None] == w_of[None, :])
    adjacent = G.adjacency[np.ix_(v_of, v_of)] == H.adjacency[np.ix_(w_of, w_of)]
    pair_ok[1:, 1:] = same & adjacent

    table = np.ones((radix,) * k, dtype=bool)
    for p in range(k):
        table &= color_ok.reshape(_axis_shape(k, (p,), radix))
    for p in range(k):
        for q in range(p + 1, k):
            table &= pair_ok.reshape(_axis_shape(k, (p, q), radix))
    return table


def _matching_contexts(win: np.ndarray, p: int, nG: int, nH: int) -> np.ndarray:
    """對 pebble p 的每個「其餘位置」context，W = {(v,w)} 是否有完美匹配；已展開回 (R,)*k"""
    k = win.ndim
    radix = win.shape[0]
    context_shape = (radix,) * (k - 1)
    if nG != nH:
        ok = np.zeros(context_shape, dtype=bool)
    elif nG == 0:
        ok = np.ones(context_shape, dtype=bool)
    else:
        relations = np.moveaxis(win, p, -1)[..., 1:].reshape(-1, nG, nH)
        ok = np.fromiter((has_perfect_matching(rel) for rel in relations), dtype=bool, count=len(relations))
        ok = ok.reshape(context_shape)
    return np.expand_dims(ok, p)


@dataclass
class BpTable:
    """所有局面的 Duplicator 勝集合，逐回合保存"""
    G: ColoredGraph
    H: ColoredGraph
    k1: int
    k2: int
    history: List[np.ndarray] = field(default_factory=list)
    stable: bool = False

    @property
    def rounds(self) -> int:
        """勝集合穩定前的回合數"""
        return len(self.history) - 1

    def at(self, r: Optional[int]) -> np.ndarray:
        if r is None:
            if not self.stable:
                raise ConfigurationError("unbounded game requested from a truncated table")
            return self.history[-1]
        if r < len(self.history):
            return self.history[r]
        if not self.stable:
            raise ConfigurationError(f"round {r} was not computed (budget {self.rounds})")
        return self.history[-1]

    def duplicator_wins(self, c: BpConfiguration, r: Optional[int] = None) -> bool:
        return bool(self.at(r)[_pair_digits(self.G, self.H, c)])

    def pickable(self, c: BpConfiguration) -> List[int]:
        """Spoiler 可選的 pebble：所有 x，以及尚未放置的 y"""
        return [p for p in range(self.k1 + self.k2) if p < self.k1 or c.alpha.entries[p] is None]

    def relation(self, c: BpConfiguration, p: int, r: Optional[int]) -> np.ndarray:
        """W = {(v,w) : Duplicator 在 r 回合內從 (α[p/v], β[p/w]) 獲勝}"""
        digits = list(_pair_digits(self.G, self.H, c))
        win = self.at(r)
        relation = np.zeros((self.G.n, self.H.n), dtype=bool)
        for v in range(self.G.n):
            for w in range(self.H.n):
                digits[p] = 1 + v * self.H.n + w
                relation[v, w] = win[tuple(digits)]
        return relation


def bp_table(
    G: ColoredGraph,
    H: ColoredGraph,
    k1: int,
    k2: int,
    r: Optional[int] = None,
) -> BpTable:
    """
    BP_(k1,k2)(G, H) 所有局面的勝負表

    win_0 = 部分同構；win_{t+1}(s) = win_0(s) ∧ 對每個可選 pebble p，W 有完美匹配

    Args:
        G, H: 兩張圖（頂點數可不同，此時有可選 pebble 的局面 Spoiler 一回合獲勝）
        k1, k2: 可重用 / 不可重用 pebble 數
        r: 回合上限，None = 直到穩定
    """
    if k1 < 0 or k2 < 0 or k1 + k2 < 1:
        raise ConfigurationError("pebble game needs k1 + k2 >= 1")
    k = k1 + k2
    radix = 1 + G.n * H.n
    check_budget("game-states", BUDGET.GAME_STATES, radix ** k)

    initial = _partial_iso_array(G, H, k)
    unplaced = np.arange(radix) == 0
    table = BpTable(G, H, k1, k2, history=[initial])

    current = initial
    while r is None or table.rounds < r:
        nxt = initial.copy()
        for p in range(k):
            ok = _matching_contexts(current, p, G.n, H.n)
            if p < k1:
                nxt &= ok
            else:
                nxt &= ok | ~unplaced.reshape(_axis_shape(k, (p,), radix))
        if np.array_equal(nxt, current):
            table.stable = True
            break
        table.history.append(nxt)
        current = nxt
        logger.debug(f"bp_table({k1},{k2}): round {table.rounds}, duplicator states={int(nxt.sum())}")
    return table


def _configuration(G, H, k1, k2, init: Optional[BpConfiguration]) -> BpConfiguration:
    c = init or BpConfiguration.empty(k1, k2)
    check_configuration(c.alpha, c.beta, k1, k2)
    c.alpha.validate_for(G)
    c.beta.validate_for(H)
    return c


def bp_solve(
    G: ColoredGraph,
    H: ColoredGraph,
    k1: int,
    k2: int,
    r: Optional[int] = None,
    init: Optional[BpConfiguration] = None,
) -> Winner:
    """BP_(k1,k2)^r(G, H) 從 init（預設空局面）開始的勝方"""
    c = _configuration(G, H, k1, k2, init)
    table = bp_table(G, H, k1, k2, r)
    return Winner.DUPLICATOR if table.duplicator_wins(c, r) else Winner.SPOILER


def bp_first_move(
    G: ColoredGraph,
    H: ColoredGraph,
    k1: int,
    k2: int,
    r: Optional[int] = None,
    init: Optional[BpConfiguration] = None,
) -> FirstMove:
    """
    一個最佳的第一步

    Spoiler 勝：最快獲勝回合數與一個 W 沒有完美匹配的 pebble；
    Duplicator 勝：對第一個可選 pebble 回應的雙射
    """
    c = _configuration(G, H, k1, k2, init)
    table = bp_table(G, H, k1, k2, r)
    names = variable_names(k1, k2)

    if table.duplicator_wins(c, r):
        move = FirstMove(Winner.DUPLICATOR)
        pickable = table.pickable(c)
        if pickable and G.n == H.n and r != 0:
            p = pickable[0]
            previous = None if r is None else max(r - 1, 0)
            move.pebble = names[p]
            move.bijection = maximum_matching(table.relation(c, p, previous))
        return move

    digits = _pair_digits(G, H, c)
    fastest = next(t for t in range(len(table.history)) if not table.history[t][digits])
    move = FirstMove(Winner.SPOILER, rounds=fastest)
    if fastest > 0:
        for p in table.pickable(c):
            if not has_perfect_matching(table.relation(c, p, fastest - 1)):
                move.pebble = names[p]
                break
    return move


# ==================== cops and robber ====================

@dataclass
class CrTable:
    """cops_win[γ, e]：警察在 r 回合內從 (γ, e) 獲勝；γ 以 AssignmentIndexer 編碼"""
    graph: ColoredGraph
    k1: int
    k2: int
    history: List[np.ndarray] = field(default_factory=list)
    stable: bool = False

    @property
    def rounds(self) -> int:
        return len(self.history) - 1

    @property
    def indexer(self) -> AssignmentIndexer:
        return AssignmentIndexer(self.graph.n, self.k1 + self.k2)

    def at(self, r: Optional[int]) -> np.ndarray:
        if r is None:
            if not self.stable:
                raise ConfigurationError("unbounded game requested from a truncated table")
            return self.history[-1]
        if r < len(self.history):
            return self.history[r]
        if not self.stable:
            raise ConfigurationError(f"round {r} was not computed (budget {self.rounds})")
        return self.history[-1]

    def cops_win(self, position: CrPosition, r: Optional[int] = None) -> bool:
        edges = self.graph.sorted_edges()
        edge = (min(position.edge), max(position.edge))
        if edge not in edges:
            raise ConfigurationError(f"robber edge {position.edge} is not an edge of the base graph")
        return bool(self.at(r)[self.indexer.encode(position.gamma.entries), edges.index(edge)])

    def cops_win_start(self, r: Optional[int] = None) -> bool:
        """空 γ，搶匪自選起始邊"""
        empty = self.indexer.encode((None,) * (self.k1 + self.k2))
        return bool(self.at(r)[empty].all())


def cr_table(
    B: Union[BaseGraph, ColoredGraph],
    k1: int,
    k2: int,
    r: Optional[int] = None,
) -> CrTable:
    """
    CR_(k1,k2)(B) 所有局面的勝負表

    C_0 = 已抓到；C_{t+1}(γ,e) = 已抓到 ∨ ∃ 可移動的 z, w：
    ∀ e' ∈ comp(e, γ[z/⊥])：C_t(γ[z/w], e')
    """
    if k1 < 0 or k2 < 0 or k1 + k2 < 1:
        raise ConfigurationError("cops and robber needs k1 + k2 >= 1")
    G = _graph_of(B)
    n, k = G.n, k1 + k2
    edges = G.sorted_edges()
    m = len(edges)
    indexer = AssignmentIndexer(n, k)
    check_budget("game-states", BUDGET.GAME_STATES, indexer.size * max(m, 1))

    digits = indexer.digits()
    occupied = np.zeros((indexer.size, n + 1), dtype=bool)
    occupied[np.arange(indexer.size)[:, None], digits] = True
    occupied = occupied[:, :n]
    ends = np.array(edges, dtype=np.int64).reshape(m, 2)
    caught = occupied[:, ends[:, 0]] & occupied[:, ends[:, 1]]

    places = [indexer.radix ** (k - 1 - p) for p in range(k)]
    labels_cache: Dict[FrozenSet[int], Tuple[np.ndarray, int]] = {}

    def labels_for(entries: np.ndarray) -> Tuple[np.ndarray, int]:
        key = frozenset(int(v) for v in entries if v != n)
        if key not in labels_cache:
            labels_cache[key] = _edge_labels(G, key)
        return labels_cache[key]

    table = CrTable(G, k1, k2, history=[caught])
    current = caught
    while r is None or table.rounds < r:
        nxt = caught.copy()
        for s in range(indexer.size):
            entries = digits[s]
            for p in range(k):
                if p >= k1 and entries[p] != n:
                    continue
                lifted = entries.copy()
                lifted[p] = n
                labels, count = labels_for(lifted)
                base = s + (n - int(entries[p])) * places[p]
                good = np.zeros(m, dtype=bool)
                for w in range(n):
                    landed = current[base + (w - n) * places[p]]
                    component_ok = np.ones(count, dtype=bool)
                    np.logical_and.at(component_ok, labels, landed)
                    good |= component_ok[labels]
                nxt[s] |= good
        if np.array_equal(nxt, current):
            table.stable = True
            break
        table.history.append(nxt)
        current = nxt
        logger.debug(f"cr_table({k1},{k2}): round {table.rounds}, cop states={int(nxt.sum())}")
    return table


def cr_solve(B: Union[BaseGraph, ColoredGraph], k1: int, k2: int, r: Optional[int] = None) -> Winner:
    """搶匪自選起始邊；警察必須對每一條起始邊都能在 r 回合內獲勝"""
    table = cr_table(B, k1, k2, r)
    return Winner.COPS if table.cops_win_start(r) else Winner.ROBBER


def cr_first_move(B: Union[BaseGraph, ColoredGraph], k1: int, k2: int, r: Optional[int] = None) -> FirstMove:
    """
    Cops 勝：最快獲勝回合數、要移動的警察與目的地（對所有起始邊都成立）；
    Robber 勝：一條存活的起始邊
    """
    table = cr_table(B, k1, k2, r)
    G = table.graph
    edges = G.sorted_edges()
    indexer = table.indexer
    empty = indexer.encode((None,) * (k1 + k2))
    names = variable_names(k1, k2)

    if not table.cops_win_start(r):
        final = table.at(r)
        survivor = next(i for i in range(len(edges)) if not final[empty, i])
        return FirstMove(Winner.ROBBER, edge=edges[survivor])

    fastest = next(t for t in range(len(table.history)) if table.history[t][empty].all())
    move = FirstMove(Winner.COPS, rounds=fastest)
    if fastest == 0:
        return move
    previous = table.history[fastest - 1]
    labels, count = _edge_labels(G, frozenset())
    for p in range(k1 + k2):
        for w in range(G.n):
            entries = [None] * (k1 + k2)
            entries[p] = w
            landed = previous[indexer.encode(entries)]
            component_ok = np.ones(count, dtype=bool)
            np.logical_and.at(component_ok, labels, landed)
            if component_ok[labels].all():
                move.pebble, move.vertex = names[p], w
                return move
    return move
