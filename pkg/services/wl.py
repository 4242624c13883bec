# services/wl.py
"""
Weisfeiler-Leman refinement 服務
職責：古典 k-WL、古典 k-OWL、(k1,k2)-OWL，全部以單圖或多圖聯合 refinement 執行，
      偵測穩定並計算回合數

特性:
- 每回合把 (舊顏色, 各位置 multiset 簽章) 依字典序排序後重新編號成 0..m-1，
  整數順序即巢狀 multiset 顏色的順序（normalization）
- multiset 簽章是排序後的列表；不同大小的圖以 -1 右側補齊，與 list 字典序一致
- 多圖聯合執行時共用同一個 normalization，跨圖顏色可直接比較
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.constants import BUDGET
from services.errors import ConfigurationError, check_budget
from services.graphs import ColoredGraph, PartialAssignment, atomic_type_rows
from services.logger import logger
from utils.indexing import AssignmentIndexer

SCHEME_PARTIAL = "partial"  # assignment 在 V ∪ {⊥} 上
SCHEME_TOTAL = "total"      # 古典 k-tuple，只在 V 上

NONREUSABLE_MARK = -2
PAD = -1


# ==================== 資料型別 ====================

@dataclass(frozen=True, eq=False)
class ColorTable:
    """一個有限 assignment domain 上著色的 normalization（多圖時依序串接）"""
    sizes: Tuple[int, ...]
    k1: int
    k2: int
    scheme: str
    colors: np.ndarray

    @property
    def k(self) -> int:
        return self.k1 + self.k2

    @property
    def partial(self) -> bool:
        return self.scheme == SCHEME_PARTIAL

    def indexer(self, g: int) -> AssignmentIndexer:
        return AssignmentIndexer(self.sizes[g], self.k, total=not self.partial)

    @cached_property
    def offsets(self) -> Tuple[int, ...]:
        bounds = [0]
        for g in range(len(self.sizes)):
            bounds.append(bounds[-1] + self.indexer(g).size)
        return tuple(bounds)

    def block(self, g: int) -> np.ndarray:
        return self.colors[self.offsets[g]:self.offsets[g + 1]]

    def tensor(self, g: int) -> np.ndarray:
        return self.block(g).reshape(self.indexer(g).shape())

    def color_of(self, g: int, entries: Sequence[Optional[int]]) -> int:
        return int(self.block(g)[self.indexer(g).encode(entries)])

    @property
    def num_classes(self) -> int:
        return int(len(np.unique(self.colors)))

    def block_classes(self, g: int) -> int:
        return int(len(np.unique(self.block(g))))

    def histogram(self, g: int) -> Dict[int, int]:
        values, counts = np.unique(self.block(g), return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def with_colors(self, colors: np.ndarray) -> "ColorTable":
        return ColorTable(self.sizes, self.k1, self.k2, self.scheme, colors)


@dataclass
class RefinementResult:
    """refinement 結果：最終表、穩定回合數、每回合類別數"""
    table: ColorTable
    rounds: int
    stable: bool
    class_counts: List[int]
    graph_class_counts: List[Tuple[int, ...]]
    history: Optional[List[ColorTable]] = None

    def table_at(self, r: int) -> ColorTable:
        """第 r 回合的表；穩定之後的回合與穩定表相同分割"""
        if r >= self.rounds:
            if r > self.rounds and not self.stable:
                raise ConfigurationError(f"round {r} was not computed (budget {self.rounds})")
            return self.table
        if self.history is None:
            raise ConfigurationError("run with keep_history=True to inspect earlier rounds")
        return self.history[r]

    def empty_color(self, g: int, r: Optional[int] = None) -> int:
        table = self.table if r is None else self.table_at(r)
        if not table.partial:
            raise ConfigurationError("total-tuple schemes have no empty assignment")
        return table.color_of(g, (None,) * table.k)

    def distinguishes_empty(self, a: int = 0, b: int = 1, r: Optional[int] = None) -> bool:
        return self.empty_color(a, r) != self.empty_color(b, r)

    def distinguishes_histogram(self, a: int = 0, b: int = 1, r: Optional[int] = None) -> bool:
        table = self.table if r is None else self.table_at(r)
        return table.histogram(a) != table.histogram(b)


# ==================== 共用工具 ====================

def normalize_rows(rows: np.ndarray) -> np.ndarray:
    """依列的字典序給 dense rank（保序 normalization）"""
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    _, inverse = np.unique(rows, axis=0, return_inverse=True)
    return inverse.reshape(-1).astype(np.int64)


def same_partition(old: np.ndarray, new: np.ndarray) -> bool:
    """類別數相同，且 (old, new) 配對數也相同（完整掃描）"""
    old_classes = len(np.unique(old))
    if old_classes != len(np.unique(new)):
        return False
    pairs = np.stack([old, new], axis=1)
    return len(np.unique(pairs, axis=0)) == old_classes


def _pad(field: np.ndarray, width: int) -> np.ndarray:
    missing = width - field.shape[1]
    if missing <= 0:
        return field
    return np.pad(field, ((0, 0), (0, missing)), constant_values=PAD)


def position_field(tensor: np.ndarray, n: int, p: int, partial: bool) -> np.ndarray:
    """位置 p 的 multiset 簽章：{{χ(α[p/w]) : w ∈ V}} 排序後展開到每個 α，shape (N, n)"""
    if n == 0:
        return np.zeros((tensor.size, 0), dtype=np.int64)
    values = np.take(tensor, np.arange(n), axis=p) if partial else tensor
    ordered = np.sort(values, axis=p)
    moved = np.expand_dims(np.moveaxis(ordered, p, -1), p)
    full = np.broadcast_to(moved, tensor.shape + (n,))
    return full.reshape(-1, n)


def signature_rows(
    blocks: Sequence[np.ndarray],
    sizes: Sequence[int],
    k: int,
    positions: Sequence[int],
    nonreusable: Sequence[int] = (),
    partial: bool = True,
) -> np.ndarray:
    """
    一步 oblivious refinement 的排序鍵

    Args:
        blocks: 各圖的顏色（扁平）
        sizes: 各圖頂點數
        k: 位置數
        positions: 要變動的位置
        nonreusable: 只在 ⊥ 時變動的位置（已賦值者填入固定標記）
        partial: assignment 是否含 ⊥

    Returns:
        [舊顏色, 各位置簽章...] 串接後的列矩陣（多圖垂直串接）
    """
    width = max(sizes) if sizes else 0
    parts = []
    for block, n in zip(blocks, sizes):
        radix = n + 1 if partial else n
        tensor = block.reshape((radix,) * k)
        columns = [block.reshape(-1, 1)]
        digits = None
        for p in positions:
            field = _pad(position_field(tensor, n, p, partial), width)
            if p in nonreusable:
                if digits is None:
                    digits = AssignmentIndexer(n, k).digits()
                field = np.where((digits[:, p] == n)[:, None], field, NONREUSABLE_MARK)
            columns.append(field)
        parts.append(np.concatenate(columns, axis=1))
    return np.concatenate(parts, axis=0)


def _check_domain(sizes: Sequence[int], k: int, partial: bool) -> None:
    cells = sum((n + 1 if partial else n) ** k for n in sizes)
    check_budget("domain-cells", BUDGET.DOMAIN_CELLS, cells)


def _initial_table(graphs: Sequence[ColoredGraph], k1: int, k2: int, scheme: str) -> ColorTable:
    """第 0 回合：原子型別"""
    partial = scheme == SCHEME_PARTIAL
    rows = []
    for G in graphs:
        digits = AssignmentIndexer(G.n, k1 + k2, total=not partial).digits()
        rows.append(atomic_type_rows(G, digits))
    sizes = tuple(G.n for G in graphs)
    return ColorTable(sizes, k1, k2, scheme, normalize_rows(np.concatenate(rows, axis=0)))


def _iterate(
    initial: ColorTable,
    step: Callable[[ColorTable], ColorTable],
    budget: Optional[int],
    keep_history: bool,
    label: str,
) -> RefinementResult:
    current = initial
    counts = [current.num_classes]
    per_graph = [tuple(current.block_classes(g) for g in range(len(current.sizes)))]
    history = [current] if keep_history else None
    done = 0
    stable = False

    while budget is None or done < budget:
        nxt = step(current)
        if same_partition(current.colors, nxt.colors):
            stable = True
            break
        current = nxt
        done += 1
        counts.append(current.num_classes)
        per_graph.append(tuple(current.block_classes(g) for g in range(len(current.sizes))))
        if history is not None:
            history.append(current)
        logger.debug(f"{label}: round {done}, classes={counts[-1]}")

    return RefinementResult(
        table=current,
        rounds=done,
        stable=stable,
        class_counts=counts,
        graph_class_counts=per_graph,
        history=history,
    )


# ==================== 單步運算子 ====================

def owl_ref_step(table: ColorTable, which: str = "all") -> ColorTable:
    """
    一步 oblivious refinement

    Args:
        table: 目前的著色
        which: "x" = owl-ref_(k1,0)，"y" = owl-ref_(0,k2)，"all" = owl-ref_(k1,k2)

    Returns:
        新的 ColorTable
    """
    if which not in ("x", "y", "all"):
        raise ConfigurationError(f"unknown refinement positions {which!r}")
    x_positions = list(range(table.k1)) if which in ("x", "all") else []
    y_positions = list(range(table.k1, table.k)) if which in ("y", "all") else []
    positions = x_positions + y_positions
    nonreusable = y_positions if table.partial else []
    blocks = [table.block(g) for g in range(len(table.sizes))]
    rows = signature_rows(blocks, table.sizes, table.k, positions, nonreusable, table.partial)
    return table.with_colors(normalize_rows(rows))


def _wl_step(graphs: Sequence[ColoredGraph], k: int) -> Callable[[ColorTable], ColorTable]:
    """古典 k-WL 一步：k = 1 用鄰居 multiset，k ≥ 2 用 tuple multiset"""

    def step_one(table: ColorTable) -> ColorTable:
        width = max((G.degree(v) for G in graphs for v in range(G.n)), default=0)
        rows = []
        for g, G in enumerate(graphs):
            block = table.block(g)
            for v in range(G.n):
                nbr = sorted(int(block[w]) for w in G.neighbor_sets[v])
                rows.append([int(block[v])] + nbr + [PAD] * (width - len(nbr)))
        return table.with_colors(normalize_rows(np.array(rows, dtype=np.int64).reshape(len(rows), width + 1)))

    def step_tuples(table: ColorTable) -> ColorTable:
        tuple_rows = []
        for g, G in enumerate(graphs):
            tensor = table.tensor(g)
            n = G.n
            per_position = []
            for i in range(k):
                moved = np.expand_dims(np.moveaxis(tensor, i, -1), i)
                per_position.append(np.broadcast_to(moved, tensor.shape + (n,)).reshape(-1))
            tuple_rows.append(np.stack(per_position, axis=1))
        ids = normalize_rows(np.concatenate(tuple_rows, axis=0))

        width = max(G.n for G in graphs)
        parts = []
        start = 0
        for g, G in enumerate(graphs):
            count = G.n ** k
            codes = ids[start:start + count * G.n].reshape(count, G.n)
            start += count * G.n
            field = _pad(np.sort(codes, axis=1), width)
            parts.append(np.concatenate([table.block(g).reshape(-1, 1), field], axis=1))
        return table.with_colors(normalize_rows(np.concatenate(parts, axis=0)))

    return step_one if k == 1 else step_tuples


# ==================== 公開運算 ====================

def owl_restricted_many(
    graphs: Sequence[ColoredGraph],
    k1: int,
    k2: int,
    r: Optional[int] = None,
    keep_history: bool = False,
) -> RefinementResult:
    """多圖聯合 (k1,k2)-OWL；各圖 domain 為 (n+1)^(k1+k2) 個 assignment"""
    if k1 < 0 or k2 < 0 or k1 + k2 < 1:
        raise ConfigurationError("(k1,k2)-OWL needs k1 + k2 >= 1")
    _check_domain([G.n for G in graphs], k1 + k2, partial=True)
    initial = _initial_table(graphs, k1, k2, SCHEME_PARTIAL)
    return _iterate(
        initial,
        lambda t: owl_ref_step(t, "all"),
        r,
        keep_history,
        f"owl_restricted({k1},{k2})",
    )


def owl_restricted(
    G: ColoredGraph,
    H: Optional[ColoredGraph] = None,
    k1: int = 1,
    k2: int = 0,
    r: Optional[int] = None,
    keep_history: bool = False,
) -> RefinementResult:
    """(k1,k2)-OWL；給定 H 時在兩個 domain 的聯集上聯合執行"""
    graphs = [G] if H is None else [G, H]
    return owl_restricted_many(graphs, k1, k2, r, keep_history)


def owl_classic(
    G: ColoredGraph,
    k: int,
    r: Optional[int] = None,
    H: Optional[ColoredGraph] = None,
    keep_history: bool = False,
) -> RefinementResult:
    """古典 k-OWL：k-tuple（不含 ⊥），每個位置各一個 multiset"""
    if k < 1:
        raise ConfigurationError("k-OWL needs k >= 1")
    graphs = [G] if H is None else [G, H]
    _check_domain([g.n for g in graphs], k, partial=False)
    initial = _initial_table(graphs, k, 0, SCHEME_TOTAL)
    return _iterate(initial, lambda t: owl_ref_step(t, "all"), r, keep_history, f"owl_classic({k})")


def wl_classic(
    G: ColoredGraph,
    k: int,
    r: Optional[int] = None,
    H: Optional[ColoredGraph] = None,
    keep_history: bool = False,
) -> RefinementResult:
    """古典 k-WL"""
    if k < 1:
        raise ConfigurationError("k-WL needs k >= 1")
    graphs = [G] if H is None else [G, H]
    _check_domain([g.n for g in graphs], k, partial=False)
    initial = _initial_table(graphs, k, 0, SCHEME_TOTAL)
    return _iterate(initial, _wl_step(graphs, k), r, keep_history, f"wl_classic({k})")


def wl_distinguishes(G: ColoredGraph, H: ColoredGraph, k: int) -> bool:
    return wl_classic(G, k, H=H).distinguishes_histogram()


def owl_distinguishes(G: ColoredGraph, H: ColoredGraph, k: int) -> bool:
    return owl_classic(G, k, H=H).distinguishes_histogram()


def check_configuration(alpha: PartialAssignment, beta: PartialAssignment, k1: int, k2: int) -> None:
    """(α, β) 必須是 (k1,k2)-configuration：參數一致且 domain 相同"""
    for name, a in (("alpha", alpha), ("beta", beta)):
        if (a.k1, a.k2) != (k1, k2):
            raise ConfigurationError(f"{name} is over ({a.k1},{a.k2}) variables, expected ({k1},{k2})")
    if alpha.domain != beta.domain:
        raise ConfigurationError("configuration domains differ: dom(alpha) != dom(beta)")


def equivalent_naive(
    G: ColoredGraph,
    alpha: PartialAssignment,
    H: ColoredGraph,
    beta: PartialAssignment,
    k1: int,
    k2: int,
    r: Optional[int] = None,
) -> bool:
    """聯合 refinement 第 r 回合（None = 穩定）時 α 與 β 顏色相同"""
    check_configuration(alpha, beta, k1, k2)
    alpha.validate_for(G)
    beta.validate_for(H)
    result = owl_restricted(G, H, k1, k2, r)
    return result.table.color_of(0, alpha.entries) == result.table.color_of(1, beta.entries)
