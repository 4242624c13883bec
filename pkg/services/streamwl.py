# services/streamwl.py
"""
空間節約的 C^(k1,k2) 等價性判定
職責：refinement 運算子、串流式 multiset 字典序比較、每個 (η_G, η_H) 的
      function table，以及巢狀 (owl-ref_(k1,0)^∞ ∘ owl-ref_(0,k2))^(k2) 判定流程

特性:
- 每一層只持有固定 y 部分的 function table（2(n+1)^k1 格），
  較深一層由 oracle 遞迴重新計算
- faithful 模式不做跨 η-pair 快取；fast 模式快取 function table，以空間換時間
- MemoryMeter 記錄 cells 峰值（含快取 / 只含工作表）、遞迴深度、oracle 呼叫次數
"""
from dataclasses import dataclass
from functools import cmp_to_key
from typing import Callable, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from config.constants import ENGINE
from services.errors import ConfigurationError
from services.graphs import ColoredGraph, PartialAssignment, atomic_type_rows
from services.logger import logger
from services.wl import check_configuration, normalize_rows, same_partition, signature_rows
from utils.indexing import AssignmentIndexer

MODES = ("faithful", "fast")


class SideAssignment(NamedTuple):
    """某一側圖上的完整 (k1+k2) assignment"""
    side: int
    entries: Tuple[Optional[int], ...]


class EtaPair(NamedTuple):
    """固定的 y 部分配對 (η_G, η_H)；兩側可以是同一張圖"""
    left: int
    left_eta: Tuple[Optional[int], ...]
    right: int
    right_eta: Tuple[Optional[int], ...]

    @property
    def unassigned(self) -> Tuple[int, ...]:
        """J：兩側共同的未賦值 y 索引（相對於 y 部分）"""
        return tuple(j for j, v in enumerate(self.left_eta) if v is None)


ColorOrderOracle = Callable[[SideAssignment, SideAssignment], int]


@dataclass
class MemoryMeter:
    """
    抽象 cell 計數，與機器位元組無關

    live_cells 是遞迴堆疊上的工作表，cached_cells 是 fast 模式的快取。
    peak_cells 是兩者合計的峰值；working_peak_cells 只計工作表。
    faithful 模式沒有快取，兩個峰值相同。
    """
    live_cells: int = 0
    peak_cells: int = 0
    working_peak_cells: int = 0
    depth: int = 0
    peak_depth: int = 0
    oracle_calls: int = 0
    tables_built: int = 0
    cached_cells: int = 0

    def _update_peaks(self) -> None:
        self.working_peak_cells = max(self.working_peak_cells, self.live_cells)
        self.peak_cells = max(self.peak_cells, self.live_cells + self.cached_cells)

    def allocate(self, cells: int) -> None:
        self.live_cells += cells
        self._update_peaks()

    def release(self, cells: int) -> None:
        self.live_cells -= cells

    def cache(self, cells: int) -> None:
        self.cached_cells += cells
        self._update_peaks()

    def enter(self) -> None:
        self.depth += 1
        self.peak_depth = max(self.peak_depth, self.depth)

    def leave(self) -> None:
        self.depth -= 1

    def to_dict(self) -> Dict[str, int]:
        return {
            "peak_cells": self.peak_cells,
            "working_peak_cells": self.working_peak_cells,
            "peak_depth": self.peak_depth,
            "oracle_calls": self.oracle_calls,
            "tables_built": self.tables_built,
            "cached_cells": self.cached_cells,
        }


@dataclass(eq=False)
class FunctionTable:
    """η-pair domain 上的 normalization：左側 x-assignment 在前，右側在後"""
    pair: EtaPair
    colors: np.ndarray
    left_size: int

    @property
    def size(self) -> int:
        return int(self.colors.shape[0])

    def color(self, block: int, x_index: int) -> int:
        return int(self.colors[x_index if block == 0 else self.left_size + x_index])


def _cmp(a: int, b: int) -> int:
    """numpy 純量比較結果是 np.bool_，不能相減，先轉成 int"""
    return int(a > b) - int(a < b)


class ExtensionStream:
    """α[p/w]（w ∈ V）的可重播串流，只保存 α 與位置"""

    __slots__ = ("base", "position", "n")

    def __init__(self, base: SideAssignment, position: int, n: int):
        self.base = base
        self.position = position
        self.n = n

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[SideAssignment]:
        entries = list(self.base.entries)
        for w in range(self.n):
            entries[self.position] = w
            yield SideAssignment(self.base.side, tuple(entries))


# ==================== multiset 比較 ====================

def _next_above(stream, floor, compare) -> Optional[object]:
    best = None
    for element in stream:
        if floor is not None and compare(element, floor) <= 0:
            continue
        if best is None or compare(element, best) < 0:
            best = element
    return best


def _count_equal(stream, value, compare) -> int:
    return sum(1 for element in stream if compare(element, value) == 0)


def multiset_lex_compare(n: int, compare: Callable, left, right) -> int:
    """
    排序後 multiset 的字典序比較，只保留 O(1) 個元素

    依序找出兩邊第 i 小的相異值與重數：值不同即分出大小；重數不同時，
    重數較少的一方在該位置換成下一個值（較大）或已結束（為前綴，較小）。

    Args:
        n: 串流長度上限（相異值最多 n 個）
        compare: 元素比較，回傳 -1 / 0 / 1
        left, right: 可重播的元素串流

    Returns:
        -1 / 0 / 1
    """
    floor_left = floor_right = None
    for _ in range(n + 1):
        m_left = _next_above(left, floor_left, compare)
        m_right = _next_above(right, floor_right, compare)
        if m_left is None or m_right is None:
            if m_left is None and m_right is None:
                return 0
            return -1 if m_left is None else 1

        c = compare(m_left, m_right)
        if c != 0:
            return c

        count_left = _count_equal(left, m_left, compare)
        count_right = _count_equal(right, m_right, compare)
        if count_left < count_right:
            return 1 if _next_above(left, m_left, compare) is not None else -1
        if count_left > count_right:
            return -1 if _next_above(right, m_right, compare) is not None else 1

        floor_left, floor_right = m_left, m_right
    raise ValueError(f"stream has more than {n} distinct elements")


# ==================== 判定流程 ====================

class StreamEquivalence:
    """一次判定的狀態：圖、參數、模式、meter 與（fast 模式的）快取"""

    def __init__(
        self,
        graphs: Sequence[ColoredGraph],
        k1: int,
        k2: int,
        mode: Optional[str] = None,
        meter: Optional[MemoryMeter] = None,
    ):
        mode = mode or ENGINE.STREAM_MODE
        if mode not in MODES:
            raise ConfigurationError(f"unknown stream mode {mode!r}; choose from {', '.join(MODES)}")
        if k1 < 0 or k2 < 0 or k1 + k2 < 1:
            raise ConfigurationError("stream engine needs k1 + k2 >= 1")
        self.graphs = tuple(graphs)
        self.k1 = k1
        self.k2 = k2
        self.mode = mode
        self.meter = meter or MemoryMeter()
        self._cache: Dict[Tuple[int, EtaPair], np.ndarray] = {}
        self._indexers = [AssignmentIndexer(G.n, k1) for G in self.graphs]
        self._digits = [ix.digits() for ix in self._indexers]

    # --- domain ---
    def block_size(self, side: int) -> int:
        return self._indexers[side].size

    def side_assignment(self, pair: EtaPair, index: int) -> SideAssignment:
        left_size = self.block_size(pair.left)
        if index < left_size:
            side, eta, x_index = pair.left, pair.left_eta, index
        else:
            side, eta, x_index = pair.right, pair.right_eta, index - left_size
        return SideAssignment(side, self._indexers[side].decode(x_index) + tuple(eta))

    def domain(self, pair: EtaPair) -> List[SideAssignment]:
        total = self.block_size(pair.left) + self.block_size(pair.right)
        return [self.side_assignment(pair, i) for i in range(total)]

    def materialize(self, pair: EtaPair, color: Callable[[SideAssignment], int]) -> FunctionTable:
        """由任意著色建出 η-pair 的 function table（依 color 的順序 normalize）"""
        raw = np.array([[color(a)] for a in self.domain(pair)], dtype=np.int64)
        return self._allocate(pair, normalize_rows(raw))

    def _allocate(self, pair: EtaPair, colors: np.ndarray) -> FunctionTable:
        self.meter.allocate(int(colors.shape[0]))
        return FunctionTable(pair, colors, self.block_size(pair.left))

    def release(self, table: FunctionTable) -> None:
        self.meter.release(table.size)

    # --- 各層 ---
    def atomic_table(self, pair: EtaPair) -> FunctionTable:
        """第 0 層輸入：原子型別，跨兩側以標準編碼排序"""
        rows = []
        for side, eta in ((pair.left, pair.left_eta), (pair.right, pair.right_eta)):
            G = self.graphs[side]
            digits = self._digits[side]
            eta_row = np.array([G.n if v is None else v for v in eta], dtype=np.int64)
            eta_cols = np.broadcast_to(eta_row, (digits.shape[0], len(eta)))
            rows.append(atomic_type_rows(G, np.concatenate([digits, eta_cols], axis=1)))
        return self._allocate(pair, normalize_rows(np.concatenate(rows, axis=0)))

    def table(self, level: int, pair: EtaPair) -> FunctionTable:
        """
        χ_level 在 η-pair domain 上的 function table

        level 0：owl-ref_(k1,0)^∞(atp)；level r：owl-ref_(k1,0)^∞(owl-ref_(0,k2)(χ_{r-1}))，
        後者的 oracle 遞迴呼叫 level r-1。呼叫端負責 release；
        中途丟出例外時，已配置的表由各運算子釋放，live_cells 不會殘留。
        """
        key = (level, pair)
        if self.mode == "fast" and key in self._cache:
            return self._allocate(pair, self._cache[key].copy())

        self.meter.enter()
        try:
            if level == 0:
                chi = self.atomic_table(pair)
            else:
                previous = self.table(level - 1, pair)
                chi = ref_nonreusable(self, pair, previous, self.oracle(level - 1))
            result = ref_reusable_fixpoint(self, pair, chi)
        finally:
            self.meter.leave()

        self.meter.tables_built += 1
        if self.mode == "fast":
            self._cache[key] = result.colors.copy()
            self.meter.cache(result.size)
        return result

    def oracle(self, level: int) -> ColorOrderOracle:
        """level 上 χ 顏色順序的 oracle；每次呼叫都建出（或從快取取出）比較用的表"""

        def compare(a: SideAssignment, b: SideAssignment) -> int:
            self.meter.oracle_calls += 1
            if a == b:
                return 0
            k1 = self.k1
            pair = EtaPair(a.side, a.entries[k1:], b.side, b.entries[k1:])
            table = self.table(level, pair)
            try:
                return _cmp(
                    table.color(0, self._indexers[a.side].encode(a.entries[:k1])),
                    table.color(1, self._indexers[b.side].encode(b.entries[:k1])),
                )
            finally:
                self.release(table)

        return compare

    def compare(self, left: SideAssignment, right: SideAssignment) -> int:
        """最終著色（owl^∞）下兩個 assignment 的順序；y domain 必須相同"""
        left_eta, right_eta = left.entries[self.k1:], right.entries[self.k1:]
        if [v is None for v in left_eta] != [v is None for v in right_eta]:
            raise ConfigurationError("assignments must assign the same y-variables")
        level = sum(1 for v in left_eta if v is None)
        return self.oracle(level)(left, right)


# ==================== refinement 運算子 ====================

def ref_nonreusable(
    ctx: StreamEquivalence,
    pair: EtaPair,
    chi: FunctionTable,
    oracle: ColorOrderOracle,
) -> FunctionTable:
    """
    owl-ref_(0,k2)(χ) 的 function table

    排序鍵：(χ(α); 對每個 j ∈ J 的 {{χ(α[y_j/w]) : w ∈ V}})，
    multiset 以 multiset_lex_compare 對 oracle 比較。
    除了輸入表之外只多用一個排序暫存；名次直接寫回輸入表。

    Args:
        ctx: 判定狀態
        pair: η-pair
        chi: χ 在 pair 上的表（所有權轉移給本函數）
        oracle: 延伸一個 y 值之後的 χ 順序

    Returns:
        新的 FunctionTable
    """
    J = [ctx.k1 + j for j in pair.unassigned]
    if not J:
        return chi

    colors = chi.colors
    sizes = {side: ctx.graphs[side].n for side in (pair.left, pair.right)}
    width = max(sizes.values())

    def key_cmp(i: int, j: int) -> int:
        c = _cmp(colors[i], colors[j])
        if c != 0:
            return c
        a, b = ctx.side_assignment(pair, i), ctx.side_assignment(pair, j)
        for p in J:
            c = multiset_lex_compare(
                width,
                oracle,
                ExtensionStream(a, p, sizes[a.side]),
                ExtensionStream(b, p, sizes[b.side]),
            )
            if c != 0:
                return c
        return 0

    ctx.meter.allocate(chi.size)  # 排序暫存
    try:
        order = sorted(range(chi.size), key=cmp_to_key(key_cmp))

        # 名次落後一步寫回：order[t-1] 與 order[t] 比完之後 order[t-1] 的舊值不再需要
        rank = 0
        pending = None
        for t in range(1, len(order)):
            if key_cmp(order[t - 1], order[t]) != 0:
                pending, rank = rank, rank + 1
            else:
                pending = rank
            colors[order[t - 1]] = pending
        if order:
            colors[order[-1]] = rank
    except Exception:
        ctx.release(chi)
        raise
    finally:
        ctx.meter.release(chi.size)
    return chi


def ref_reusable_fixpoint(ctx: StreamEquivalence, pair: EtaPair, chi: FunctionTable) -> FunctionTable:
    """重複 owl-ref_(k1,0) 直到連續兩張表分割相同；同時最多兩張表存活（chi 所有權轉移）"""
    sizes = (ctx.graphs[pair.left].n, ctx.graphs[pair.right].n)
    positions = list(range(ctx.k1))
    current = chi
    try:
        while True:
            blocks = [current.colors[:current.left_size], current.colors[current.left_size:]]
            rows = signature_rows(blocks, sizes, ctx.k1, positions, (), partial=True)
            nxt = ctx._allocate(pair, normalize_rows(rows))
            if same_partition(current.colors, nxt.colors):
                ctx.release(nxt)
                return current
            ctx.release(current)
            current = nxt
    except Exception:
        ctx.release(current)
        raise


def stream_equivalent(
    G: ColoredGraph,
    alpha: PartialAssignment,
    H: ColoredGraph,
    beta: PartialAssignment,
    k1: int,
    k2: int,
    mode: Optional[str] = None,
) -> Tuple[bool, MemoryMeter]:
    """
    以巢狀 function table 判定 G, α ≡ H, β（C^(k1,k2)）

    Returns:
        (是否等價, MemoryMeter)
    """
    if k1 + k2 < 1:
        raise ConfigurationError("stream engine needs k1 + k2 >= 1")
    check_configuration(alpha, beta, k1, k2)
    alpha.validate_for(G)
    beta.validate_for(H)

    ctx = StreamEquivalence((G, H), k1, k2, mode)
    ordering = ctx.compare(SideAssignment(0, alpha.entries), SideAssignment(1, beta.entries))
    logger.debug(
        f"stream_equivalent({k1},{k2}) mode={ctx.mode}: peak_cells={ctx.meter.peak_cells}, "
        f"oracle_calls={ctx.meter.oracle_calls}"
    )
    return ordering == 0, ctx.meter
