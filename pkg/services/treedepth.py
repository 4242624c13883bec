# services/treedepth.py
"""
Tree-depth 服務
職責：精確 tree-depth（含可重播的 elimination 證書）、G≀v shrinking、
      小圖枚舉與 identification 檢查

特性:
- tree_depth 以 bitmask 對頂點子集做 memo；平手時取索引最小的頂點
- graphs_up_to 使用 networkx graph atlas（≤ 7 頂點的所有非同構圖）
- identifies_within 只比較同階的圖（不同階的圖以 ∃^{≥n+1} x (x=x) 即可區分）
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Tuple

import networkx as nx
import numpy as np

from config.constants import BUDGET
from services.errors import ConfigurationError, GraphError, check_budget
from services.graphs import ColoredGraph, from_networkx, iso_oracle, make_graph
from services.logger import logger
from services.wl import owl_restricted_many


@dataclass
class TdCertificate:
    """
    tree-depth 證書

    root 為 None 表示不連通（或空）的頂點集合，children 為各連通元件；
    否則 root 為被刪除的頂點，children 為刪除後的各元件
    """
    value: int
    vertices: FrozenSet[int]
    root: Optional[int] = None
    children: List["TdCertificate"] = field(default_factory=list)

    def to_str(self, depth: int = 0) -> str:
        label = "forest" if self.root is None else f"v{self.root}"
        s = depth * "  " + f"{label} (td={self.value})"
        for child in self.children:
            s += "\n" + child.to_str(depth + 1)
        return s

    def __str__(self):
        return self.to_str()

    def to_dict(self) -> Dict:
        return {
            "value": self.value,
            "vertices": sorted(self.vertices),
            "root": self.root,
            "children": [child.to_dict() for child in self.children],
        }


# ==================== bitmask 工具 ====================

def _neighbor_masks(G: ColoredGraph) -> List[int]:
    masks = [0] * G.n
    for u, v in G.edges:
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return masks


def _bits(mask: int) -> List[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def _components(mask: int, nbr: List[int]) -> List[int]:
    """mask 內的連通元件，依最小頂點排序"""
    parts = []
    remaining = mask
    while remaining:
        low = remaining & -remaining
        component = low
        frontier = low
        while frontier:
            bit = frontier & -frontier
            frontier ^= bit
            fresh = nbr[bit.bit_length() - 1] & mask & ~component
            component |= fresh
            frontier |= fresh
        parts.append(component)
        remaining &= ~component
    return parts


# ==================== tree-depth ====================

def tree_depth(G: ColoredGraph) -> TdCertificate:
    """
    精確 tree-depth

    td = 1（單點）；max over 元件（不連通）；1 + min_v td(G − v)（連通）

    Raises:
        BudgetExceededError: 頂點數超過 BUDGET.TD_VERTICES
    """
    check_budget("td-vertices", BUDGET.TD_VERTICES, G.n)
    nbr = _neighbor_masks(G)
    memo: Dict[int, TdCertificate] = {}

    def solve(mask: int) -> TdCertificate:
        parts = _components(mask, nbr)
        if len(parts) != 1:
            children = [solve(part) for part in parts]
            return TdCertificate(
                value=max((c.value for c in children), default=0),
                vertices=frozenset(_bits(mask)),
                children=children,
            )
        if mask in memo:
            return memo[mask]

        best_v, best_rest = None, None
        for v in _bits(mask):
            rest = solve(mask & ~(1 << v))
            if best_rest is None or rest.value < best_rest.value:
                best_v, best_rest = v, rest
        children = best_rest.children if best_rest.root is None else [best_rest]
        cert = TdCertificate(1 + best_rest.value, frozenset(_bits(mask)), best_v, children)
        memo[mask] = cert
        return cert

    return solve((1 << G.n) - 1)


def replay(cert: TdCertificate, G: ColoredGraph) -> bool:
    """依遞迴定義檢查證書：元件切分正確，且數值由子證書重新算出"""
    nbr = _neighbor_masks(G)

    def mask_of(vertices) -> int:
        return sum(1 << v for v in vertices)

    def check(node: TdCertificate) -> bool:
        mask = mask_of(node.vertices)
        if node.root is None:
            expected = sorted(_components(mask, nbr))
        else:
            if node.root not in node.vertices or len(_components(mask, nbr)) != 1:
                return False
            expected = sorted(_components(mask & ~(1 << node.root), nbr))
        if sorted(mask_of(c.vertices) for c in node.children) != expected:
            return False
        below = max((c.value for c in node.children), default=0)
        value = below if node.root is None else 1 + below
        return value == node.value and all(check(c) for c in node.children)

    if any(not 0 <= v < G.n for v in cert.vertices) or mask_of(cert.vertices) != (1 << G.n) - 1:
        return False
    return check(cert)


# ==================== G≀v ====================

def shrink(G: ColoredGraph, v: int) -> ColoredGraph:
    """
    G≀v：刪除 v，其餘頂點的顏色改為 (舊顏色, 是否與 v 相鄰) 的編碼 2·c + bit

    編碼與 (c, bit) 的字典序一致，且不依賴圖本身，跨圖比較時顏色仍一致
    """
    if not 0 <= v < G.n:
        raise GraphError(f"vertex {v} out of range")
    keep = [w for w in range(G.n) if w != v]
    index = {w: i for i, w in enumerate(keep)}
    colors = [2 * G.colors[w] + (1 if G.has_edge(v, w) else 0) for w in keep]
    edges = [(index[a], index[b]) for a, b in G.edges if v not in (a, b)]
    return make_graph(len(keep), edges, colors)


# ==================== 枚舉與 identification ====================

def _adjacency_bits(g: nx.Graph) -> Tuple[int, ...]:
    nodes = sorted(g.nodes())
    matrix = nx.to_numpy_array(g, nodelist=nodes, dtype=int) if nodes else np.zeros((0, 0), dtype=int)
    return tuple(int(b) for b in matrix.reshape(-1))


def graphs_up_to(n_max: int, td_max: Optional[int] = None) -> List[ColoredGraph]:
    """
    ≤ n_max 頂點（1..7）的所有非同構單色圖，可依 tree-depth 過濾

    順序：(頂點數, 邊數, 鄰接矩陣字典序)
    """
    if not 1 <= n_max <= 7:
        raise ConfigurationError("graph atlas covers 1..7 vertices")
    atlas = [g for g in nx.graph_atlas_g() if 1 <= g.number_of_nodes() <= n_max]
    atlas.sort(key=lambda g: (g.number_of_nodes(), g.number_of_edges(), _adjacency_bits(g)))
    out = []
    for g in atlas:
        G = from_networkx(g, [0] * g.number_of_nodes())
        if td_max is None or tree_depth(G).value <= td_max:
            out.append(G)
    logger.debug(f"graphs_up_to({n_max}, td<={td_max}): {len(out)} graphs")
    return out


@dataclass
class IdentificationReport:
    """identification 結果：conflict = 等價但不同構"""
    k1: int
    k2: int
    candidates: int
    pairs_checked: int = 0
    iso_checks: int = 0
    conflicts: List[Tuple[int, int]] = field(default_factory=list)
    graphs: List[ColoredGraph] = field(default_factory=list)

    @property
    def identified(self) -> bool:
        return not self.conflicts

    def to_dict(self) -> Dict:
        return {
            "k1": self.k1,
            "k2": self.k2,
            "candidates": self.candidates,
            "pairs_checked": self.pairs_checked,
            "iso_checks": self.iso_checks,
            "conflicts": [
                {"i": i, "j": j, "G": self.graphs[i].to_dict(), "H": self.graphs[j].to_dict()}
                for i, j in self.conflicts
            ],
        }


def identifies_within(k1: int, k2: int, candidates: List[ColoredGraph]) -> IdentificationReport:
    """
    檢查 C^(k1,k2) 是否區分候選集中每一對不同構的圖

    同階的候選圖一起做聯合 (k1,k2)-OWL；空 assignment 顏色相同的配對交給 iso_oracle，
    不同構者記為 conflict
    """
    logger.info(f"=== identification ({k1},{k2}) over {len(candidates)} candidates ===")
    report = IdentificationReport(k1, k2, len(candidates), graphs=list(candidates))

    by_order: Dict[int, List[int]] = {}
    for i, G in enumerate(candidates):
        by_order.setdefault(G.n, []).append(i)

    for n, members in sorted(by_order.items()):
        report.pairs_checked += len(members) * (len(members) - 1) // 2
        if len(members) < 2:
            continue
        result = owl_restricted_many([candidates[i] for i in members], k1, k2)
        empty = (None,) * (k1 + k2)
        classes: Dict[int, List[int]] = {}
        for g, i in enumerate(members):
            classes.setdefault(result.table.color_of(g, empty), []).append(i)
        for group in classes.values():
            for i, j in combinations(group, 2):
                report.iso_checks += 1
                if iso_oracle(candidates[i], candidates[j]) is None:
                    report.conflicts.append((i, j))
        logger.debug(f"order {n}: {len(members)} graphs, {len(classes)} classes, rounds={result.rounds}")

    status = "✅ identified" if report.identified else f"❌ {len(report.conflicts)} conflicts"
    logger.info(f"identification ({k1},{k2}): {status}")
    return report
