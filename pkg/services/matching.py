# services/matching.py
"""
二分圖完美匹配
職責：在 0/1 關係矩陣上判定完美匹配是否存在（bijective pebble game 中 Duplicator 的雙射步驟）
"""
from typing import Dict

import networkx as nx
import numpy as np


def maximum_matching(relation: np.ndarray) -> Dict[int, int]:
    """
    augmenting-path 最大匹配（Hopcroft-Karp）

    Args:
        relation: shape (rows, cols) 的布林矩陣，relation[i, j] 表示 i 可配 j

    Returns:
        {row: col}
    """
    rows, cols = relation.shape
    left = [("L", i) for i in range(rows)]
    g = nx.Graph()
    g.add_nodes_from(left)
    g.add_nodes_from(("R", j) for j in range(cols))
    g.add_edges_from((("L", int(i)), ("R", int(j))) for i, j in zip(*np.nonzero(relation)))
    matching = nx.bipartite.hopcroft_karp_matching(g, top_nodes=left)
    return {node[1]: partner[1] for node, partner in matching.items() if node[0] == "L"}


def has_perfect_matching(relation: np.ndarray) -> bool:
    rows, cols = relation.shape
    if rows != cols:
        return False
    if rows == 0:
        return True
    # 有全空的列或行就不可能
    if not relation.any(axis=1).all() or not relation.any(axis=0).all():
        return False
    if relation.all():
        return True
    return len(maximum_matching(relation)) == rows
