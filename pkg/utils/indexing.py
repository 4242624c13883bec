# utils/indexing.py
"""
Assignment 編碼工具
(n+1) 進位混合基數：每個位置一個符號，⊥ = 符號 n；位置 0 為最高位，
與 numpy C-order reshape 成 (n+1,)*k 張量時的軸順序一致。
total=True 時不含 ⊥，基數為 n（古典 k-tuple）。
"""
from typing import Optional, Sequence, Tuple

import numpy as np


class AssignmentIndexer:
    """k 個位置的 assignment <-> 整數索引"""

    def __init__(self, n: int, k: int, total: bool = False):
        self.n = n
        self.k = k
        self.total = total
        self.radix = n if total else n + 1
        self.size = self.radix ** k
        self.bottom = None if total else n

    def encode(self, entries: Sequence[Optional[int]]) -> int:
        index = 0
        for value in entries:
            if value is None:
                if self.total:
                    raise ValueError("total assignment cannot contain ⊥")
                value = self.n
            index = index * self.radix + value
        return index

    def decode(self, index: int) -> Tuple[Optional[int], ...]:
        digits = []
        for _ in range(self.k):
            index, digit = divmod(index, self.radix)
            digits.append(None if digit == self.bottom else digit)
        return tuple(reversed(digits))

    def digits(self) -> np.ndarray:
        """所有 assignment 的符號矩陣，shape (size, k)，⊥ 以 n 表示"""
        if self.k == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grid = np.indices((self.radix,) * self.k, dtype=np.int64)
        return grid.reshape(self.k, -1).T.copy()

    def shape(self) -> Tuple[int, ...]:
        return (self.radix,) * self.k
