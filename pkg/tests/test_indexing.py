import numpy as np
import pytest

from utils.indexing import AssignmentIndexer


def test_partial_indexer_uses_bottom_as_highest_symbol():
    ix = AssignmentIndexer(3, 2)
    assert ix.radix == 4
    assert ix.size == 16
    assert ix.encode((None, 0)) == 12
    assert ix.decode(12) == (None, 0)
    assert ix.decode(ix.encode((2, None))) == (2, None)


def test_digits_follow_c_order():
    ix = AssignmentIndexer(2, 2)
    digits = ix.digits()
    assert digits.shape == (9, 2)
    for index in range(ix.size):
        expected = [2 if v is None else v for v in ix.decode(index)]
        assert digits[index].tolist() == expected


def test_total_indexer_rejects_bottom():
    ix = AssignmentIndexer(3, 2, total=True)
    assert ix.size == 9
    with pytest.raises(ValueError):
        ix.encode((None, 0))


def test_zero_positions():
    ix = AssignmentIndexer(4, 0)
    assert ix.size == 1
    assert ix.digits().shape == (1, 0)
    assert ix.encode(()) == 0
    assert np.array_equal(ix.shape(), ())
