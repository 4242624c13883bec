import numpy as np
import pytest

from services.matching import has_perfect_matching, maximum_matching


def test_identity_relation():
    relation = np.eye(4, dtype=bool)
    assert maximum_matching(relation) == {0: 0, 1: 1, 2: 2, 3: 3}
    assert has_perfect_matching(relation)


def test_augmenting_path_needed():
    # 貪婪地把 0 配給 0 會卡住 1
    relation = np.array([
        [1, 1, 0],
        [1, 0, 0],
        [0, 1, 1],
    ], dtype=bool)
    matching = maximum_matching(relation)
    assert len(matching) == 3
    assert all(relation[i, j] for i, j in matching.items())
    assert has_perfect_matching(relation)


@pytest.mark.parametrize("relation, expected", [
    (np.zeros((0, 0), dtype=bool), True),
    (np.ones((3, 3), dtype=bool), True),
    (np.ones((2, 3), dtype=bool), False),
    (np.array([[1, 1], [0, 0]], dtype=bool), False),
    (np.array([[1, 0], [1, 0]], dtype=bool), False),
    (np.array([[1, 1, 0], [1, 1, 0], [1, 1, 0]], dtype=bool), False),
])
def test_has_perfect_matching(relation, expected):
    assert has_perfect_matching(relation) is expected


def test_hall_violation_without_empty_rows():
    # 三列只連到兩行，但每行都有人
    relation = np.array([
        [1, 1, 0, 0],
        [1, 1, 0, 0],
        [1, 1, 0, 0],
        [0, 0, 1, 1],
    ], dtype=bool)
    assert not has_perfect_matching(relation)
    assert len(maximum_matching(relation)) == 3
