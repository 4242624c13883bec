# conftest.py
"""共用 fixtures"""
import random

import pytest

from services.cfi import BaseGraph
from services.graphs import disjoint_union, gen_family, make_graph


@pytest.fixture
def triangle():
    return make_graph(3, [(0, 1), (1, 2), (2, 0)], [0, 0, 0])


@pytest.fixture
def c6():
    return gen_family("cycle", 6)


@pytest.fixture
def two_triangles():
    K3 = gen_family("complete", 3)
    return disjoint_union(K3, K3)


@pytest.fixture
def star3():
    return gen_family("star", 3)


@pytest.fixture
def p4():
    return gen_family("path", 4)


@pytest.fixture
def k3_base():
    return BaseGraph(gen_family("complete", 3, base_coloring=True))


@pytest.fixture
def b2_base():
    return BaseGraph(gen_family("perfect_binary_tree", 2, base_coloring=True))


@pytest.fixture
def rng():
    return random.Random(0)
