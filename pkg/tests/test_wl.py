import random

import numpy as np
import pytest

from config.constants import BUDGET
from services.cfi import cfi_pair
from services.errors import BudgetExceededError, ConfigurationError
from services.graphs import PartialAssignment, gen_family, make_graph, permuted, random_graph, random_permutation
from services.wl import (
    equivalent_naive,
    normalize_rows,
    owl_classic,
    owl_distinguishes,
    owl_ref_step,
    owl_restricted,
    owl_restricted_many,
    same_partition,
    wl_classic,
    wl_distinguishes,
)


# ==================== 工具 ====================

def test_normalize_rows_is_order_preserving():
    rows = np.array([[3, 1], [0, 5], [3, 1], [3, 0]])
    assert normalize_rows(rows).tolist() == [2, 0, 2, 1]
    assert normalize_rows(np.zeros((0, 2), dtype=np.int64)).tolist() == []


def test_same_partition():
    assert same_partition(np.array([0, 0, 1]), np.array([5, 5, 2]))
    assert not same_partition(np.array([0, 0, 1]), np.array([0, 1, 2]))
    # 類別數相同但分割不同
    assert not same_partition(np.array([0, 0, 1, 1]), np.array([0, 1, 1, 0]))


# ==================== 古典 refinement ====================

def test_one_wl_cannot_separate_cycle_from_triangles(c6, two_triangles, star3, p4):
    assert not wl_distinguishes(c6, two_triangles, 1)
    assert wl_distinguishes(c6, two_triangles, 2)
    assert wl_distinguishes(star3, p4, 1)


def test_owl_needs_one_more_dimension(c6, two_triangles):
    assert not owl_distinguishes(c6, two_triangles, 2)
    assert owl_distinguishes(c6, two_triangles, 3)


def test_classic_refinement_on_single_graph(star3):
    result = wl_classic(star3, 1)
    assert result.stable
    assert result.table.num_classes == 2
    assert owl_classic(star3, 1).table.num_classes == 1


@pytest.mark.parametrize("k", [0, -1])
def test_classic_dimension_must_be_positive(star3, k):
    with pytest.raises(ConfigurationError):
        wl_classic(star3, k)
    with pytest.raises(ConfigurationError):
        owl_classic(star3, k)


# ==================== (k1,k2)-OWL ====================

def test_restricted_owl_examples(c6, two_triangles, star3, p4):
    empty11 = PartialAssignment.empty(1, 1)
    empty02 = PartialAssignment.empty(0, 2)
    assert equivalent_naive(c6, empty11, two_triangles, empty11, 1, 1)
    assert not equivalent_naive(star3, empty02, p4, empty02, 0, 2)


def test_reusable_only_matches_classic_owl(c6, two_triangles):
    assert not owl_restricted(c6, two_triangles, 2, 0).distinguishes_empty()
    assert owl_restricted(c6, two_triangles, 3, 0).distinguishes_empty()


def test_cfi_over_binary_tree(b2_base):
    X, Y = cfi_pair(b2_base)
    assert X.graph.n == 14
    assert not owl_restricted(X.graph, Y.graph, 0, 2).distinguishes_empty()
    assert owl_restricted(X.graph, Y.graph, 1, 1).distinguishes_empty()


@pytest.mark.parametrize("seed", range(6))
def test_iteration_bound(seed):
    G = random_graph(5, 0.4, seed=seed, num_colors=2)
    for k1, k2 in [(1, 0), (1, 1), (0, 2), (2, 1)]:
        result = owl_restricted(G, k1=k1, k2=k2)
        assert result.stable
        assert result.rounds <= (k2 + 1) * G.n ** k1 - 1


def test_class_counts_never_decrease(star3, p4):
    result = owl_restricted(star3, p4, 1, 1, keep_history=True)
    assert result.rounds >= 1
    counts = result.class_counts
    assert counts == sorted(counts)
    assert len(result.history) == result.rounds + 1
    assert result.table_at(0) is result.history[0]
    assert result.table_at(result.rounds + 3) is result.table


def test_round_budget(c6, two_triangles, star3):
    capped = owl_restricted(c6, two_triangles, 1, 1, r=0)
    assert capped.rounds == 0 and not capped.stable
    with pytest.raises(ConfigurationError):
        capped.table_at(2)
    with pytest.raises(ConfigurationError):
        owl_restricted(star3, k1=1, k2=1).table_at(0)


def test_step_on_x_positions_only_keeps_y_classes(star3):
    stable = owl_restricted(star3, k1=0, k2=1).table
    assert same_partition(stable.colors, owl_ref_step(stable, "x").colors)
    with pytest.raises(ConfigurationError):
        owl_ref_step(stable, "z")


def test_multi_graph_run_shares_colors(c6, two_triangles):
    result = owl_restricted_many([c6, two_triangles, c6], 1, 1)
    assert result.empty_color(0) == result.empty_color(1) == result.empty_color(2)
    assert result.table.histogram(0) == result.table.histogram(2)


def test_total_scheme_has_no_empty_assignment(c6):
    with pytest.raises(ConfigurationError):
        owl_classic(c6, 2).empty_color(0)


@pytest.mark.parametrize("seed", range(5))
def test_equivalence_is_isomorphism_invariant(seed):
    G = random_graph(5, 0.5, seed=seed, num_colors=2)
    perm = random_permutation(5, seed=seed)
    H = permuted(G, perm)
    assert equivalent_naive(G, PartialAssignment.empty(1, 1), H, PartialAssignment.empty(1, 1), 1, 1)
    for v in range(5):
        alpha = PartialAssignment(1, 1, (v, None))
        beta = PartialAssignment(1, 1, (perm[v], None))
        assert equivalent_naive(G, alpha, H, beta, 1, 1)


def test_configuration_errors(c6, two_triangles):
    with pytest.raises(ConfigurationError):
        equivalent_naive(c6, PartialAssignment(1, 1, (0, None)), two_triangles, PartialAssignment.empty(1, 1), 1, 1)
    with pytest.raises(ConfigurationError):
        equivalent_naive(c6, PartialAssignment.empty(1, 1), two_triangles, PartialAssignment.empty(2, 0), 1, 1)
    with pytest.raises(ConfigurationError):
        owl_restricted(c6, k1=0, k2=0)


def test_domain_budget(monkeypatch):
    monkeypatch.setattr(BUDGET, "DOMAIN_CELLS", 100)
    with pytest.raises(BudgetExceededError):
        owl_restricted(gen_family("cycle", 6), k1=2, k2=1)


def _random_pair(seed: int):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    G = random_graph(n, 0.5, seed=seed, num_colors=rng.randint(1, 2))
    if rng.random() < 0.5:
        H = permuted(G, random_permutation(n, seed=seed + 1))
        u, v = rng.sample(range(n), 2)
        edges = set(H.edges) ^ {(min(u, v), max(u, v))}
        H = make_graph(n, edges, H.colors)
    else:
        H = random_graph(rng.randint(2, 4), 0.5, seed=seed + 30, num_colors=rng.randint(1, 2))
    return G, H


@pytest.mark.parametrize("seed", range(10))
def test_more_variables_keep_pairs_apart(seed):
    G, H = _random_pair(seed)
    for k1, k2 in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        if equivalent_naive(G, PartialAssignment.empty(k1, k2), H, PartialAssignment.empty(k1, k2), k1, k2):
            continue
        for a, b in [(k1 + 1, k2), (k1, k2 + 1)]:
            empty = PartialAssignment.empty(a, b)
            assert not equivalent_naive(G, empty, H, empty, a, b), (k1, k2, a, b)


@pytest.mark.parametrize("seed", range(10))
def test_histogram_and_empty_assignment_agree_when_stable(seed):
    G, H = _random_pair(seed)
    for k1, k2 in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1)]:
        result = owl_restricted(G, H, k1, k2)
        assert result.stable
        assert result.distinguishes_histogram() == result.distinguishes_empty(), (k1, k2)
