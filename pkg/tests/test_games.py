import itertools
import random

import numpy as np
import pytest

from config.constants import BUDGET
from services.cfi import as_base, cfi_pair
from services.errors import BudgetExceededError, ConfigurationError
from services.games import (
    BpConfiguration,
    CrPosition,
    Winner,
    bp_first_move,
    bp_solve,
    bp_table,
    cr_first_move,
    cr_solve,
    cr_table,
    edge_components,
    partial_iso,
)
from services.graphs import PartialAssignment, atomic_type, gen_family, random_graph
from services.treedepth import shrink
from services.wl import owl_restricted


def _configurations(nG: int, nH: int, k: int):
    """所有 domain 相同的 (α, β) 配對"""
    for domain in itertools.product([False, True], repeat=k):
        slots = [p for p in range(k) if domain[p]]
        for left in itertools.product(range(nG), repeat=len(slots)):
            for right in itertools.product(range(nH), repeat=len(slots)):
                a, b = [None] * k, [None] * k
                for p, v, w in zip(slots, left, right):
                    a[p], b[p] = v, w
                yield tuple(a), tuple(b)


# ==================== edge components ====================

def test_edge_components_on_path(p4):
    assert edge_components(p4, PartialAssignment.empty(1, 0)) == [frozenset(p4.sorted_edges())]
    covered = PartialAssignment(1, 0, (1,))
    assert edge_components(p4, covered) == [frozenset({(0, 1)}), frozenset({(1, 2), (2, 3)})]


def test_edge_components_isolate_edges_at_covered_center(star3):
    classes = edge_components(star3, PartialAssignment(1, 0, (0,)))
    assert classes == [frozenset({(0, 1)}), frozenset({(0, 2)}), frozenset({(0, 3)})]


# ==================== 部分同構 ====================

def test_partial_iso_examples(p4):
    assert partial_iso(p4, p4, BpConfiguration.empty(1, 1))
    merged = BpConfiguration(PartialAssignment(2, 0, (0, 0)), PartialAssignment(2, 0, (0, 1)))
    assert not partial_iso(p4, p4, merged)


def test_partial_iso_matches_atomic_type(rng):
    G = random_graph(5, 0.5, seed=1, num_colors=2)
    H = random_graph(5, 0.5, seed=2, num_colors=2)
    for _ in range(200):
        domain = [rng.random() < 0.6 for _ in range(3)]
        a = tuple(rng.randrange(5) if d else None for d in domain)
        b = tuple(rng.randrange(5) if d else None for d in domain)
        alpha, beta = PartialAssignment(2, 1, a), PartialAssignment(2, 1, b)
        assert partial_iso(G, H, BpConfiguration(alpha, beta)) == (atomic_type(G, alpha) == atomic_type(H, beta))


# ==================== bijective pebble game ====================

def test_bp_examples(star3, p4, c6, two_triangles):
    assert bp_solve(star3, p4, 0, 2) is Winner.SPOILER
    assert bp_solve(c6, two_triangles, 1, 1) is Winner.DUPLICATOR
    assert bp_solve(star3, star3, 1, 2) is Winner.DUPLICATOR


def test_bp_different_orders(p4):
    P5 = gen_family("path", 5)
    assert bp_solve(p4, P5, 1, 0) is Winner.SPOILER
    assert bp_solve(p4, P5, 1, 0, r=0) is Winner.DUPLICATOR


def test_bp_first_move(star3, p4, c6, two_triangles):
    spoiler = bp_first_move(star3, p4, 0, 2)
    assert spoiler.to_dict() == {"player": "Spoiler", "pebble": "y1", "rounds": 2}

    duplicator = bp_first_move(c6, two_triangles, 1, 1)
    assert duplicator.player is Winner.DUPLICATOR
    assert duplicator.pebble == "x1"
    assert sorted(duplicator.bijection) == list(range(6))
    assert sorted(duplicator.bijection.values()) == list(range(6))


def test_bp_rounds_are_monotone(star3, p4):
    table = bp_table(star3, p4, 1, 1)
    assert table.stable
    for before, after in zip(table.history, table.history[1:]):
        assert not np.any(after & ~before)
    with pytest.raises(ConfigurationError):
        bp_table(star3, p4, 1, 1, r=0).at(None)


def test_more_pebbles_keep_spoiler_winning(star3, p4):
    assert bp_solve(star3, p4, 0, 2) is Winner.SPOILER
    assert bp_solve(star3, p4, 1, 2) is Winner.SPOILER
    assert bp_solve(star3, p4, 0, 3) is Winner.SPOILER


def test_bp_errors(star3, p4, monkeypatch):
    with pytest.raises(ConfigurationError):
        bp_solve(star3, p4, 0, 0)
    mismatch = BpConfiguration(PartialAssignment(1, 1, (0, None)), PartialAssignment.empty(1, 1))
    with pytest.raises(ConfigurationError):
        bp_solve(star3, p4, 1, 1, init=mismatch)
    monkeypatch.setattr(BUDGET, "GAME_STATES", 10)
    with pytest.raises(BudgetExceededError):
        bp_solve(star3, p4, 1, 1)


def _assert_game_matches_refinement(G, H, k1, k2, max_rounds=3):
    table = bp_table(G, H, k1, k2)
    refinement = owl_restricted(G, H, k1, k2, keep_history=True)
    for r in range(max_rounds + 1):
        colors = refinement.table_at(r)
        for a, b in _configurations(G.n, H.n, k1 + k2):
            c = BpConfiguration(PartialAssignment(k1, k2, a), PartialAssignment(k1, k2, b))
            same = colors.color_of(0, a) == colors.color_of(1, b)
            assert table.duplicator_wins(c, r) == same, (k1, k2, r, a, b)


@pytest.mark.parametrize("k1, k2", [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
def test_game_matches_refinement_on_small_pairs(k1, k2):
    pairs = [
        (gen_family("path", 3), gen_family("complete", 3)),
        (gen_family("star", 3), gen_family("path", 4)),
        (gen_family("cycle", 4), gen_family("path", 4)),
    ]
    for G, H in pairs:
        _assert_game_matches_refinement(G, H, k1, k2)


@pytest.mark.parametrize("seed", range(6))
def test_game_matches_refinement_on_random_pairs(seed):
    rng = random.Random(seed)
    k1, k2 = rng.choice([(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    G = random_graph(4, 0.5, seed=seed, num_colors=2)
    H = random_graph(rng.choice([3, 4]), 0.5, seed=seed + 20, num_colors=2)
    _assert_game_matches_refinement(G, H, k1, k2)


@pytest.mark.parametrize("seed", range(4))
def test_pebbled_vertex_can_be_shrunk(seed):
    rng = random.Random(seed)
    G = random_graph(4, 0.5, seed=seed, num_colors=2)
    H = random_graph(4, 0.5, seed=rng.randrange(1000), num_colors=2)
    table = bp_table(G, H, 0, 2)
    for v in range(G.n):
        for w in range(H.n):
            if G.colors[v] != H.colors[w]:
                continue
            start = BpConfiguration(PartialAssignment(0, 2, (v, None)), PartialAssignment(0, 2, (w, None)))
            shrunk = bp_solve(shrink(G, v), shrink(H, w), 0, 1)
            assert table.duplicator_wins(start) == (shrunk is Winner.DUPLICATOR)


# ==================== cops and robber ====================

@pytest.mark.parametrize("family, params, k1, k2, expected", [
    ("complete", (3,), 0, 3, Winner.COPS),
    ("complete", (3,), 2, 0, Winner.ROBBER),
    ("complete", (3,), 1, 1, Winner.ROBBER),
    ("complete", (3,), 0, 2, Winner.ROBBER),
    ("perfect_binary_tree", (2,), 1, 1, Winner.COPS),
    ("perfect_binary_tree", (2,), 0, 2, Winner.ROBBER),
    ("path", (9,), 2, 0, Winner.COPS),
    ("path", (9,), 1, 1, Winner.ROBBER),
])
def test_cr_examples(family, params, k1, k2, expected):
    assert cr_solve(gen_family(family, *params), k1, k2) is expected


def test_more_cops_keep_winning():
    B2 = gen_family("perfect_binary_tree", 2)
    assert cr_solve(B2, 2, 1) is Winner.COPS
    assert cr_solve(B2, 1, 2) is Winner.COPS
    K3 = gen_family("complete", 3)
    assert cr_solve(K3, 1, 3) is Winner.COPS


def test_cr_first_move():
    K3 = gen_family("complete", 3)
    cops = cr_first_move(K3, 0, 3)
    assert cops.to_dict() == {"player": "Cops", "pebble": "y1", "vertex": 0, "rounds": 3}
    robber = cr_first_move(K3, 1, 1)
    assert robber.to_dict() == {"player": "Robber", "edge": [0, 1]}


def test_cr_positions_and_rounds():
    K3 = gen_family("complete", 3)
    table = cr_table(K3, 0, 3)
    cornered = CrPosition(PartialAssignment(0, 3, (0, 1, None)), (0, 1))
    assert table.cops_win(cornered, 0)
    assert not table.cops_win_start(2)
    assert table.cops_win_start(3)
    for before, after in zip(table.history, table.history[1:]):
        assert not np.any(before & ~after)
    with pytest.raises(ConfigurationError):
        table.cops_win(CrPosition(PartialAssignment.empty(0, 3), (0, 0)))


@pytest.mark.parametrize("family, params", [
    ("perfect_binary_tree", (2,)),
    ("path", (5,)),
    ("path", (9,)),
    ("cycle", (5,)),
    ("grid", (2, 3)),
])
@pytest.mark.parametrize("k1, k2", [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
def test_cops_keep_winning_with_more_rounds(family, params, k1, k2):
    table = cr_table(gen_family(family, *params), k1, k2)
    assert table.stable
    for before, after in zip(table.history, table.history[1:]):
        assert not np.any(before & ~after)
    for r in range(table.rounds + 2):
        if table.cops_win_start(r):
            assert table.cops_win_start(r + 1), (family, k1, k2, r)
    assert table.cops_win_start(table.rounds + 5) == table.cops_win_start()


def test_cr_without_edges_is_won_by_cops():
    single = gen_family("complete", 1)
    assert cr_solve(single, 1, 0) is Winner.COPS


def test_cr_budget(monkeypatch):
    monkeypatch.setattr(BUDGET, "GAME_STATES", 10)
    with pytest.raises(BudgetExceededError):
        cr_solve(gen_family("path", 9), 2, 0)


# ==================== CR 與 CFI 上的 BP ====================

def _assert_cfi_bridge(base_graph, k1, k2, max_rounds=4):
    B = as_base(base_graph)
    X, Y = cfi_pair(B)
    pebbles = bp_table(X.graph, Y.graph, k1, k2)
    cops = cr_table(B, k1, k2)
    empty = BpConfiguration.empty(k1, k2)
    for r in list(range(max_rounds + 1)) + [None]:
        assert pebbles.duplicator_wins(empty, r) == (not cops.cops_win_start(r)), (k1, k2, r)


@pytest.mark.parametrize("family, params", [("path", (3,)), ("complete", (3,))])
@pytest.mark.parametrize("k1, k2", [(2, 0), (1, 1), (0, 2)])
def test_cfi_bridge_two_pebbles(family, params, k1, k2):
    _assert_cfi_bridge(gen_family(family, *params), k1, k2)


@pytest.mark.parametrize("k1, k2", [(3, 0), (2, 1), (1, 2), (0, 3)])
def test_cfi_bridge_three_pebbles_on_path(k1, k2):
    _assert_cfi_bridge(gen_family("path", 3), k1, k2)


@pytest.mark.slow
@pytest.mark.parametrize("k1, k2", [(3, 0), (2, 1), (1, 2), (0, 3)])
def test_cfi_bridge_three_pebbles_on_triangle(k1, k2):
    _assert_cfi_bridge(gen_family("complete", 3), k1, k2)
