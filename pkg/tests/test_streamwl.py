import random

import pytest

from services.errors import ConfigurationError
from services.graphs import PartialAssignment, gen_family, make_graph, permuted, random_graph, random_permutation
from services.streamwl import (
    EtaPair,
    ExtensionStream,
    MemoryMeter,
    SideAssignment,
    StreamEquivalence,
    multiset_lex_compare,
    ref_nonreusable,
    ref_reusable_fixpoint,
    stream_equivalent,
)
from services.wl import equivalent_naive, owl_restricted


def _cmp(a, b):
    return (a > b) - (a < b)


def _space_limit(n: int, k1: int, levels: int) -> int:
    return 2 * 2 * (n + 1) ** k1 * (levels + 1)


# ==================== multiset 比較 ====================

@pytest.mark.parametrize("left, right, expected", [
    ([1, 2, 2], [1, 2, 3], -1),
    ([3, 1, 2], [2, 3, 1], 0),
    ([1, 1], [1, 1, 1], -1),
    ([2], [1, 1, 1], 1),
    ([], [], 0),
])
def test_multiset_lex_compare_examples(left, right, expected):
    assert multiset_lex_compare(3, _cmp, left, right) == expected
    assert multiset_lex_compare(3, _cmp, right, left) == -expected


def test_multiset_lex_compare_matches_sorted_lists(rng):
    for _ in range(200):
        left = [rng.randrange(4) for _ in range(rng.randrange(6))]
        right = [rng.randrange(4) for _ in range(rng.randrange(6))]
        assert multiset_lex_compare(6, _cmp, left, right) == _cmp(sorted(left), sorted(right))


def test_multiset_lex_compare_rejects_short_bound():
    with pytest.raises(ValueError):
        multiset_lex_compare(1, _cmp, [0, 1, 2], [0, 1, 2])


def test_extension_stream_is_replayable():
    stream = ExtensionStream(SideAssignment(0, (None, 2)), 0, 3)
    assert len(stream) == 3
    first = list(stream)
    assert first == list(stream)
    assert [a.entries for a in first] == [(0, 2), (1, 2), (2, 2)]


# ==================== refinement 運算子 ====================

def test_reusable_fixpoint_matches_naive_partition(star3, p4):
    ctx = StreamEquivalence((star3, p4), 2, 0, mode="faithful")
    pair = EtaPair(0, (), 1, ())
    table = ref_reusable_fixpoint(ctx, pair, ctx.atomic_table(pair))
    assert table.size == 2 * 5 ** 2

    naive = owl_restricted(star3, p4, 2, 0).table
    expected = [naive.color_of(a.side, a.entries) for a in ctx.domain(pair)]
    for i in range(table.size):
        for j in range(i + 1, table.size):
            assert (table.colors[i] == table.colors[j]) == (expected[i] == expected[j])

    # 同時最多兩張表
    assert ctx.meter.live_cells == table.size
    assert ctx.meter.peak_cells <= 2 * table.size


@pytest.mark.parametrize("H_colors, split", [([0, 0], True), ([1, 0], False)])
def test_nonreusable_step_compares_extension_multisets(H_colors, split):
    G = make_graph(2, [], [0, 1])
    H = make_graph(2, [], H_colors)
    ctx = StreamEquivalence((G, H), 0, 1, mode="faithful")
    pair = EtaPair(0, (None,), 1, (None,))
    chi = ctx.atomic_table(pair)
    assert chi.colors[0] == chi.colors[1]

    result = ref_nonreusable(ctx, pair, chi, ctx.oracle(0))
    assert (result.colors[0] != result.colors[1]) == split
    assert ctx.meter.live_cells == result.size
    assert ctx.meter.oracle_calls > 0


def test_nonreusable_step_without_open_y_is_identity(star3):
    ctx = StreamEquivalence((star3, star3), 0, 1)
    pair = EtaPair(0, (0,), 1, (1,))
    chi = ctx.atomic_table(pair)
    assert ref_nonreusable(ctx, pair, chi, ctx.oracle(0)) is chi


def test_order_on_table_cells_is_plain_int(star3, p4):
    ctx = StreamEquivalence((star3, p4), 1, 1, mode="faithful")
    center = SideAssignment(0, (0, None))
    endpoint = SideAssignment(1, (0, None))
    ordering = ctx.compare(center, endpoint)
    assert type(ordering) is int
    assert ordering != 0
    assert ctx.compare(endpoint, center) == -ordering
    assert ctx.compare(center, center) == 0
    assert ctx.meter.live_cells == 0


# ==================== 例外後的 cells 計數 ====================

def test_failed_nonreusable_step_releases_tables(star3, p4):
    ctx = StreamEquivalence((star3, p4), 0, 1, mode="faithful")
    pair = EtaPair(0, (None,), 1, (None,))
    chi = ctx.atomic_table(pair)

    def unavailable(a, b):
        raise RuntimeError("oracle unavailable")

    with pytest.raises(RuntimeError):
        ref_nonreusable(ctx, pair, chi, unavailable)
    assert ctx.meter.live_cells == 0


def test_meter_is_balanced_after_failed_table(star3, p4, monkeypatch):
    meter = MemoryMeter()
    ctx = StreamEquivalence((star3, p4), 1, 1, mode="faithful", meter=meter)
    center = SideAssignment(0, (0, None))
    endpoint = SideAssignment(1, (0, None))

    def broken(*args, **kwargs):
        raise RuntimeError("refinement failed")

    monkeypatch.setattr("services.streamwl.signature_rows", broken)
    with pytest.raises(RuntimeError):
        ctx.compare(center, endpoint)
    assert meter.live_cells == 0
    assert meter.depth == 0

    monkeypatch.undo()
    assert ctx.compare(center, endpoint) != 0
    assert meter.live_cells == 0


# ==================== 判定 ====================

@pytest.mark.parametrize("mode", ["fast", "faithful"])
def test_stream_examples(star3, p4, mode):
    empty = PartialAssignment.empty(0, 2)
    verdict, meter = stream_equivalent(star3, empty, p4, empty, 0, 2, mode=mode)
    assert verdict is False
    assert meter.working_peak_cells <= _space_limit(4, 0, 2)


def test_stream_cycle_against_triangles(c6, two_triangles):
    empty = PartialAssignment.empty(1, 1)
    verdict, meter = stream_equivalent(c6, empty, two_triangles, empty, 1, 1, mode="fast")
    assert verdict is True
    assert meter.peak_depth == 2
    assert meter.working_peak_cells <= _space_limit(6, 1, 1)


def test_faithful_mode_rebuilds_tables():
    G = gen_family("path", 3)
    H = make_graph(3, [(0, 1), (1, 2), (0, 2)], [0, 0, 0])
    empty = PartialAssignment.empty(1, 1)
    fast_verdict, fast = stream_equivalent(G, empty, H, empty, 1, 1, mode="fast")
    slow_verdict, slow = stream_equivalent(G, empty, H, empty, 1, 1, mode="faithful")
    assert fast_verdict == slow_verdict is False
    assert slow.tables_built >= fast.tables_built
    assert slow.cached_cells == 0 and fast.cached_cells > 0
    assert slow.peak_cells <= _space_limit(3, 1, 1)
    assert slow.peak_cells == slow.working_peak_cells


def test_fast_mode_peak_includes_cached_tables():
    G = gen_family("cycle", 4)
    H = random_graph(4, 0.5, seed=4)
    empty = PartialAssignment.empty(1, 2)
    _, meter = stream_equivalent(G, empty, H, empty, 1, 2, mode="fast")
    assert meter.cached_cells > 0
    assert meter.peak_cells >= meter.cached_cells
    assert meter.peak_cells >= meter.working_peak_cells
    assert meter.to_dict()["working_peak_cells"] == meter.working_peak_cells
    # 快取本身就超過 faithful 的空間上限
    assert meter.peak_cells > _space_limit(4, 1, 2)


def _random_configuration(rng: random.Random, nG: int, nH: int, k: int):
    domain = [p for p in range(k) if rng.random() < 0.4]
    alpha = [None] * k
    beta = [None] * k
    for p in domain:
        alpha[p] = rng.randrange(nG)
        beta[p] = rng.randrange(nH)
    return tuple(alpha), tuple(beta)


@pytest.mark.parametrize("seed", range(12))
def test_stream_agrees_with_naive(seed):
    rng = random.Random(seed)
    k1, k2 = rng.choice([(1, 0), (0, 1), (1, 1), (0, 2), (2, 0)])
    G = random_graph(4, 0.5, seed=seed, num_colors=2)
    if rng.random() < 0.5:
        H = permuted(G, random_permutation(4, seed=seed))
    else:
        H = random_graph(4, 0.5, seed=seed + 50, num_colors=2)
    a, b = _random_configuration(rng, G.n, H.n, k1 + k2)
    alpha = PartialAssignment(k1, k2, a)
    beta = PartialAssignment(k1, k2, b)
    expected = equivalent_naive(G, alpha, H, beta, k1, k2)
    verdict, meter = stream_equivalent(G, alpha, H, beta, k1, k2, mode="fast")
    assert verdict == expected
    levels = len(alpha.unassigned_y)
    assert meter.working_peak_cells <= _space_limit(4, k1, levels)


def test_stream_on_different_orders():
    G = gen_family("path", 4)
    H = gen_family("path", 5)
    empty = PartialAssignment.empty(1, 0)
    assert stream_equivalent(G, empty, H, empty, 1, 0)[0] is False
    assert equivalent_naive(G, empty, H, empty, 1, 0) is False


def test_stream_errors(star3, p4):
    empty = PartialAssignment.empty(1, 1)
    with pytest.raises(ConfigurationError):
        stream_equivalent(star3, empty, p4, empty, 1, 1, mode="slow")
    with pytest.raises(ConfigurationError):
        stream_equivalent(star3, PartialAssignment(1, 1, (None, 0)), p4, empty, 1, 1)
    with pytest.raises(ConfigurationError):
        StreamEquivalence((star3, p4), 0, 0)
    ctx = StreamEquivalence((star3, p4), 1, 1, mode="fast")
    with pytest.raises(ConfigurationError):
        ctx.compare(SideAssignment(0, (None, 0)), SideAssignment(1, (None, None)))
