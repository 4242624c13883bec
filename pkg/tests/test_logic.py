import random

import pytest

from services.errors import FormulaError
from services.graphs import PartialAssignment, make_graph, permuted, random_graph, random_permutation
from services.logic import (
    CountExists,
    Edge,
    Eq,
    Exists,
    Forall,
    Not,
    analyze,
    evaluate,
    format_formula,
    infer_budget,
    normalize,
    parse_formula,
    parse_legend,
    random_formula,
)
from services.wl import equivalent_naive

DISTANCE_TWO = "forall x1 (U_red(x1) -> exists x2 (E(x1,x2) & exists x1 (E(x2,x1) & U_blue(x1))))"
REQUANTIFICATION_EXAMPLE = (
    "(exists y1 !E(x2,y1)) & exists>=4 x1 (E(x2,x1) & exists y1 (!E(x1,y1)) & "
    "forall x2 (!E(x2,x1) -> exists>=3 x1 E(x1,x2)))"
)
LEGEND = {"red": 0, "green": 1, "blue": 2}


# ==================== 解析 ====================

def test_parse_atoms():
    assert parse_formula("E(x1,x2)", 2, 0) == Edge("x1", "x2")
    assert parse_formula("x1=y1", 1, 1) == Eq("x1", "y1")
    assert parse_formula("exists>=4 x1 E(x1,x1)", 1, 0) == CountExists(4, "x1", Edge("x1", "x1"))


def test_parse_precedence():
    phi = parse_formula("!E(x1,x2) & x1=x2 | x2=x1 -> E(x2,x1)", 2, 0)
    assert format_formula(phi) == "((!E(x1,x2) & x1=x2) | x2=x1) -> E(x2,x1)"


def test_quantifier_body_is_unary():
    phi = parse_formula("exists x1 E(x1,x1) & x1=x1", 1, 0)
    assert phi.left == Exists("x1", Edge("x1", "x1"))


@pytest.mark.parametrize("text, k1, k2", [
    ("E(x1,", 1, 0),
    ("E(x3,x1)", 2, 0),
    ("exists>=a x1 E(x1,x1)", 1, 0),
    ("x1 # x1", 1, 0),
    ("U_red(x1)", 1, 0),
    ("y1=y1", 1, 0),
])
def test_parse_errors(text, k1, k2):
    with pytest.raises(FormulaError):
        parse_formula(text, k1, k2)


def test_syntax_error_reports_position():
    with pytest.raises(FormulaError) as info:
        parse_formula("E(x1,x1) &", 1, 0)
    assert info.value.position == len("E(x1,x1) &")


def test_legend():
    assert parse_legend("red=0, blue=1") == {"red": 0, "blue": 1}
    assert parse_legend("0=red,1=blue") == {"red": 0, "blue": 1}
    assert parse_legend(None) == {}
    with pytest.raises(FormulaError):
        parse_legend("red")


def test_color_names_and_integers():
    named = parse_formula(DISTANCE_TWO, 2, 0, LEGEND)
    numbered = parse_formula(DISTANCE_TWO.replace("U_red", "U_0").replace("U_blue", "U_2"), 2, 0)
    assert named == numbered
    assert "U_red" in format_formula(named, LEGEND)


def test_budget_inference():
    assert infer_budget("E(x1,y2) & exists x3 x3=x3") == (3, 2)
    phi = parse_formula("E(x1,y2)", None, None)
    report = analyze(phi)
    assert (report.k1, report.k2) == (1, 2)


@pytest.mark.parametrize("seed", range(5))
def test_format_parses_back(seed):
    phi = random_formula(2, 1, 3, 5, seed=seed, colors=(0, 1))
    assert parse_formula(format_formula(phi), 2, 1) == phi


# ==================== 分析 ====================

def test_requantification_example():
    report = analyze(parse_formula(REQUANTIFICATION_EXAMPLE, 2, 1))
    assert report.requantified == frozenset({"x1", "x2"})
    assert report.free == frozenset({"x2"})
    assert report.qr == 3
    assert report.in_fragment(2, 1, 3)
    assert not report.in_fragment(2, 1, 2)
    assert not report.in_fragment(1, 1)


def test_quantifier_free_formula():
    report = analyze(parse_formula("E(x1,x2) | x1=x2", 2, 0))
    assert report.requantified == frozenset()
    assert report.qr == 0


def test_nested_y_is_requantified():
    phi = Exists("y1", Exists("y1", Edge("y1", "y1")))
    report = analyze(phi, 0, 1)
    assert "y1" in report.requantified
    assert not report.in_logic
    assert analyze(phi, 1, 1).to_dict()["in_logic"] is False


def test_free_and_bound_y_is_requantified():
    report = analyze(parse_formula("E(x1,y1) & exists y1 y1=y1", 1, 1))
    assert report.requantified == frozenset({"y1"})
    assert not report.in_logic


def test_normalize_expands_sugar():
    phi = normalize(Forall("x1", Edge("x1", "x1")))
    assert phi == Not(CountExists(1, "x1", Not(Edge("x1", "x1"))))


@pytest.mark.parametrize("seed", range(10))
def test_random_formulas_stay_in_fragment(seed):
    phi = random_formula(1, 2, 3, 5, seed=seed, free=("x1", "y2"))
    report = analyze(phi, 1, 2, 3)
    assert report.in_rank
    assert "y2" in report.free
    assert report.free <= {"x1", "y2"}


@pytest.mark.parametrize("seed", range(10))
def test_sentences_without_reusable_variables_respect_rank_bound(seed):
    phi = random_formula(0, 2, 4, 5, seed=seed)
    report = analyze(phi, 0, 2)
    assert report.in_logic
    assert report.qr <= 2
    assert not report.rank_bound_violated


# ==================== 求值 ====================

def test_distance_two_formula():
    phi = parse_formula(DISTANCE_TWO, 2, 0, LEGEND)
    empty = PartialAssignment.empty(2, 0)
    path = make_graph(3, [(0, 1), (1, 2)], [0, 1, 2])
    assert evaluate(path, empty, phi)
    no_red = make_graph(3, [(0, 1), (1, 2)], [1, 1, 2])
    assert evaluate(no_red, empty, phi)
    red_only = make_graph(2, [(0, 1)], [0, 0])
    assert not evaluate(red_only, empty, phi)


def test_counting_semantics(star3):
    empty = PartialAssignment.empty(1, 0)
    assert not evaluate(star3, empty, parse_formula("exists>=4 x1 E(x1,x1)", 1, 0))
    assert evaluate(star3, empty, CountExists(0, "x1", Edge("x1", "x1")))
    at_center = PartialAssignment(2, 0, (0, None))
    assert evaluate(star3, at_center, parse_formula("exists>=3 x2 E(x1,x2)", 2, 0))
    assert not evaluate(star3, at_center, parse_formula("exists>=4 x2 E(x1,x2)", 2, 0))


def test_unassigned_free_variable(star3):
    with pytest.raises(FormulaError):
        evaluate(star3, PartialAssignment.empty(2, 0), Edge("x1", "x2"))


@pytest.mark.parametrize("seed", range(8))
def test_evaluation_is_isomorphism_invariant(seed):
    G = random_graph(5, 0.5, seed=seed, num_colors=2)
    perm = random_permutation(5, seed=seed + 100)
    H = permuted(G, perm)
    phi = random_formula(2, 1, 2, 5, seed=seed, free=("x1",), colors=(0, 1))
    for v in range(5):
        alpha = PartialAssignment(2, 1, (v, None, None))
        beta = PartialAssignment(2, 1, (perm[v], None, None))
        assert evaluate(G, alpha, phi) == evaluate(H, beta, phi)


def test_equivalent_graphs_agree_on_sentences(c6, two_triangles):
    empty = PartialAssignment.empty(1, 1)
    assert equivalent_naive(c6, empty, two_triangles, empty, 1, 1)
    for seed in range(15):
        phi = random_formula(1, 1, 1 + seed % 3, 6, seed=seed)
        assert evaluate(c6, empty, phi) == evaluate(two_triangles, empty, phi), format_formula(phi)


def test_degree_separates_star_from_path(star3, p4):
    phi = parse_formula("exists y1 exists>=3 y2 E(y1,y2)", 0, 2)
    empty = PartialAssignment.empty(0, 2)
    assert evaluate(star3, empty, phi) and not evaluate(p4, empty, phi)
    assert not equivalent_naive(star3, empty, p4, empty, 0, 2)


def _agree_on_random_formulas(G, alpha, H, beta, r, rng, count=12):
    free = tuple(alpha.as_mapping())
    for _ in range(count):
        phi = random_formula(alpha.k1, alpha.k2, r, max(G.n, H.n), free=free, colors=(0, 1), rng=rng)
        if evaluate(G, alpha, phi) != evaluate(H, beta, phi):
            return False
    return True


@pytest.mark.parametrize("seed", range(10))
def test_isomorphic_configurations_agree_on_random_formulas(seed):
    rng = random.Random(seed)
    k1, k2 = rng.choice([(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    r = rng.randint(0, 3)
    n = rng.randint(2, 5)
    G = random_graph(n, 0.5, seed=seed, num_colors=2)
    perm = random_permutation(n, seed=seed + 40)
    H = permuted(G, perm)
    entries = [rng.randrange(n) if rng.random() < 0.6 else None for _ in range(k1 + k2)]
    if r == 0 and all(v is None for v in entries):
        entries[0] = 0
    alpha = PartialAssignment(k1, k2, tuple(entries))
    beta = PartialAssignment(k1, k2, tuple(None if v is None else perm[v] for v in entries))
    assert equivalent_naive(G, alpha, H, beta, k1, k2, r)
    assert _agree_on_random_formulas(G, alpha, H, beta, r, rng)


@pytest.mark.parametrize("seed", range(16))
def test_equivalent_random_pairs_agree_on_random_formulas(seed):
    rng = random.Random(seed)
    k1, k2 = rng.choice([(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    r = rng.randint(1, 3)
    G = random_graph(rng.randint(3, 5), 0.5, seed=seed, num_colors=rng.randint(1, 2))
    H = random_graph(rng.randint(3, 5), 0.5, seed=seed + 60, num_colors=rng.randint(1, 2))
    empty = PartialAssignment.empty(k1, k2)
    if equivalent_naive(G, empty, H, empty, k1, k2, r):
        assert _agree_on_random_formulas(G, empty, H, empty, r, rng)
    else:
        # 0 回合只看原子型別，空 configuration 一定等價
        assert equivalent_naive(G, empty, H, empty, k1, k2, 0)
