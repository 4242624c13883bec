import pytest

from config.constants import BUDGET
from services.errors import BudgetExceededError, ConfigurationError, GraphError
from services.graphs import gen_family, make_graph
from services.treedepth import TdCertificate, graphs_up_to, identifies_within, replay, shrink, tree_depth


@pytest.mark.parametrize("family, params, expected", [
    ("complete", (1,), 1),
    ("star", (3,), 2),
    ("path", (3,), 2),
    ("path", (7,), 3),
    ("complete", (4,), 4),
    ("cycle", (4,), 3),
    ("perfect_binary_tree", (2,), 3),
])
def test_tree_depth_values(family, params, expected):
    G = gen_family(family, *params)
    cert = tree_depth(G)
    assert cert.value == expected
    assert replay(cert, G)


def test_disconnected_graph_takes_maximum():
    G = make_graph(5, [(0, 1), (2, 3), (3, 4)], [0] * 5)
    cert = tree_depth(G)
    assert cert.value == 2
    assert cert.root is None
    assert len(cert.children) == 2
    assert replay(cert, G)


def test_replay_rejects_tampered_certificates(star3):
    cert = tree_depth(star3)
    wrong_value = TdCertificate(cert.value + 1, cert.vertices, cert.root, cert.children)
    assert not replay(wrong_value, star3)
    wrong_root = TdCertificate(cert.value, cert.vertices, 1, cert.children)
    assert not replay(wrong_root, star3)
    partial = TdCertificate(1, frozenset({0}), 0, [])
    assert not replay(partial, star3)


def test_certificate_rendering(star3):
    cert = tree_depth(star3)
    assert str(cert).splitlines()[0] == "v0 (td=2)"
    assert cert.to_dict()["root"] == 0


def test_tree_depth_budget(monkeypatch):
    monkeypatch.setattr(BUDGET, "TD_VERTICES", 4)
    with pytest.raises(BudgetExceededError):
        tree_depth(gen_family("path", 5))


def test_shrink_triangle():
    K3 = gen_family("complete", 3)
    shrunk = shrink(K3, 0)
    assert shrunk == make_graph(2, [(0, 1)], [1, 1])


def test_shrink_marks_neighbors(p4):
    shrunk = shrink(p4, 1)
    assert shrunk.colors == (1, 1, 0)
    assert shrunk.sorted_edges() == [(1, 2)]
    with pytest.raises(GraphError):
        shrink(p4, 4)


def test_graphs_up_to():
    assert len(graphs_up_to(3)) == 1 + 2 + 4
    assert len(graphs_up_to(4, td_max=1)) == 4
    assert [G.n for G in graphs_up_to(2)] == [1, 2, 2]
    with pytest.raises(ConfigurationError):
        graphs_up_to(8)


def test_low_tree_depth_is_identified():
    candidates = graphs_up_to(5, td_max=2)
    report = identifies_within(0, 3, candidates)
    assert report.identified
    assert report.pairs_checked > 0
    assert report.to_dict()["conflicts"] == []


def test_too_few_variables_leave_conflicts():
    report = identifies_within(1, 0, graphs_up_to(4))
    assert not report.identified
    i, j = report.conflicts[0]
    assert report.graphs[i].n == report.graphs[j].n


@pytest.mark.slow
def test_identification_on_seven_vertices():
    candidates = graphs_up_to(7, td_max=2)
    assert identifies_within(0, 3, candidates).identified
