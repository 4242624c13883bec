# services/experiments.py
"""
實驗套件
職責：以固定 seed 執行可重現的驗證實驗，每個套件產出一張 pandas DataFrame

套件:
- hierarchy-separations: B²、K3、P9 上的 CR 勝方與 CFI 配對的 OWL 判定
- iteration-bound: (k1,k2)-OWL 穩定回合數 ≤ (k2+1)n^k1 − 1
- treedepth-identification: tree-depth ≤ d 的小圖在 (0,d+1) 與 (1,d−1) 下被識別
- stream-vs-naive: 兩種引擎判定一致，以及 faithful 模式的 cells 峰值與比值遞減
- cfi-parity: X̃_S ≅ X̃_T iff |S| ≡ |T| (mod 2)
- degree-sequences: BP_(0,2) / BP_(1,1) 與 degree 序列的對應
- characterization: BP 勝方、r 回合 refinement、隨機公式三者一致
- wl-owl: k-WL 與 (k+1)-OWL 的區分判定一致
"""
import random
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.constants import ENGINE, EXPERIMENT
from services.cfi import BaseGraph, build_cfi, cfi_pair, twist_parity_equal
from services.errors import ConfigurationError
from services.games import Winner, bp_solve, bp_table, cr_solve
from services.graphs import (
    ColoredGraph,
    PartialAssignment,
    degree_sequence,
    gen_family,
    iso_oracle,
    make_graph,
    neighborhood_degree_sequence,
    permuted,
    random_graph,
    random_permutation,
)
from services.logger import logger
from services.logic import evaluate, format_formula, random_formula
from services.streamwl import stream_equivalent
from services.treedepth import graphs_up_to, identifies_within
from services.wl import RefinementResult, equivalent_naive, owl_distinguishes, owl_restricted, wl_distinguishes


@dataclass
class ExperimentSpec:
    """實驗規格：名稱、參數、引擎、seed、輸出路徑"""
    name: str
    params: Dict = field(default_factory=dict)
    engine: str = ENGINE.DEFAULT_ENGINE
    seed: int = ENGINE.DEFAULT_SEED
    output: Optional[str] = None

    def param(self, key: str, default):
        return self.params.get(key, default)


@dataclass
class ExperimentResult:
    """
    實驗結果：表格、巢狀產物（JSON 用）、是否全部一致

    artifacts["checks"] 放整體性的判定（例如比值遞減），同樣計入 passed
    """
    spec: ExperimentSpec
    frame: pd.DataFrame
    artifacts: Dict = field(default_factory=dict)

    @property
    def checks(self) -> Dict[str, bool]:
        return self.artifacts.get("checks", {})

    @property
    def passed(self) -> bool:
        if not all(self.checks.values()):
            return False
        if "agree" not in self.frame.columns or self.frame.empty:
            return True
        return bool(self.frame["agree"].all())

    def summary(self) -> Dict:
        return {
            "name": self.spec.name,
            "engine": self.spec.engine,
            "seed": self.spec.seed,
            "rows": int(len(self.frame)),
            "checks": dict(self.checks),
            "passed": self.passed,
        }


def _equivalent(engine: str, G: ColoredGraph, H: ColoredGraph, k1: int, k2: int, mode: Optional[str] = None) -> Tuple[bool, Optional[int]]:
    """空 configuration 的等價判定；回傳 (verdict, stream 峰值 cells)"""
    alpha = PartialAssignment.empty(k1, k2)
    if engine == "stream":
        verdict, meter = stream_equivalent(G, alpha, H, alpha, k1, k2, mode or EXPERIMENT.STREAM_MODE)
        return verdict, meter.peak_cells
    if engine != "naive":
        raise ConfigurationError(f"unknown engine {engine!r}")
    return equivalent_naive(G, alpha, H, alpha, k1, k2), None


# ==================== hierarchy-separations ====================

HIERARCHY_CASES: List[Tuple[str, Tuple, int, int, Winner]] = [
    ("B2", ("perfect_binary_tree", 2), 1, 1, Winner.COPS),
    ("B2", ("perfect_binary_tree", 2), 0, 2, Winner.ROBBER),
    ("K3", ("complete", 3), 0, 3, Winner.COPS),
    ("K3", ("complete", 3), 2, 0, Winner.ROBBER),
    ("K3", ("complete", 3), 1, 1, Winner.ROBBER),
    ("K3", ("complete", 3), 0, 2, Winner.ROBBER),
    ("P9", ("path", 9), 2, 0, Winner.COPS),
    ("P9", ("path", 9), 1, 1, Winner.ROBBER),
]


def run_hierarchy_separations(spec: ExperimentSpec) -> ExperimentResult:
    logger.info("=== hierarchy-separations ===")
    rows = []
    pairs: Dict[str, Tuple] = {}
    for name, family, k1, k2, expected in HIERARCHY_CASES:
        base = BaseGraph(gen_family(*family, base_coloring=True))
        if name not in pairs:
            pairs[name] = cfi_pair(base)
        X, X_twisted = pairs[name]
        winner = cr_solve(base, k1, k2)
        equivalent, _ = _equivalent(spec.engine, X.graph, X_twisted.graph, k1, k2)
        rows.append({
            "instance": name,
            "k1": k1,
            "k2": k2,
            "cr_winner": winner.value,
            "expected_winner": expected.value,
            "cfi_vertices": X.graph.n,
            "owl_equivalent": equivalent,
            "agree": winner == expected and equivalent == (winner == Winner.ROBBER),
        })
        logger.info(f"{name} ({k1},{k2}): {winner.value}, equivalent={equivalent}")
    return ExperimentResult(spec, pd.DataFrame(rows))


# ==================== iteration-bound ====================

def _random_graphs(count: int, max_n: int, seed: int) -> List[ColoredGraph]:
    rng = random.Random(seed)
    graphs = []
    for i in range(count):
        n = rng.randint(1, max_n)
        p = rng.choice([0.2, 0.4, 0.6, 0.8])
        colors = rng.randint(1, 2)
        graphs.append(random_graph(n, p, seed=rng.randrange(2**31), num_colors=colors))
    return graphs


def run_iteration_bound(spec: ExperimentSpec) -> ExperimentResult:
    count = spec.param("graphs", EXPERIMENT.ITERATION_GRAPHS)
    max_n = spec.param("max_n", EXPERIMENT.ITERATION_MAX_N)
    params = spec.param("params", EXPERIMENT.ITERATION_PARAMS)
    logger.info(f"=== iteration-bound: {count} graphs, n <= {max_n} ===")

    rows = []
    for index, G in enumerate(_random_graphs(count, max_n, spec.seed)):
        for k1, k2 in params:
            result = owl_restricted(G, None, k1, k2)
            bound = (k2 + 1) * G.n ** k1 - 1
            rows.append({
                "graph": index,
                "n": G.n,
                "m": len(G.edges),
                "k1": k1,
                "k2": k2,
                "rounds": result.rounds,
                "bound": bound,
                "agree": result.rounds <= bound,
            })
    return ExperimentResult(spec, pd.DataFrame(rows))


# ==================== treedepth-identification ====================

def run_treedepth_identification(spec: ExperimentSpec) -> ExperimentResult:
    settings = spec.param("settings", EXPERIMENT.TD_SETTINGS)
    logger.info(f"=== treedepth-identification: {settings} ===")
    rows = []
    conflicts = []
    for d, n_max in settings:
        candidates = graphs_up_to(n_max, d)
        levels = [(0, d + 1)] + ([(1, d - 1)] if d >= 2 else [])
        for k1, k2 in levels:
            report = identifies_within(k1, k2, candidates)
            rows.append({
                "d": d,
                "n_max": n_max,
                "k1": k1,
                "k2": k2,
                "candidates": report.candidates,
                "pairs_checked": report.pairs_checked,
                "iso_checks": report.iso_checks,
                "conflicts": len(report.conflicts),
                "agree": report.identified,
            })
            if report.conflicts:
                conflicts.append({"d": d, **report.to_dict()})
    return ExperimentResult(spec, pd.DataFrame(rows), {"conflicts": conflicts})


# ==================== stream-vs-naive ====================

def _parameter_grid(max_k: int) -> List[Tuple[int, int]]:
    return [(k1, k - k1) for k in range(1, max_k + 1) for k1 in range(k + 1)]


def _toggle_edge(G: ColoredGraph, rng: random.Random) -> ColoredGraph:
    if G.n < 2:
        return G
    u, v = sorted(rng.sample(range(G.n), 2))
    edges = set(G.edges) ^ {(u, v)}
    return make_graph(G.n, edges, G.colors)


def run_stream_vs_naive(spec: ExperimentSpec) -> ExperimentResult:
    pairs = spec.param("pairs", EXPERIMENT.STREAM_PAIRS)
    max_n = spec.param("max_n", EXPERIMENT.STREAM_MAX_N)
    max_k = spec.param("max_k", EXPERIMENT.STREAM_MAX_K)
    mode = spec.param("mode", EXPERIMENT.STREAM_MODE)
    logger.info(f"=== stream-vs-naive: {pairs} pairs, n <= {max_n}, k1+k2 <= {max_k}, mode={mode} ===")

    rng = random.Random(spec.seed)
    grid = _parameter_grid(max_k)
    rows = []
    for index in range(pairs):
        k1, k2 = rng.choice(grid)
        n = rng.randint(1, max_n)
        G = random_graph(n, rng.choice([0.3, 0.5, 0.7]), seed=rng.randrange(2**31), num_colors=rng.randint(1, 2))
        H = permuted(G, random_permutation(n, rng.randrange(2**31)))
        if rng.random() < 0.5:
            H = _toggle_edge(H, rng)
        naive, _ = _equivalent("naive", G, H, k1, k2)
        stream, peak = _equivalent("stream", G, H, k1, k2, mode)
        rows.append({
            "kind": "agreement",
            "pair": index,
            "n": n,
            "k1": k1,
            "k2": k2,
            "naive": naive,
            "stream": stream,
            "peak_cells": peak,
            "naive_cells": 2 * (n + 1) ** (k1 + k2),
            "agree": naive == stream,
        })

    # cells 峰值與 n 的關係：預設 (1,2)、faithful 模式；峰值含快取
    space_mode = spec.param("space_mode", EXPERIMENT.STREAM_SPACE_MODE)
    sk1, sk2 = spec.param("space_params", EXPERIMENT.STREAM_SPACE_PARAMS)
    space_ns = spec.param("space_ns", EXPERIMENT.STREAM_SPACE_NS)
    logger.info(f"space rows: ({sk1},{sk2}), n in {list(space_ns)}, mode={space_mode}")
    empty = PartialAssignment.empty(sk1, sk2)
    for n in space_ns:
        G = gen_family("path", n)
        H = random_graph(n, 0.5, seed=spec.seed + n)
        stream, meter = stream_equivalent(G, empty, H, empty, sk1, sk2, space_mode)
        budget = 4 * (sk2 + 1) * (n + 1) ** sk1
        rows.append({
            "kind": "space",
            "pair": -1,
            "n": n,
            "k1": sk1,
            "k2": sk2,
            "naive": None,
            "stream": stream,
            "peak_cells": meter.peak_cells,
            "working_peak_cells": meter.working_peak_cells,
            "cached_cells": meter.cached_cells,
            "naive_cells": 2 * (n + 1) ** (sk1 + sk2),
            "budget": budget,
            "agree": meter.peak_cells <= budget,
        })
    frame = pd.DataFrame(rows)
    space = frame[frame["kind"] == "space"]
    ratios = (space["peak_cells"] / space["naive_cells"]).tolist()
    decreasing = all(a > b for a, b in zip(ratios, ratios[1:]))
    return ExperimentResult(spec, frame, {
        "space_mode": space_mode,
        "space_ratios": ratios,
        "checks": {"ratio_decreasing": decreasing},
    })


# ==================== cfi-parity ====================

def _parity_bases() -> Dict[str, BaseGraph]:
    return {
        "K3": BaseGraph(gen_family("complete", 3, base_coloring=True)),
        "K4": BaseGraph(gen_family("complete", 4, base_coloring=True)),
        "P4": BaseGraph(gen_family("path", 4, base_coloring=True)),
        "G2x3": BaseGraph(gen_family("grid", 2, 3, base_coloring=True)),
    }


def run_cfi_parity(spec: ExperimentSpec) -> ExperimentResult:
    max_size = spec.param("max_twist", 2)
    bases = spec.param("bases", None) or _parity_bases()
    logger.info(f"=== cfi-parity: {', '.join(bases)} ===")
    rows = []
    for name, base in bases.items():
        edges = base.edges()
        twist_sets = [s for size in range(max_size + 1) for s in combinations(edges, size)]
        built = {s: build_cfi(base, s).graph for s in twist_sets}
        for S, T in combinations_with_replacement(twist_sets, 2):
            isomorphic = iso_oracle(built[S], built[T]) is not None
            parity = twist_parity_equal(S, T)
            rows.append({
                "base": name,
                "S": str([list(e) for e in S]),
                "T": str([list(e) for e in T]),
                "parity_equal": parity,
                "isomorphic": isomorphic,
                "agree": parity == isomorphic,
            })
    return ExperimentResult(spec, pd.DataFrame(rows))


# ==================== degree-sequences ====================

def run_degree_sequences(spec: ExperimentSpec) -> ExperimentResult:
    max_n = spec.param("max_n", EXPERIMENT.DEGSEQ_MAX_N)
    logger.info(f"=== degree-sequences: all graphs n <= {max_n} ===")
    graphs = graphs_up_to(max_n)
    by_order: Dict[int, List[int]] = {}
    for i, G in enumerate(graphs):
        by_order.setdefault(G.n, []).append(i)

    rows = []
    for n, members in sorted(by_order.items()):
        for i, j in combinations_with_replacement(members, 2):
            G, H = graphs[i], graphs[j]
            bp02 = bp_solve(G, H, 0, 2) == Winner.DUPLICATOR
            bp11 = bp_solve(G, H, 1, 1) == Winner.DUPLICATOR
            degrees = degree_sequence(G) == degree_sequence(H)
            neighborhoods = neighborhood_degree_sequence(G) == neighborhood_degree_sequence(H)
            rows.append({
                "n": n,
                "i": i,
                "j": j,
                "bp02": bp02,
                "degree_equal": degrees,
                "bp11": bp11,
                "neighborhood_equal": neighborhoods,
                "agree": bp02 == degrees and bp11 == neighborhoods,
            })
    return ExperimentResult(spec, pd.DataFrame(rows))


# ==================== characterization ====================

def _colorings(graphs: List[ColoredGraph], num_colors: int) -> List[ColoredGraph]:
    """每張單色圖的所有 num_colors 著色（不去除顏色置換的重複）"""
    return [
        make_graph(G.n, G.edges, colors)
        for G in graphs
        for colors in product(range(num_colors), repeat=G.n)
    ]


def refinement_relation(result: RefinementResult, r: int, nG: int, nH: int) -> np.ndarray:
    """
    第 r 回合「α 與 β 顏色相同」的關係，排成 BP 局面編碼

    每個位置的編碼：0 = ⊥，否則 1 + v·|H| + w；shape 與 bp_table 的勝集合相同
    """
    table = result.table_at(r)
    left = np.concatenate([[nG], np.repeat(np.arange(nG), nH)])
    right = np.concatenate([[nH], np.tile(np.arange(nH), nG)])
    colors_G = table.tensor(0)[np.ix_(*([left] * table.k))]
    colors_H = table.tensor(1)[np.ix_(*([right] * table.k))]
    return colors_G == colors_H


def _random_configuration(rng: random.Random, G: ColoredGraph, H: ColoredGraph, k1: int, k2: int):
    """隨機非空 configuration 與它的局面編碼"""
    k = k1 + k2
    alpha, beta = [None] * k, [None] * k
    for p in rng.sample(range(k), rng.randint(1, k)):
        alpha[p] = rng.randrange(G.n)
        beta[p] = rng.randrange(H.n)
    digits = tuple(0 if v is None else 1 + v * H.n + w for v, w in zip(alpha, beta))
    return PartialAssignment(k1, k2, tuple(alpha)), PartialAssignment(k1, k2, tuple(beta)), digits


def _formula_disagreements(
    G: ColoredGraph,
    alpha: PartialAssignment,
    H: ColoredGraph,
    beta: PartialAssignment,
    r: int,
    count: int,
    colors: Sequence[int],
    rng: random.Random,
) -> Tuple[int, int]:
    """
    隨機 C^(k1,k2)_r 公式在 (G, α) 與 (H, β) 上的求值差異

    自由變數：x 只能是 dom 的子集，y 恰好是 dom 內的 y

    Returns:
        (檢查的公式數, 求值不同的公式數)
    """
    free = tuple(alpha.as_mapping())
    if r == 0 and not free:
        return 0, 0
    n = max(G.n, H.n)
    differ = 0
    for _ in range(count):
        phi = random_formula(alpha.k1, alpha.k2, r, n, free=free, colors=colors, rng=rng)
        if evaluate(G, alpha, phi) != evaluate(H, beta, phi):
            differ += 1
            logger.warning(f"formula {format_formula(phi)} separates an equivalent configuration")
    return count, differ


def run_characterization(spec: ExperimentSpec) -> ExperimentResult:
    """
    BP 勝方、r 回合 refinement、隨機公式三者一致

    配對：≤ max_n 頂點的所有著色圖兩兩配對，加上 random_n 頂點的隨機配對
    （一半是同構複本，一半再切換一條邊）。每個 (k1,k2,r) 比較所有 configuration
    的 Duplicator 勝集合與顏色相等關係；等價的空 configuration 與一個隨機
    configuration 再以隨機公式檢查。
    """
    max_n = spec.param("max_n", EXPERIMENT.CHAR_MAX_N)
    num_colors = spec.param("colors", EXPERIMENT.CHAR_COLORS)
    random_pairs = spec.param("random_pairs", EXPERIMENT.CHAR_RANDOM_PAIRS)
    random_n = spec.param("random_n", EXPERIMENT.CHAR_RANDOM_N)
    max_rounds = spec.param("max_rounds", EXPERIMENT.CHAR_MAX_ROUNDS)
    formulas = spec.param("formulas", EXPERIMENT.CHAR_FORMULAS)
    params = spec.param("params", _parameter_grid(2))
    logger.info(
        f"=== characterization: colored n <= {max_n} + {random_pairs} random pairs (n={random_n}), "
        f"r <= {max_rounds} ==="
    )

    rng = random.Random(spec.seed)
    pairs = spec.param("pairs", None)
    if pairs is None:
        pool = _colorings(graphs_up_to(max_n), num_colors)
        pairs = list(combinations_with_replacement(pool, 2))
        for _ in range(random_pairs):
            G = random_graph(random_n, rng.choice([0.3, 0.5, 0.7]), seed=rng.randrange(2**31), num_colors=num_colors)
            H = permuted(G, random_permutation(random_n, rng.randrange(2**31)))
            if rng.random() < 0.5:
                H = _toggle_edge(H, rng)
            pairs.append((G, H))

    colors = tuple(range(num_colors))
    rows = []
    for index, (G, H) in enumerate(pairs):
        for k1, k2 in params:
            game = bp_table(G, H, k1, k2, max_rounds)
            refinement = owl_restricted(G, H, k1, k2, max_rounds, keep_history=True)
            empty = PartialAssignment.empty(k1, k2)
            for r in range(max_rounds + 1):
                same = refinement_relation(refinement, r, G.n, H.n)
                mismatches = int(np.count_nonzero(game.at(r) != same))
                empty_equal = bool(same[(0,) * (k1 + k2)])
                checked = differ = 0
                if empty_equal:
                    checked, differ = _formula_disagreements(G, empty, H, empty, r, formulas, colors, rng)
                alpha, beta, digits = _random_configuration(rng, G, H, k1, k2)
                if same[digits]:
                    more, worse = _formula_disagreements(G, alpha, H, beta, r, formulas, colors, rng)
                    checked, differ = checked + more, differ + worse
                rows.append({
                    "pair": index,
                    "nG": G.n,
                    "nH": H.n,
                    "k1": k1,
                    "k2": k2,
                    "r": r,
                    "configurations": int(same.size),
                    "mismatches": mismatches,
                    "equivalent": empty_equal,
                    "formulas": checked,
                    "formula_disagreements": differ,
                    "agree": mismatches == 0 and differ == 0,
                })
        if index and index % 1000 == 0:
            logger.info(f"characterization: {index}/{len(pairs)} pairs")
    return ExperimentResult(spec, pd.DataFrame(rows))


# ==================== wl-owl ====================

def run_wl_owl(spec: ExperimentSpec) -> ExperimentResult:
    """k-WL 與 (k+1)-OWL 的區分判定一致（≤ max_n 頂點的所有圖兩兩配對）"""
    max_n = spec.param("max_n", EXPERIMENT.WLOWL_MAX_N)
    dims = spec.param("dims", EXPERIMENT.WLOWL_DIMS)
    logger.info(f"=== wl-owl: all graphs n <= {max_n}, k in {list(dims)} ===")
    graphs = graphs_up_to(max_n)
    rows = []
    for i, j in combinations_with_replacement(range(len(graphs)), 2):
        G, H = graphs[i], graphs[j]
        for k in dims:
            wl = wl_distinguishes(G, H, k)
            owl = owl_distinguishes(G, H, k + 1)
            rows.append({
                "i": i,
                "j": j,
                "nG": G.n,
                "nH": H.n,
                "k": k,
                "wl_distinguishes": wl,
                "owl_distinguishes": owl,
                "agree": wl == owl,
            })
    return ExperimentResult(spec, pd.DataFrame(rows))


SUITES: Dict[str, Callable[[ExperimentSpec], ExperimentResult]] = {
    "hierarchy-separations": run_hierarchy_separations,
    "iteration-bound": run_iteration_bound,
    "treedepth-identification": run_treedepth_identification,
    "stream-vs-naive": run_stream_vs_naive,
    "cfi-parity": run_cfi_parity,
    "degree-sequences": run_degree_sequences,
    "characterization": run_characterization,
    "wl-owl": run_wl_owl,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """
    執行一個實驗套件

    Raises:
        ConfigurationError: 未知的套件或引擎
    """
    if spec.name not in SUITES:
        raise ConfigurationError(f"unknown experiment {spec.name!r}; choose from {', '.join(SUITES)}")
    if spec.engine not in ENGINE.ENGINES:
        raise ConfigurationError(f"unknown engine {spec.engine!r}")
    result = SUITES[spec.name](spec)
    status = "✅ all rows agree" if result.passed else "❌ discrepancies found"
    logger.info(f"{spec.name}: {len(result.frame)} rows, {status}")
    return result
