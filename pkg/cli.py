# cli.py
"""
命令列介面
職責：串接產生器、引擎、遊戲求解與實驗套件

子命令:
    gen FAMILY PARAM...           產生族群圖（JSON 圖格式）
    cfi [BASE] [--twist u-v]      CFI 圖 + 來源 sidecar
    eval FORMULA GRAPH            在 (G, α) 上求值
    analyze FORMULA               free / bound / qr / requantified 與歸屬判定
    wl G H                        聯合 (k1,k2)-OWL（或古典 k-WL / k-OWL）與每回合 CSV
    equiv G H                     C^(k1,k2) 等價判定（naive / stream）
    game bp G H | game cr B       pebble game / cops and robber
    experiment NAME               執行實驗套件並寫出 CSV / JSON 報表

exit code: 0 成功、1 領域錯誤、2 用法錯誤、3 超出預算；"-" 代表 stdin / stdout
"""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from config.constants import BUDGET, ENGINE, get_suite_names, override_budget
from repository import GraphRepository, ReportRepository, frame_to_csv, to_json
from services.cfi import as_base, build_cfi, validate_base
from services.equivalence_service import EquivalenceService
from services.errors import BudgetExceededError, ConfigurationError, EngineError
from services.games import BpConfiguration
from services.graphs import FAMILIES, ColoredGraph, PartialAssignment, gen_family, random_graph
from services.logger import logger
from services.logic import analyze, evaluate, parse_formula, parse_legend

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


# ==================== 參數解析工具 ====================

def _bool(value: bool) -> str:
    return "true" if value else "false"


def parse_assignment(text: Optional[str], k1: int, k2: int) -> PartialAssignment:
    """ "x1=0,y2=3" -> PartialAssignment；空字串為空 assignment"""
    if not text:
        return PartialAssignment.empty(k1, k2)
    mapping = {}
    for item in text.split(","):
        if not item.strip():
            continue
        name, _, vertex = item.partition("=")
        if not vertex.strip().isdigit():
            raise ConfigurationError(f"assignment entry {item!r} is not of the form var=vertex")
        mapping[name.strip()] = int(vertex)
    return PartialAssignment.from_mapping(k1, k2, mapping)


def parse_twist(items: Sequence[str]) -> List[List[int]]:
    """["0-1", "2-3"] -> [[0, 1], [2, 3]]"""
    edges = []
    for item in items:
        parts = item.replace(":", "-").split("-")
        if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
            raise ConfigurationError(f"twist edge {item!r} is not of the form u-v")
        edges.append([int(parts[0]), int(parts[1])])
    return edges


def _read_formula(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read formula file {path}: {e}") from e


def _family_graph(family: str, params: Sequence[str], base_coloring: bool, seed: int) -> ColoredGraph:
    if family == "random":
        if len(params) != 2:
            raise ConfigurationError("random takes 2 parameters: n p")
        return random_graph(int(params[0]), float(params[1]), seed=seed)
    try:
        values = [int(p) for p in params]
    except ValueError as e:
        raise ConfigurationError(f"{family} parameters must be integers") from e
    return gen_family(family, *values, base_coloring=base_coloring)


# ==================== 子命令 ====================

def cmd_gen(args, repo: GraphRepository) -> int:
    G = _family_graph(args.family, args.params, args.base_coloring, args.seed)
    repo.save_graph(G, args.out)
    return EXIT_OK


def cmd_cfi(args, repo: GraphRepository) -> int:
    if args.family:
        family, *params = args.family
        G = _family_graph(family, params, True, args.seed)
    else:
        G = repo.load(args.base)
    B = as_base(G) if args.recolor else validate_base(G)
    cfi = build_cfi(B, parse_twist(args.twist))
    repo.save_cfi(cfi, args.out)
    return EXIT_OK


def cmd_eval(args, repo: GraphRepository) -> int:
    legend = parse_legend(args.legend)
    G = repo.load(args.graph)
    phi = parse_formula(_read_formula(args.formula), args.k1, args.k2, legend)
    report = analyze(phi, args.k1, args.k2)
    alpha = parse_assignment(args.assign, report.k1, report.k2)
    print(_bool(evaluate(G, alpha, phi)))
    return EXIT_OK


def cmd_analyze(args, repo: GraphRepository) -> int:
    legend = parse_legend(args.legend)
    phi = parse_formula(_read_formula(args.formula), args.k1, args.k2, legend)
    report = analyze(phi, args.k1, args.k2, args.rounds)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_wl(args, repo: GraphRepository) -> int:
    G, H = repo.load_many([args.g, args.h])
    service = EquivalenceService()
    if args.classic:
        result = service.refine_classic(G, args.classic, H, oblivious=args.oblivious, r=args.rounds)
        print(_bool(not result.distinguishes_histogram()))
        return EXIT_OK

    k1, k2 = args.k1 or 0, args.k2 or 0
    verdict = service.equivalent(G, H, k1, k2, r=args.rounds, engine="naive")
    print(_bool(verdict.equivalent))
    frame = service.round_log(G, H, k1, k2)
    if args.csv:
        ReportRepository(".").save(args.csv, frame_to_csv(frame))
    else:
        sys.stdout.write(frame_to_csv(frame))
    return EXIT_OK


def cmd_equiv(args, repo: GraphRepository) -> int:
    G, H = repo.load_many([args.g, args.h])
    k1, k2 = args.k1 or 0, args.k2 or 0
    service = EquivalenceService(args.engine, args.mode)
    alpha = parse_assignment(args.alpha, k1, k2)
    beta = parse_assignment(args.beta, k1, k2)
    verdict = service.equivalent(G, H, k1, k2, alpha, beta, r=args.rounds)
    print(_bool(verdict.equivalent))
    if args.meter:
        meter = verdict.meter.to_dict() if verdict.meter else None
        print(json.dumps({"meter": meter}, sort_keys=True))
    if args.csv:
        ReportRepository(".").save(args.csv, frame_to_csv(service.round_log(G, H, k1, k2)))
    return EXIT_OK


def cmd_game(args, repo: GraphRepository) -> int:
    service = EquivalenceService()
    k1, k2 = args.k1 or 0, args.k2 or 0
    if args.game == "bp":
        G, H = repo.load_many([args.g, args.h])
        init = BpConfiguration(parse_assignment(args.alpha, k1, k2), parse_assignment(args.beta, k1, k2))
        outcome = service.play_bp(G, H, k1, k2, args.rounds, init, with_move=args.move)
    else:
        G = repo.load(args.base)
        B = as_base(G) if args.recolor else validate_base(G)
        outcome = service.play_cr(B, k1, k2, args.rounds, with_move=args.move)
    print(outcome.winner.value)
    if args.move:
        print(json.dumps(outcome.move.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_experiment(args, repo: GraphRepository) -> int:
    service = EquivalenceService(args.engine)
    params = {"mode": args.mode} if args.mode else {}
    result = service.run_suite(args.name, args.seed, params)
    out = Path(args.out) if args.out else Path("reports") / args.name
    if str(out) == "-":
        sys.stdout.write(frame_to_csv(result.frame))
    else:
        reports = ReportRepository(out.parent)
        artifacts = {**result.summary(), **result.artifacts}
        reports.save_report(out.name, result.frame, artifacts)
        sys.stdout.write(to_json(result.summary()))
    return EXIT_OK if result.passed else EXIT_DOMAIN


COMMANDS = {
    "gen": cmd_gen,
    "cfi": cmd_cfi,
    "eval": cmd_eval,
    "analyze": cmd_analyze,
    "wl": cmd_wl,
    "equiv": cmd_equiv,
    "game": cmd_game,
    "experiment": cmd_experiment,
}


# ==================== parser ====================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k1", type=int, default=None, help="可重用變數 x 的數量")
    common.add_argument("--k2", type=int, default=None, help="不可重用變數 y 的數量")
    common.add_argument("--rounds", type=int, default=None, help="回合 / 量詞深度上限")
    common.add_argument("--seed", type=int, default=ENGINE.DEFAULT_SEED)
    common.add_argument("--budget", type=int, default=None, help="覆蓋 domain 與遊戲狀態預算")
    common.add_argument("--out", default=None, help="輸出路徑（預設 stdout）")

    parser = argparse.ArgumentParser(prog="kwl", description="C^(k1,k2) equivalence engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="產生族群圖")
    p.add_argument("family", choices=list(FAMILIES) + ["random"])
    p.add_argument("params", nargs="*")
    p.add_argument("--base-coloring", action="store_true", help="每個頂點獨立顏色")

    p = sub.add_parser("cfi", parents=[common], help="CFI 圖與來源 sidecar")
    p.add_argument("base", nargs="?", default="-")
    p.add_argument("--family", nargs="+", default=None, metavar="ARG", help="以族群圖作為 base")
    p.add_argument("--twist", action="append", default=[], help="扭轉的 base 邊 u-v，可重複")
    p.add_argument("--recolor", action="store_true", help="以頂點索引重新著色")

    p = sub.add_parser("eval", parents=[common], help="求值")
    p.add_argument("formula")
    p.add_argument("graph")
    p.add_argument("--assign", default=None, help="x1=0,y1=2")
    p.add_argument("--legend", default=None)

    p = sub.add_parser("analyze", parents=[common], help="公式分析")
    p.add_argument("formula")
    p.add_argument("--legend", default=None)

    p = sub.add_parser("wl", parents=[common], help="refinement 與每回合 CSV")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("--classic", type=int, default=None, metavar="K", help="古典 k-WL")
    p.add_argument("--oblivious", action="store_true", help="搭配 --classic 使用 k-OWL")
    p.add_argument("--csv", default=None)

    p = sub.add_parser("equiv", parents=[common], help="等價判定")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("--engine", choices=ENGINE.ENGINES, default=ENGINE.DEFAULT_ENGINE)
    p.add_argument("--mode", choices=ENGINE.STREAM_MODES, default=None)
    p.add_argument("--meter", action="store_true", help="輸出 MemoryMeter JSON")
    p.add_argument("--alpha", default=None)
    p.add_argument("--beta", default=None)
    p.add_argument("--csv", default=None)

    p = sub.add_parser("game", help="遊戲求解")
    games = p.add_subparsers(dest="game", required=True)
    bp = games.add_parser("bp", parents=[common])
    bp.add_argument("g")
    bp.add_argument("h")
    bp.add_argument("--alpha", default=None)
    bp.add_argument("--beta", default=None)
    bp.add_argument("--move", action="store_true")
    cr = games.add_parser("cr", parents=[common])
    cr.add_argument("base")
    cr.add_argument("--recolor", action="store_true")
    cr.add_argument("--move", action="store_true")

    p = sub.add_parser("experiment", parents=[common], help="實驗套件")
    p.add_argument("name", choices=get_suite_names())
    p.add_argument("--engine", choices=ENGINE.ENGINES, default=ENGINE.DEFAULT_ENGINE)
    p.add_argument("--mode", choices=ENGINE.STREAM_MODES, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    saved = (BUDGET.DOMAIN_CELLS, BUDGET.GAME_STATES)
    if args.budget is not None:
        override_budget(args.budget)
    repo = GraphRepository(".")
    try:
        return COMMANDS[args.command](args, repo)
    except BudgetExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except EngineError as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    finally:
        BUDGET.DOMAIN_CELLS, BUDGET.GAME_STATES = saved


if __name__ == "__main__":
    sys.exit(main())
