# services/equivalence_service.py
"""
等價性服務層
職責：CLI 與 explorer 共用的入口，包裝 refinement、等價判定、遊戲與實驗，
      統一以 log_engine_run 記錄每次執行
"""
from dataclasses import dataclass
from typing import Dict, List, Optional

import pandas as pd

from config.constants import ENGINE
from services.cfi import BaseGraph
from services.errors import ConfigurationError, EngineError
from services.experiments import ExperimentResult, ExperimentSpec, run_experiment
from services.games import (
    BpConfiguration,
    FirstMove,
    Winner,
    bp_first_move,
    bp_table,
    cr_first_move,
    cr_table,
)
from services.graphs import ColoredGraph, PartialAssignment
from services.logger import log_engine_run, logger
from services.streamwl import MemoryMeter, stream_equivalent
from services.wl import RefinementResult, check_configuration, equivalent_naive, owl_classic, owl_restricted, wl_classic


@dataclass
class EquivalenceVerdict:
    """等價判定結果值物件"""
    equivalent: bool
    engine: str
    k1: int
    k2: int
    rounds: Optional[int] = None
    meter: Optional[MemoryMeter] = None

    def to_dict(self) -> Dict:
        data = {
            "equivalent": self.equivalent,
            "engine": self.engine,
            "k1": self.k1,
            "k2": self.k2,
        }
        if self.rounds is not None:
            data["rounds"] = self.rounds
        if self.meter is not None:
            data["meter"] = self.meter.to_dict()
        return data


@dataclass
class GameOutcome:
    """遊戲求解結果值物件"""
    game: str
    winner: Winner
    rounds: int
    stable: bool
    move: Optional[FirstMove] = None

    def to_dict(self) -> Dict:
        data = {
            "game": self.game,
            "winner": self.winner.value,
            "rounds": self.rounds,
            "stable": self.stable,
        }
        if self.move is not None:
            data["first_move"] = self.move.to_dict()
        return data


def _subject(G: ColoredGraph, H: Optional[ColoredGraph], k1: int, k2: int) -> str:
    sides = f"n={G.n}" if H is None else f"n={G.n}|{H.n}"
    return f"{sides} (k1={k1},k2={k2})"


class EquivalenceService:
    """等價性服務（業務邏輯層）"""

    def __init__(self, engine: Optional[str] = None, stream_mode: Optional[str] = None):
        self.engine = engine or ENGINE.DEFAULT_ENGINE
        self.stream_mode = stream_mode or ENGINE.STREAM_MODE
        if self.engine not in ENGINE.ENGINES:
            raise ConfigurationError(f"unknown engine {self.engine!r}; choose from {', '.join(ENGINE.ENGINES)}")
        if self.stream_mode not in ENGINE.STREAM_MODES:
            raise ConfigurationError(f"unknown stream mode {self.stream_mode!r}")

    # ==================== refinement ====================

    def refine(
        self,
        G: ColoredGraph,
        H: Optional[ColoredGraph] = None,
        k1: int = 1,
        k2: int = 0,
        r: Optional[int] = None,
        keep_history: bool = False,
    ) -> RefinementResult:
        """(k1,k2)-OWL；失敗時記錄後重新丟出"""
        subject = _subject(G, H, k1, k2)
        try:
            result = owl_restricted(G, H, k1, k2, r, keep_history)
        except EngineError as e:
            log_engine_run("owl_restricted", subject, False, error=str(e))
            raise
        log_engine_run("owl_restricted", subject, True, rounds=result.rounds)
        return result

    def refine_classic(
        self,
        G: ColoredGraph,
        k: int,
        H: Optional[ColoredGraph] = None,
        oblivious: bool = False,
        r: Optional[int] = None,
    ) -> RefinementResult:
        """古典 k-WL / k-OWL"""
        name = "owl_classic" if oblivious else "wl_classic"
        subject = f"n={G.n}" + ("" if H is None else f"|{H.n}") + f" (k={k})"
        runner = owl_classic if oblivious else wl_classic
        try:
            result = runner(G, k, r=r, H=H)
        except EngineError as e:
            log_engine_run(name, subject, False, error=str(e))
            raise
        log_engine_run(name, subject, True, rounds=result.rounds)
        return result

    def round_log(self, G: ColoredGraph, H: ColoredGraph, k1: int, k2: int) -> pd.DataFrame:
        """
        每回合的類別數與空 assignment 是否已被區分

        Returns:
            DataFrame，欄位 round, classes_G, classes_H, distinguished
        """
        result = self.refine(G, H, k1, k2, keep_history=True)
        rows = []
        for t, table in enumerate(result.history):
            empty = (None,) * table.k
            rows.append({
                "round": t,
                "classes_G": table.block_classes(0),
                "classes_H": table.block_classes(1),
                "distinguished": table.color_of(0, empty) != table.color_of(1, empty),
            })
        return pd.DataFrame(rows, columns=["round", "classes_G", "classes_H", "distinguished"])

    # ==================== 等價判定 ====================

    def equivalent(
        self,
        G: ColoredGraph,
        H: ColoredGraph,
        k1: int,
        k2: int,
        alpha: Optional[PartialAssignment] = None,
        beta: Optional[PartialAssignment] = None,
        r: Optional[int] = None,
        engine: Optional[str] = None,
    ) -> EquivalenceVerdict:
        """
        G, α ≡ H, β（C^(k1,k2)，r 為量詞深度上限）

        Args:
            engine: naive / stream；stream 引擎只支援 r = None

        Raises:
            ConfigurationError: 參數或 configuration 不合法
            BudgetExceededError: 超出 domain 預算
        """
        engine = engine or self.engine
        alpha = alpha or PartialAssignment.empty(k1, k2)
        beta = beta or PartialAssignment.empty(k1, k2)
        subject = _subject(G, H, k1, k2)
        try:
            if engine == "stream":
                if r is not None:
                    raise ConfigurationError("the stream engine decides unbounded-rank equivalence only")
                verdict, meter = stream_equivalent(G, alpha, H, beta, k1, k2, self.stream_mode)
                result = EquivalenceVerdict(verdict, engine, k1, k2, meter=meter)
            elif engine == "naive":
                verdict = equivalent_naive(G, alpha, H, beta, k1, k2, r)
                result = EquivalenceVerdict(verdict, engine, k1, k2, rounds=r)
            else:
                raise ConfigurationError(f"unknown engine {engine!r}")
        except EngineError as e:
            log_engine_run(f"equivalent[{engine}]", subject, False, error=str(e))
            raise
        cells = result.meter.peak_cells if result.meter else None
        log_engine_run(f"equivalent[{engine}]", subject, True, rounds=result.rounds, cells=cells)
        return result

    # ==================== 遊戲 ====================

    def play_bp(
        self,
        G: ColoredGraph,
        H: ColoredGraph,
        k1: int,
        k2: int,
        r: Optional[int] = None,
        init: Optional[BpConfiguration] = None,
        with_move: bool = False,
    ) -> GameOutcome:
        """bijective pebble game 的勝方（可選最佳第一步）"""
        subject = _subject(G, H, k1, k2)
        try:
            c = init or BpConfiguration.empty(k1, k2)
            check_configuration(c.alpha, c.beta, k1, k2)
            c.alpha.validate_for(G)
            c.beta.validate_for(H)
            table = bp_table(G, H, k1, k2, r)
            move = bp_first_move(G, H, k1, k2, r, c) if with_move else None
            winner = Winner.DUPLICATOR if table.duplicator_wins(c, r) else Winner.SPOILER
        except EngineError as e:
            log_engine_run("bp_solve", subject, False, error=str(e))
            raise
        log_engine_run("bp_solve", subject, True, rounds=table.rounds)
        return GameOutcome("bp", winner, table.rounds, table.stable, move)

    def play_cr(
        self,
        B: BaseGraph,
        k1: int,
        k2: int,
        r: Optional[int] = None,
        with_move: bool = False,
    ) -> GameOutcome:
        """cops-and-robber game 的勝方（可選最佳第一步）"""
        subject = _subject(B.graph, None, k1, k2)
        try:
            table = cr_table(B, k1, k2, r)
            winner = Winner.COPS if table.cops_win_start(r) else Winner.ROBBER
            move = cr_first_move(B, k1, k2, r) if with_move else None
        except EngineError as e:
            log_engine_run("cr_solve", subject, False, error=str(e))
            raise
        log_engine_run("cr_solve", subject, True, rounds=table.rounds)
        return GameOutcome("cr", winner, table.rounds, table.stable, move)

    # ==================== 實驗 ====================

    def run_suite(self, name: str, seed: Optional[int] = None, params: Optional[Dict] = None) -> ExperimentResult:
        spec = ExperimentSpec(
            name=name,
            params=params or {},
            engine=self.engine,
            seed=ENGINE.DEFAULT_SEED if seed is None else seed,
        )
        try:
            result = run_experiment(spec)
        except EngineError as e:
            logger.error(f"❌ experiment {name} failed: {e}", exc_info=True)
            raise
        return result

    def run_suites(self, names: List[str], seed: Optional[int] = None) -> Dict[str, ExperimentResult]:
        logger.info(f"=== running {len(names)} suites ===")
        return {name: self.run_suite(name, seed) for name in names}
