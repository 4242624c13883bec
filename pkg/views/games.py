"""
遊戲求解頁：bijective pebble game 與 cops and robber
"""
import logging

import streamlit as st

from components.cards import info_card, metric_card, section_header, winner_badge
from components.graph_input import graph_picker
from services.cfi import as_base
from services.equivalence_service import EquivalenceService
from services.errors import EngineError

logger = logging.getLogger(__name__)


def _parameters(key: str):
    col1, col2, col3 = st.columns(3)
    with col1:
        k1 = int(st.number_input("k1", min_value=0, max_value=3, value=1, key=f"{key}_k1"))
    with col2:
        k2 = int(st.number_input("k2", min_value=0, max_value=3, value=1, key=f"{key}_k2"))
    with col3:
        limit = int(st.number_input("回合上限（0 = 不限）", min_value=0, value=0, key=f"{key}_r"))
    return k1, k2, (limit or None)


def render_outcome(outcome):
    winner_badge(outcome.winner.value)
    col1, col2 = st.columns(2)
    with col1:
        metric_card("穩定回合", str(outcome.rounds), "已穩定" if outcome.stable else "截斷", "🔁")
    if outcome.move is not None:
        with col2:
            metric_card("第一步", outcome.move.pebble or "-", None, "♟️")
        st.json(outcome.move.to_dict())


def render_bp(service: EquivalenceService):
    left, right = st.columns(2)
    with left:
        G = graph_picker("bp_g", "G")
    with right:
        H = graph_picker("bp_h", "H")
    k1, k2, r = _parameters("bp")
    if G is None or H is None or not st.button("▶️ 求解 BP", type="primary"):
        return
    try:
        render_outcome(service.play_bp(G, H, k1, k2, r, with_move=True))
    except EngineError as e:
        logger.error(f"bp failed: {e}")
        st.error(f"❌ {e}")


def render_cr(service: EquivalenceService):
    info_card("base graph", "頂點依索引重新著色；必須連通", icon="🚓")
    G = graph_picker("cr_b", "B")
    k1, k2, r = _parameters("cr")
    if G is None or not st.button("▶️ 求解 CR", type="primary"):
        return
    try:
        render_outcome(service.play_cr(as_base(G), k1, k2, r, with_move=True))
    except EngineError as e:
        logger.error(f"cr failed: {e}")
        st.error(f"❌ {e}")


def render(service: EquivalenceService):
    section_header("遊戲求解", "🎲")
    tab_bp, tab_cr = st.tabs(["Bijective pebble", "Cops and robber"])
    with tab_bp:
        render_bp(service)
    with tab_cr:
        render_cr(service)
