"""
等價判定頁
特性:
- 兩張圖（族群 / CFI / 隨機 / JSON）
- naive 或 stream 引擎，顯示每回合類別數與 MemoryMeter
"""
import logging

import pandas as pd
import streamlit as st

from components.cards import data_table, graph_card, metric_card, section_header, verdict_badge
from components.graph_input import graph_picker
from config.constants import ENGINE
from services.equivalence_service import EquivalenceService
from services.errors import EngineError

logger = logging.getLogger(__name__)


def render_meter(meter):
    cols = st.columns(5)
    data = meter.to_dict()
    for col, (label, key, icon) in zip(cols, [
        ("峰值 cells（含快取）", "peak_cells", "🧠"),
        ("工作表峰值", "working_peak_cells", "📐"),
        ("遞迴深度", "peak_depth", "🪜"),
        ("oracle 呼叫", "oracle_calls", "📞"),
        ("建表次數", "tables_built", "🧮"),
    ]):
        with col:
            metric_card(label, f"{data[key]:,}", None, icon)


def render(service: EquivalenceService):
    section_header("C^(k1,k2) 等價判定", "🔍")

    left, right = st.columns(2)
    with left:
        G = graph_picker("eq_g", "G")
    with right:
        H = graph_picker("eq_h", "H")
    if G is None or H is None:
        return

    with left:
        graph_card("G", G.to_dict())
    with right:
        graph_card("H", H.to_dict())

    col1, col2, col3, col4 = st.columns(4)
    with col1:
        k1 = int(st.number_input("k1", min_value=0, max_value=3, value=1))
    with col2:
        k2 = int(st.number_input("k2", min_value=0, max_value=3, value=1))
    with col3:
        engine = st.selectbox("引擎", ENGINE.ENGINES)
    with col4:
        mode = st.selectbox("stream 模式", ENGINE.STREAM_MODES, index=ENGINE.STREAM_MODES.index(service.stream_mode))

    if not st.button("⚖️ 判定", type="primary"):
        return
    try:
        runner = EquivalenceService(engine, mode)
        verdict = runner.equivalent(G, H, k1, k2)
        log = runner.round_log(G, H, k1, k2)
    except EngineError as e:
        logger.error(f"equivalence failed: {e}")
        st.error(f"❌ {e}")
        return

    verdict_badge(verdict.equivalent, f"G ≡_C^({k1},{k2}) H ?")
    if verdict.meter is not None:
        render_meter(verdict.meter)
        naive_cells = 2 * (max(G.n, H.n) + 1) ** (k1 + k2)
        st.caption(f"naive domain：{naive_cells:,} cells")
    st.markdown("#### 每回合類別數")
    data_table(pd.DataFrame(log), key="round_log")
