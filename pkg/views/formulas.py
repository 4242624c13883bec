"""
公式頁：解析、分析、在圖上求值
"""
import logging

import streamlit as st

from components.cards import info_card, section_header, status_badge
from components.graph_input import graph_picker
from services.errors import EngineError, FormulaError
from services.graphs import PartialAssignment
from services.logic import analyze, evaluate, format_formula, parse_formula, parse_legend

logger = logging.getLogger(__name__)

EXAMPLE = "forall x1 (exists>=2 y1 E(x1,y1))"


def render(service=None):
    section_header("公式", "📐")

    text = st.text_area("公式", EXAMPLE, height=80)
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        k1 = int(st.number_input("k1", min_value=0, max_value=9, value=1, key="f_k1"))
    with col2:
        k2 = int(st.number_input("k2", min_value=0, max_value=9, value=1, key="f_k2"))
    with col3:
        r = int(st.number_input("量詞深度上限（0 = 不限）", min_value=0, value=0, key="f_r"))
    with col4:
        legend_text = st.text_input("顏色圖例", "", placeholder="red=0,blue=1")

    try:
        legend = parse_legend(legend_text)
        phi = parse_formula(text, k1, k2, legend)
    except FormulaError as e:
        st.error(f"❌ {e}")
        return

    report = analyze(phi, k1, k2, r or None)
    st.code(format_formula(phi, legend))
    badge = status_badge("∈ C^(k1,k2)" if report.in_logic else "∉ C^(k1,k2)",
                         "success" if report.in_logic else "warning")
    st.markdown(badge, unsafe_allow_html=True)
    info_card(
        "結構",
        f"free = {sorted(report.free)} · bound = {sorted(report.bound)} · "
        f"qr = {report.qr} · requantified = {sorted(report.requantified)}",
        icon="🧩",
    )

    st.markdown("#### 求值")
    G = graph_picker("f_g", "G")
    assignment = {}
    cols = st.columns(max(len(report.free), 1))
    for col, name in zip(cols, sorted(report.free)):
        with col:
            assignment[name] = int(st.number_input(name, min_value=0, value=0, key=f"f_assign_{name}"))
    if G is None or not st.button("🧮 求值"):
        return
    try:
        alpha = PartialAssignment.from_mapping(k1, k2, assignment)
        holds = evaluate(G, alpha, phi)
        st.markdown("G, α ⊨ φ ? " + status_badge(str(holds).lower(), "success" if holds else "error"),
                    unsafe_allow_html=True)
    except EngineError as e:
        logger.error(f"evaluate failed: {e}")
        st.error(f"❌ {e}")
