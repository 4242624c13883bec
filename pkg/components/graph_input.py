# components/graph_input.py
"""
圖輸入元件：族群產生器、CFI 配對、隨機圖、JSON 上傳
"""
from typing import Optional

import streamlit as st

from repository import loads_graph
from services.cfi import as_base, cfi_pair
from services.errors import EngineError
from services.graphs import FAMILIES, ColoredGraph, gen_family, random_graph

SOURCES = ["族群", "CFI X(B)", "CFI X̃(B)", "隨機 G(n,p)", "JSON"]

_FAMILY_PARAMS = {
    "grid": ["h", "l"],
    "bridged_grid": ["h", "l"],
    "tree_of_grids": ["d", "h", "l"],
    "perfect_binary_tree": ["d"],
    "complete": ["n"],
    "star": ["n"],
    "path": ["n"],
    "cycle": ["n"],
}


def _family_input(key: str, base_coloring: bool) -> ColoredGraph:
    family = st.selectbox("族群", FAMILIES, key=f"{key}_family")
    cols = st.columns(len(_FAMILY_PARAMS[family]))
    params = []
    for col, name in zip(cols, _FAMILY_PARAMS[family]):
        with col:
            params.append(int(st.number_input(name, min_value=0, value=2 if name != "n" else 4, key=f"{key}_{family}_{name}")))
    return gen_family(family, *params, base_coloring=base_coloring)


def graph_picker(key: str, label: str) -> Optional[ColoredGraph]:
    """
    選擇或產生一張圖；輸入有誤時顯示錯誤並回傳 None

    Args:
        key: widget key 前綴
        label: 顯示名稱
    """
    st.markdown(f"**{label}**")
    source = st.radio("來源", SOURCES, key=f"{key}_source", horizontal=True)
    try:
        if source == "族群":
            return _family_input(key, st.checkbox("base coloring", key=f"{key}_bc"))
        if source in ("CFI X(B)", "CFI X̃(B)"):
            base = as_base(_family_input(key, True))
            plain, twisted = cfi_pair(base)
            return (plain if source == "CFI X(B)" else twisted).graph
        if source == "隨機 G(n,p)":
            n = int(st.number_input("n", min_value=1, max_value=12, value=5, key=f"{key}_n"))
            p = st.slider("p", 0.0, 1.0, 0.5, key=f"{key}_p")
            seed = int(st.number_input("seed", min_value=0, value=0, key=f"{key}_seed"))
            return random_graph(n, p, seed=seed)
        uploaded = st.file_uploader("JSON 圖", type=["json"], key=f"{key}_upload")
        if uploaded is None:
            return None
        return loads_graph(uploaded.getvalue().decode("utf-8"))
    except EngineError as e:
        st.error(f"❌ {e}")
        return None
