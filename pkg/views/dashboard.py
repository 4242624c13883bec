"""
實驗儀表板
特性:
- 選擇套件與 seed 執行，結果存在 session_state
- 報表表格 + CSV 下載
"""
import logging

import streamlit as st

from components.cards import data_table, empty_state, info_card, loading_spinner, metric_card, section_header
from config.constants import ENGINE, get_suite_names
from repository import frame_to_csv, to_json
from services.equivalence_service import EquivalenceService
from services.errors import EngineError

logger = logging.getLogger(__name__)

SUITE_NOTES = {
    "hierarchy-separations": "B²、K3、P9 上的 CR 勝方，與對應 CFI 配對的 OWL 判定一致",
    "iteration-bound": "(k1,k2)-OWL 穩定回合數不超過 (k2+1)·n^k1 − 1",
    "treedepth-identification": "tree-depth ≤ d 的小圖被 C^(0,d+1) 與 C^(1,d−1) 識別",
    "stream-vs-naive": "兩種引擎判定一致；faithful 模式的峰值 cells（含快取）不超過 4·(k2+1)·(n+1)^k1，與 naive domain 的比值隨 n 遞減",
    "cfi-parity": "X̃_S ≅ X̃_T iff |S| ≡ |T| (mod 2)",
    "degree-sequences": "BP_(0,2) 對應 degree 序列，BP_(1,1) 對應鄰居 degree 序列",
    "characterization": "所有 configuration 上 BP 勝方與 r 回合 refinement 一致，等價者在隨機 C^(k1,k2)_r 公式上求值相同",
    "wl-owl": "k-WL 與 (k+1)-OWL 對 ≤ 5 頂點的所有配對給出相同的區分判定",
}


def render_summary(result):
    frame = result.frame
    col1, col2, col3 = st.columns(3)
    with col1:
        metric_card("列數", str(len(frame)), result.spec.name, "🧾")
    with col2:
        failed = int((~frame["agree"]).sum()) if "agree" in frame.columns else 0
        metric_card("不一致", str(failed), None, "⚠️", "success" if failed == 0 else "error")
    with col3:
        metric_card("引擎", result.spec.engine, f"seed {result.spec.seed}", "⚙️")


def render(service: EquivalenceService):
    section_header("實驗套件", "📊")

    col1, col2, col3 = st.columns([2, 1, 1])
    with col1:
        name = st.selectbox("套件", get_suite_names())
    with col2:
        engine = st.selectbox("引擎", ENGINE.ENGINES)
    with col3:
        seed = int(st.number_input("seed", min_value=0, value=ENGINE.DEFAULT_SEED))
    info_card(name, SUITE_NOTES.get(name, ""), icon="🧪")

    if st.button("▶️ 執行", type="primary"):
        try:
            with loading_spinner(f"執行 {name} ..."):
                result = EquivalenceService(engine, service.stream_mode).run_suite(name, seed)
            st.session_state["experiment_result"] = result
        except EngineError as e:
            logger.error(f"experiment {name} failed: {e}")
            st.error(f"❌ {e}")

    result = st.session_state.get("experiment_result")
    if result is None:
        empty_state("尚未執行任何套件", "🧪", "選擇套件後按下執行")
        return

    render_summary(result)
    data_table(result.frame, key="experiment_table")
    st.download_button(
        "⬇️ 下載 CSV",
        frame_to_csv(result.frame),
        file_name=f"{result.spec.name}.csv",
        mime="text/csv",
    )
    if result.artifacts:
        with st.expander("JSON 產物"):
            st.code(to_json(result.artifacts), language="json")
