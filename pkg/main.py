import importlib
from typing import Optional

import streamlit as st

from config.constants import ENGINE, UI, get_env as env_setting

# ============================================
# 0. Settings
# ============================================


def get_env(var: str, default: Optional[str] = None) -> Optional[str]:
    """環境變數 / .env 優先，其次 st.secrets（Streamlit Cloud）。"""
    value = env_setting(var)
    if value:
        return value
    try:
        return st.secrets.get(var, default)  # type: ignore[union-attr]
    except Exception:
        return default


APP_CONFIG = {
    "title": get_env("APP_TITLE", UI.PAGE_TITLE),
    "version": get_env("APP_VERSION", "v1.0"),
    "stream_mode": get_env("KWL_STREAM_MODE", ENGINE.STREAM_MODE),
}

# 選單標籤 -> views 模組（點選時才 import）
PAGES = {
    "📊 實驗": "dashboard",
    "🔍 等價判定": "equivalence",
    "🎲 遊戲": "games",
    "📐 公式": "formulas",
}

# ============================================
# 1. Page Config - 必須是第一個 Streamlit 命令
# ============================================
st.set_page_config(
    page_title=APP_CONFIG["title"],
    page_icon=UI.PAGE_ICON,
    layout="wide",
    initial_sidebar_state="expanded",
)

# ============================================
# 2. Service
# ============================================

from services.equivalence_service import EquivalenceService  # noqa: E402
from services.errors import EngineError  # noqa: E402


@st.cache_resource
def get_service(stream_mode: str) -> EquivalenceService:
    return EquivalenceService(stream_mode=stream_mode)


# ============================================
# 3. Main Function
# ============================================


def main() -> None:
    try:
        service = get_service(APP_CONFIG["stream_mode"])
    except EngineError as e:
        st.error(f"設定錯誤: {e}")
        st.stop()

    with st.sidebar:
        st.title(f"{UI.PAGE_ICON} {APP_CONFIG['title']}")
        st.caption(f"{APP_CONFIG['version']} · stream={service.stream_mode}")
        menu = st.radio("功能選單", list(PAGES), label_visibility="collapsed")

    try:
        view = importlib.import_module(f"views.{PAGES[menu]}")
        view.render(service)
    except Exception as e:
        st.error(f"載入頁面時發生錯誤: {e}")
        st.exception(e)


if __name__ == "__main__":
    main()
