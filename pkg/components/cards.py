# components/cards.py
"""
UI 元件庫 - explorer 共用的卡片、徽章與表格
"""
from typing import Dict, Optional

import pandas as pd
import streamlit as st

from config.constants import UI

# (背景, 文字 / 邊框)
_TONES = {
    'success': ('#d1e7dd', '#0f5132'),
    'warning': ('#fff3cd', '#664d03'),
    'error': ('#f8d7da', '#842029'),
    'info': ('#cfe2ff', '#084298'),
    'default': ('#e2e3e5', '#383d41'),
}

# 遊戲中「證明等價」的一方
_EQUIVALENCE_SIDE = ("Duplicator", "Robber")


def _tone(name: str):
    return _TONES.get(name, _TONES['default'])


def _panel(body: str, tone: str = "info", centered: bool = False):
    bg, border = _tone(tone)
    align = "text-align: center; padding: 2.5rem 1rem;" if centered else "padding: 0.9rem 1rem;"
    st.markdown(
        f'<div style="background-color: {bg}; border-left: 4px solid {border}; '
        f'border-radius: 6px; margin: 0.6rem 0; {align}">{body}</div>',
        unsafe_allow_html=True,
    )


def section_header(title: str, icon: str = "📌", divider: bool = True):
    """
    區段標題

    Usage:
        section_header("等價判定", "🔍")
    """
    st.markdown(f"### {icon} {title}")
    if divider:
        st.divider()


def metric_card(label: str, value: str, delta: Optional[str] = None,
                icon: str = "📊", color: str = "info"):
    """
    指標卡片（回合數、類別數、峰值 cells）

    Args:
        color: 'info', 'success', 'warning', 'error'
    """
    _, fg = _tone(color)
    note = f'<div style="color: #666; font-size: 0.8rem;">{delta}</div>' if delta else ''
    _panel(
        f'<div style="color: #555; font-size: 0.85rem;">{icon} {label}</div>'
        f'<div style="font-size: 1.6rem; font-weight: 600; color: {fg};">{value}</div>{note}',
        color,
    )


def status_badge(text: str, status: str = "default") -> str:
    bg, fg = _tone(status)
    return (
        f'<span style="background-color: {bg}; color: {fg}; padding: 0.2rem 0.6rem; '
        f'border-radius: 12px; font-size: 0.85rem; display: inline-block;">{text}</span>'
    )


def verdict_badge(equivalent: bool, label: str = ""):
    """等價 / 可區分 的判定徽章"""
    text = "≡ 等價" if equivalent else "≢ 可區分"
    st.markdown(f"{label} {status_badge(text, 'success' if equivalent else 'error')}", unsafe_allow_html=True)


def winner_badge(winner: str):
    status = "success" if winner in _EQUIVALENCE_SIDE else "error"
    st.markdown(f"勝方 {status_badge(winner, status)}", unsafe_allow_html=True)


def info_card(title: str, content: str, icon: str = "ℹ️", type: str = "info"):
    _, fg = _tone(type)
    _panel(f'<div style="font-weight: 600; color: {fg};">{icon} {title}</div>'
           f'<div style="color: #333; line-height: 1.5;">{content}</div>', type)


def graph_card(name: str, summary: Dict):
    """圖摘要：頂點數、邊數、顏色數"""
    content = (
        f"n = {summary['n']} · m = {len(summary['edges'])} · "
        f"顏色 {len(set(summary['colors']))} 種"
    )
    info_card(name, content, icon="🕸️")


def data_table(df: pd.DataFrame, key: str = "table"):
    """資料表格；超過 UI.ITEMS_PER_PAGE 列時分頁"""
    if len(df) > UI.ITEMS_PER_PAGE:
        pages = (len(df) - 1) // UI.ITEMS_PER_PAGE + 1
        page = st.number_input("頁次", min_value=1, max_value=pages, value=1, key=f"{key}_page")
        start = (page - 1) * UI.ITEMS_PER_PAGE
        df = df.iloc[start:start + UI.ITEMS_PER_PAGE]
    st.dataframe(df, use_container_width=True, height=min(400, len(df) * 35 + 38), key=key)


def empty_state(message: str, icon: str = "📭", suggestion: Optional[str] = None):
    hint = f'<div style="font-size: 0.9rem; color: #777;">{suggestion}</div>' if suggestion else ''
    _panel(f'<div style="font-size: 3rem;">{icon}</div>'
           f'<div style="font-size: 1.1rem; font-weight: 500;">{message}</div>{hint}',
           "default", centered=True)


def loading_spinner(text: str = "計算中..."):
    return st.spinner(text)
