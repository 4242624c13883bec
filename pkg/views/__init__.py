# views/__init__.py
"""Views package 匯出"""
from . import dashboard
from . import equivalence
from . import formulas
from . import games

__all__ = [
    'dashboard',
    'equivalence',
    'formulas',
    'games',
]
