# services/errors.py
"""
錯誤類別
職責：統一的例外階層，CLI 依類別決定 exit code（1 = 領域錯誤，3 = 超出預算）
"""
from typing import Optional


class EngineError(Exception):
    """所有領域錯誤的基礎類別（CLI exit code 1）"""


class GraphError(EngineError):
    """圖形建構或 base graph 驗證失敗"""


class FormulaError(EngineError):
    """公式語法錯誤、未知變數、未賦值的自由變數"""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (position {position})"
        super().__init__(message)


class ConfigurationError(EngineError):
    """參數不合法，或 configuration 兩側 domain 不一致"""


class BudgetExceededError(EngineError):
    """超出設定的資源預算（CLI exit code 3）"""

    def __init__(self, budget: str, limit: int, requested: int):
        self.budget = budget
        self.limit = limit
        self.requested = requested
        super().__init__(f"{budget} budget exceeded: requested {requested}, limit {limit}")


def check_budget(budget: str, limit: int, requested: int) -> None:
    """超過預算時丟出 BudgetExceededError"""
    if requested > limit:
        raise BudgetExceededError(budget, limit, requested)
