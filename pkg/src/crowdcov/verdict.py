from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .semantics import Witness


class Outcome(enum.Enum):
    SAFE = "SAFE"
    COVERABLE = "COVERABLE"
    SAFE_UP_TO = "SAFE-UP-TO"
    INAPPLICABLE = "INAPPLICABLE"
    BUDGET_EXCEEDED = "BUDGET-EXCEEDED"


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class Verdict:
    outcome: Outcome
    witness: Witness | None = None
    stats: dict = field(default_factory=dict)
    bound: int | None = None
    reason: str = ""

    @property
    def coverable(self) -> bool:
        return self.outcome is Outcome.COVERABLE

    @property
    def label(self) -> str:
        if self.outcome is Outcome.SAFE_UP_TO:
            return f"SAFE-UP-TO({self.bound})"
        return self.outcome.value
