"""Annotation budget arithmetic.

How many examples a budget buys at a given unit cost, plus the named
per-unit pay rates the workflows were costed at: two writing rounds paid
per hypothesis and three labeling rounds paid per labeled pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ArgumentError

PRESET_RATES = {
    "write_round1": 0.4,
    "write_round2": 0.3,
    "label_round1": 0.175,
    "label_round2": 0.15,
    "label_round3": 0.15,
}


@dataclass(frozen=True)
class BudgetPlan:
    total_budget: float
    unit_cost: float
    units_per_example: int
    max_examples: int


def budget_plan(total: float, unit_cost: float, units_per_example: int) -> BudgetPlan:
    """max_examples = floor(total / (unit_cost * units_per_example))."""
    if total <= 0 or unit_cost <= 0 or units_per_example <= 0:
        raise ArgumentError("budget inputs must all be positive")
    max_examples = math.floor(total / (unit_cost * units_per_example))
    return BudgetPlan(
        total_budget=total,
        unit_cost=unit_cost,
        units_per_example=units_per_example,
        max_examples=max_examples,
    )


def preset_plan(total: float, preset: str, units_per_example: int = 1) -> BudgetPlan:
    rate = PRESET_RATES.get(preset)
    if rate is None:
        raise ArgumentError(
            f"unknown preset {preset!r}; choose from {sorted(PRESET_RATES)}"
        )
    return budget_plan(total, rate, units_per_example)
