"""Annotation workflows: task routing, vote aggregation, datasets, budget."""

from .budget import PRESET_RATES, BudgetPlan, budget_plan, preset_plan
from .service import (
    AgreementStats,
    AnnotationRecord,
    AnnotationService,
    Batch,
    Dataset,
    GoldResult,
    Task,
    Worker,
    agreement_stats,
    gold_from_votes,
    split,
)

__all__ = [
    "AgreementStats",
    "AnnotationRecord",
    "AnnotationService",
    "Batch",
    "BudgetPlan",
    "Dataset",
    "GoldResult",
    "PRESET_RATES",
    "Task",
    "Worker",
    "agreement_stats",
    "budget_plan",
    "gold_from_votes",
    "preset_plan",
    "split",
]
