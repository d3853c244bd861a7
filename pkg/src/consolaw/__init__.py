"""Legislative consolidation toolkit.

Splits bills into simple modification sections, resolves the law articles they
target, applies the modifications (deterministic amendment interpreter,
span-edit baseline, or an external text-generation backend), and evaluates
predictions with word-error and correctness metrics, including the
human-verification review loop.
"""

from .model import (
    Backend,
    Bill,
    BillArticle,
    ConsolidationRecord,
    ConsolidationTriplet,
    GateOutcome,
    InvariantViolation,
    LawArticle,
    LegalReference,
    ReviewStatus,
)

__all__ = [
    "Backend",
    "Bill",
    "BillArticle",
    "ConsolidationRecord",
    "ConsolidationTriplet",
    "GateOutcome",
    "InvariantViolation",
    "LawArticle",
    "LegalReference",
    "ReviewStatus",
]

__version__ = "0.1.0"
