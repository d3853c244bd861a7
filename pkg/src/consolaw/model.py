"""Shared domain types for bills, law articles, triplets, and pipeline records.

All types are immutable value objects validated at construction time; they are
safe to share between threads. Serialization lives in :mod:`consolaw.datastore`.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

PARAGRAPH_SEPARATOR = "\n"


class InvariantViolation(ValueError):
    """A domain object was constructed with data violating its invariants."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvariantViolation(message)


@dataclass(frozen=True)
class BillArticle:
    """One article of a bill; its text describes modifications to existing law."""

    number: str
    text: str

    def __post_init__(self) -> None:
        _require(bool(self.number), "bill article number must be non-empty")
        _require(bool(self.text), "bill article text must be non-empty")


@dataclass(frozen=True)
class Bill:
    """A snapshot of a bill at a given date (bills grow between readings)."""

    id: str
    title: str
    articles: tuple[BillArticle, ...]
    snapshot_date: dt.date | None = None

    def __post_init__(self) -> None:
        _require(bool(self.id), "bill id must be non-empty")
        _require(len(self.articles) > 0, "bill must contain at least one article")
        numbers = [a.number for a in self.articles]
        _require(len(set(numbers)) == len(numbers), "article numbers must be unique within a bill")


@dataclass(frozen=True)
class LegalReference:
    """A citation of a law article inside a modification section.

    ``act`` may be empty (target act not stated) or an unresolved anaphora such
    as "above-mentioned Order of 4 May 2007" when no alias context was available.
    ``raw_span`` is the character range of the citation in the source text.
    """

    article_id: str
    act: str = ""
    act_date: dt.date | None = None
    raw_span: tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        _require(bool(self.article_id), "article_id must be non-empty")
        start, end = self.raw_span
        _require(0 <= start <= end, "raw_span must be a non-negative ordered range")


@dataclass(frozen=True)
class LawArticle:
    """The current text of a law article, stored as ordered paragraphs."""

    reference: LegalReference
    paragraphs: tuple[str, ...]

    def __post_init__(self) -> None:
        _require(len(self.paragraphs) > 0, "law article must have at least one paragraph")
        for p in self.paragraphs:
            _require(
                PARAGRAPH_SEPARATOR not in p,
                "paragraphs must not contain the paragraph separator",
            )

    @property
    def text(self) -> str:
        """Canonical flat text; splitting on the separator restores paragraphs."""
        return PARAGRAPH_SEPARATOR.join(self.paragraphs)


@dataclass(frozen=True)
class ConsolidationTriplet:
    """The atomic dataset unit: (modification section, existing article, consolidated article).

    ``response`` is absent at inference time.
    """

    instruction: str
    input: str
    response: str | None = None

    def __post_init__(self) -> None:
        _require(bool(self.instruction), "instruction must be non-empty")
        _require(bool(self.input), "input must be non-empty")


VERDICT_POSSIBLE = "possible"
VERDICT_EXCLUDED_TABLE = "excluded_table"
VERDICT_EXCLUDED_LENGTH = "excluded_length"


@dataclass(frozen=True)
class GateOutcome:
    """Whether consolidation can be attempted, and why not when it cannot."""

    verdict: str
    token_count: int | None = None

    def __post_init__(self) -> None:
        _require(
            self.verdict in (VERDICT_POSSIBLE, VERDICT_EXCLUDED_TABLE, VERDICT_EXCLUDED_LENGTH),
            f"unknown gate verdict: {self.verdict!r}",
        )
        if self.verdict == VERDICT_EXCLUDED_LENGTH:
            _require(self.token_count is not None, "excluded_length must carry the measured count")
        else:
            _require(self.token_count is None, "token_count only accompanies excluded_length")

    @classmethod
    def possible(cls) -> "GateOutcome":
        return cls(VERDICT_POSSIBLE)

    @classmethod
    def excluded_table(cls) -> "GateOutcome":
        return cls(VERDICT_EXCLUDED_TABLE)

    @classmethod
    def excluded_length(cls, token_count: int) -> "GateOutcome":
        return cls(VERDICT_EXCLUDED_LENGTH, token_count)

    @property
    def is_possible(self) -> bool:
        return self.verdict == VERDICT_POSSIBLE


BACKEND_RULE = "rule"
BACKEND_SPAN = "span"
BACKEND_LLM = "llm"


@dataclass(frozen=True)
class Backend:
    """Which consolidation backend produced (or will produce) a prediction."""

    kind: str
    model: str | None = None

    def __post_init__(self) -> None:
        _require(self.kind in (BACKEND_RULE, BACKEND_SPAN, BACKEND_LLM), f"unknown backend kind: {self.kind!r}")
        if self.kind == BACKEND_LLM:
            _require(bool(self.model), "llm backend must name its model")
        else:
            _require(self.model is None, "only llm backends carry a model name")

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.model}" if self.model else self.kind

    @classmethod
    def rule(cls) -> "Backend":
        return cls(BACKEND_RULE)

    @classmethod
    def span(cls) -> "Backend":
        return cls(BACKEND_SPAN)

    @classmethod
    def llm(cls, model: str) -> "Backend":
        return cls(BACKEND_LLM, model)


REVIEW_PENDING = "pending"
REVIEW_APPROVED = "approved"
REVIEW_AMENDED = "amended"


@dataclass(frozen=True)
class ReviewStatus:
    """Human verification state. Approving adopts the prediction as gold;
    amending supplies a corrected gold text."""

    state: str = REVIEW_PENDING
    gold_text: str | None = None

    def __post_init__(self) -> None:
        _require(
            self.state in (REVIEW_PENDING, REVIEW_APPROVED, REVIEW_AMENDED),
            f"unknown review state: {self.state!r}",
        )
        if self.state == REVIEW_AMENDED:
            _require(bool(self.gold_text), "amended status must carry a non-empty gold text")
        else:
            _require(self.gold_text is None, "only amended status carries gold text")

    @property
    def is_final(self) -> bool:
        return self.state != REVIEW_PENDING

    @classmethod
    def pending(cls) -> "ReviewStatus":
        return cls(REVIEW_PENDING)

    @classmethod
    def approved(cls) -> "ReviewStatus":
        return cls(REVIEW_APPROVED)

    @classmethod
    def amended(cls, gold_text: str) -> "ReviewStatus":
        return cls(REVIEW_AMENDED, gold_text)


@dataclass(frozen=True)
class ConsolidationRecord:
    """A pipeline result awaiting or holding human verification.

    A prediction is present exactly when the gate allowed consolidation and the
    backend did not error; backend failures are recorded in ``error`` so the
    live pipeline can keep processing the rest of the bill.
    """

    id: str
    triplet: ConsolidationTriplet
    backend: Backend
    gate: GateOutcome
    prediction: str | None = None
    review_status: ReviewStatus = field(default_factory=ReviewStatus.pending)
    references: tuple[LegalReference, ...] = ()
    error: str | None = None
    prompt_tokens: int | None = None

    def __post_init__(self) -> None:
        _require(bool(self.id), "record id must be non-empty")
        should_have_prediction = self.gate.is_possible and self.error is None
        _require(
            (self.prediction is not None) == should_have_prediction,
            "prediction must be present iff the gate is possible and no error was recorded",
        )
        if self.prompt_tokens is not None:
            _require(self.prompt_tokens >= 0, "prompt_tokens must be non-negative")

    @property
    def gold_text(self) -> str | None:
        """Gold from review: amended text, or the prediction once approved."""
        if self.review_status.state == REVIEW_AMENDED:
            return self.review_status.gold_text
        if self.review_status.state == REVIEW_APPROVED:
            return self.prediction
        return None
