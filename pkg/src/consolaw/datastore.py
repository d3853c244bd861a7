"""Load, persist, and curate triplet datasets and pipeline records.

Everything is JSONL with UTF-8 preserved verbatim (guillemets and accents
survive round trips byte-exactly). Triplet lines carry
{id, instruction, input, response?}; record lines add the backend, prediction,
gate, review status, references, and error fields.
"""
from __future__ import annotations

import datetime as dt
import json
import os
from dataclasses import dataclass

from .llm import TableDetector, has_table
from .metrics import normalize
from .model import (
    Backend,
    ConsolidationRecord,
    ConsolidationTriplet,
    GateOutcome,
    LegalReference,
    ReviewStatus,
)


class DatastoreError(Exception):
    pass


class ParseError(DatastoreError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateId(DatastoreError):
    def __init__(self, triplet_id: str):
        super().__init__(f"duplicate id: {triplet_id}")
        self.triplet_id = triplet_id


class MissingResponse(DatastoreError):
    def __init__(self, ids: tuple[str, ...]):
        super().__init__(f"triplets without responses: {', '.join(ids)}")
        self.ids = ids


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of identified triplets plus provenance."""

    entries: tuple[tuple[str, ConsolidationTriplet], ...]
    source_bill: str | None = None
    snapshot_date: dt.date | None = None

    def __post_init__(self) -> None:
        ids = [entry_id for entry_id, _ in self.entries]
        duplicates = {i for i in ids if ids.count(i) > 1}
        if duplicates:
            raise DuplicateId(sorted(duplicates)[0])

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def get(self, triplet_id: str) -> ConsolidationTriplet | None:
        for entry_id, triplet in self.entries:
            if entry_id == triplet_id:
                return triplet
        return None


def load(path: str) -> Dataset:
    entries: list[tuple[str, ConsolidationTriplet]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                triplet = ConsolidationTriplet(
                    instruction=obj["instruction"],
                    input=obj["input"],
                    response=obj.get("response"),
                )
                entry_id = obj["id"]
            except Exception as exc:  # malformed JSON, missing fields, invariants
                raise ParseError(line_no, str(exc)) from exc
            if entry_id in seen:
                raise DuplicateId(entry_id)
            seen.add(entry_id)
            entries.append((entry_id, triplet))
    return Dataset(entries=tuple(entries))


def save(dataset: Dataset, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry_id, triplet in dataset.entries:
            obj: dict = {"id": entry_id, "instruction": triplet.instruction, "input": triplet.input}
            if triplet.response is not None:
                obj["response"] = triplet.response
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class CurationResult:
    dataset: Dataset
    removed_no_modification: tuple[str, ...]
    removed_table: tuple[str, ...]

    @property
    def counts(self) -> dict[str, int]:
        return {
            "no_modification": len(self.removed_no_modification),
            "table": len(self.removed_table),
        }


def curate(dataset: Dataset, *, table_detector: TableDetector = has_table) -> CurationResult:
    """Drop triplets that involve no modification (input equals response after
    normalization) or involve tables; idempotent."""
    missing = tuple(entry_id for entry_id, t in dataset.entries if t.response is None)
    if missing:
        raise MissingResponse(missing)

    kept: list[tuple[str, ConsolidationTriplet]] = []
    removed_no_modification: list[str] = []
    removed_table: list[str] = []
    for entry_id, triplet in dataset.entries:
        if normalize(triplet.input) == normalize(triplet.response or ""):
            removed_no_modification.append(entry_id)
        elif table_detector(triplet.instruction) or table_detector(triplet.input):
            removed_table.append(entry_id)
        else:
            kept.append((entry_id, triplet))

    return CurationResult(
        dataset=Dataset(
            entries=tuple(kept),
            source_bill=dataset.source_bill,
            snapshot_date=dataset.snapshot_date,
        ),
        removed_no_modification=tuple(removed_no_modification),
        removed_table=tuple(removed_table),
    )


# ---------------------------------------------------------------------------
# Record serialization


def reference_to_dict(ref: LegalReference) -> dict:
    return {
        "article_id": ref.article_id,
        "act": ref.act,
        "act_date": ref.act_date.isoformat() if ref.act_date else None,
        "raw_span": list(ref.raw_span),
    }


def reference_from_dict(obj: dict) -> LegalReference:
    return LegalReference(
        article_id=obj["article_id"],
        act=obj.get("act", ""),
        act_date=dt.date.fromisoformat(obj["act_date"]) if obj.get("act_date") else None,
        raw_span=tuple(obj.get("raw_span", (0, 0))),
    )


def record_to_dict(record: ConsolidationRecord) -> dict:
    return {
        "id": record.id,
        "instruction": record.triplet.instruction,
        "input": record.triplet.input,
        "response": record.triplet.response,
        "backend": {"kind": record.backend.kind, "model": record.backend.model},
        "prediction": record.prediction,
        "gate": {"verdict": record.gate.verdict, "token_count": record.gate.token_count},
        "review_status": {
            "state": record.review_status.state,
            "gold_text": record.review_status.gold_text,
        },
        "references": [reference_to_dict(r) for r in record.references],
        "error": record.error,
        "prompt_tokens": record.prompt_tokens,
    }


def record_from_dict(obj: dict) -> ConsolidationRecord:
    return ConsolidationRecord(
        id=obj["id"],
        triplet=ConsolidationTriplet(
            instruction=obj["instruction"], input=obj["input"], response=obj.get("response")
        ),
        backend=Backend(kind=obj["backend"]["kind"], model=obj["backend"].get("model")),
        gate=GateOutcome(
            verdict=obj["gate"]["verdict"], token_count=obj["gate"].get("token_count")
        ),
        prediction=obj.get("prediction"),
        review_status=ReviewStatus(
            state=obj["review_status"]["state"], gold_text=obj["review_status"].get("gold_text")
        ),
        references=tuple(reference_from_dict(r) for r in obj.get("references", ())),
        error=obj.get("error"),
        prompt_tokens=obj.get("prompt_tokens"),
    )


def save_records(records: list[ConsolidationRecord], path: str) -> None:
    """Single-writer record store; written atomically so readers never see a
    half-flushed file."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False, sort_keys=True) + "\n")
    os.replace(tmp, path)


def load_records(path: str) -> list[ConsolidationRecord]:
    records: list[ConsolidationRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = record_from_dict(json.loads(line))
            except Exception as exc:
                raise ParseError(line_no, str(exc)) from exc
            if record.id in seen:
                raise DuplicateId(record.id)
            seen.add(record.id)
            records.append(record)
    return records
