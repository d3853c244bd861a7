"""HTTP review service backing the human-verification loop.

Two queues over pending records: reference verification (records without a
prediction, where the reviewer checks what was targeted and why consolidation
did not happen) and consolidation verification (records with predictions).
Approving adopts the prediction as gold; amending stores corrected gold text.
Statistics are recomputed from the live records on every request, so an
amendment is reflected by the very next /stats fetch.

The service is unauthenticated and meant to bind to loopback: reviewers are
internal.
"""
from __future__ import annotations

import difflib
import re
import threading
from dataclasses import replace

from fastapi import Body, FastAPI, HTTPException, Query

from .datastore import load_records, record_to_dict, save_records
from .metrics import (
    consolidation_report,
    correctness_curve,
    curve_to_csv,
    is_correct,
    report_to_dict,
)
from .model import ConsolidationRecord, ReviewStatus

_CURVE_THRESHOLDS = [64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384]


def word_diff(a: str, b: str) -> list[dict]:
    """Word-level diff hunks (equal/delete/insert runs) that reassemble to both
    inputs: tokens are whitespace-separated words plus the whitespace runs
    themselves."""
    tokens_a = [t for t in re.split(r"(\s+)", a) if t]
    tokens_b = [t for t in re.split(r"(\s+)", b) if t]
    hunks: list[dict] = []
    matcher = difflib.SequenceMatcher(None, tokens_a, tokens_b, autojunk=False)
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            hunks.append({"op": "equal", "text": "".join(tokens_a[i1:i2])})
            continue
        if tag in ("replace", "delete") and i2 > i1:
            hunks.append({"op": "delete", "text": "".join(tokens_a[i1:i2])})
        if tag in ("replace", "insert") and j2 > j1:
            hunks.append({"op": "insert", "text": "".join(tokens_b[j1:j2])})
    return hunks


class RecordStore:
    """In-memory view over the records file; the single writer.

    State transitions are serialized under one lock and persisted before the
    lock is released, so concurrent reviewers see a consistent queue.
    """

    def __init__(
        self,
        records: list[ConsolidationRecord],
        path: str | None = None,
        gold: dict[str, str] | None = None,
    ):
        self._order = [r.id for r in records]
        self._records = {r.id: r for r in records}
        self._path = path
        self._gold = gold or {}
        self._lock = threading.Lock()

    @classmethod
    def open(cls, path: str, gold: dict[str, str] | None = None) -> "RecordStore":
        return cls(load_records(path), path=path, gold=gold)

    @property
    def records(self) -> list[ConsolidationRecord]:
        return [self._records[rid] for rid in self._order]

    def _persist(self) -> None:
        if self._path:
            save_records(self.records, self._path)

    def gold_for(self, record: ConsolidationRecord) -> str | None:
        return record.gold_text if record.gold_text is not None else self._gold.get(record.id)

    def list_records(
        self, status: str = "pending", queue: str | None = None, page: int = 1, page_size: int = 20
    ) -> tuple[list[ConsolidationRecord], int]:
        items = self.records
        if status != "all":
            items = [r for r in items if r.review_status.state == status]
        if queue == "references":
            items = [r for r in items if r.prediction is None]
        elif queue == "consolidations":
            items = [r for r in items if r.prediction is not None]
        total = len(items)
        start = (page - 1) * page_size
        return items[start : start + page_size], total

    def get(self, record_id: str) -> ConsolidationRecord:
        record = self._records.get(record_id)
        if record is None:
            raise KeyError(record_id)
        return record

    def _finalize(self, record_id: str, status: ReviewStatus) -> ConsolidationRecord:
        with self._lock:
            record = self.get(record_id)
            if record.review_status.is_final:
                raise _AlreadyFinal(record_id)
            updated = replace(record, review_status=status)
            self._records[record_id] = updated
            self._persist()
            return updated

    def approve(self, record_id: str) -> ConsolidationRecord:
        record = self.get(record_id)
        if record.prediction is None:
            raise _NoPrediction(record_id)
        return self._finalize(record_id, ReviewStatus.approved())

    def amend(self, record_id: str, gold_text: str) -> ConsolidationRecord:
        if not gold_text:
            raise _EmptyGold(record_id)
        return self._finalize(record_id, ReviewStatus.amended(gold_text))

    def stats(self) -> dict:
        records = self.records
        if not records:
            return {
                "possible_rate": None,
                "correctness_rate_among_possible": None,
                "n_records": 0,
                "n_possible": 0,
                "n_correct": 0,
                "per_backend": {},
                "curve": [],
            }
        report = consolidation_report(records, self._gold, on_missing_gold="skip")
        out = report_to_dict(report)
        out["curve"] = [
            {
                "length_threshold": p.length_threshold,
                "correctness_rate": p.correctness_rate,
                "n_samples": p.n_samples,
            }
            for p in self._curve_points()
        ]
        return out

    def _curve_points(self):
        samples = []
        for record in self.records:
            gold = self.gold_for(record)
            if record.prompt_tokens is None or gold is None or not record.gate.is_possible:
                continue
            correct = record.prediction is not None and is_correct(record.prediction, gold)
            samples.append((record.prompt_tokens, correct))
        if not samples:
            return []
        return correctness_curve(samples, _CURVE_THRESHOLDS)

    def curve_csv(self) -> str:
        return curve_to_csv(self._curve_points())


class _AlreadyFinal(Exception):
    pass


class _NoPrediction(Exception):
    pass


class _EmptyGold(Exception):
    pass


def create_app(store: RecordStore) -> FastAPI:
    app = FastAPI(title="consolaw review API")

    @app.get("/records")
    def list_records(
        status: str = Query("pending"),
        queue: str | None = Query(None),
        page: int = Query(1, ge=1),
        page_size: int = Query(20, ge=1, le=200),
    ):
        items, total = store.list_records(status=status, queue=queue, page=page, page_size=page_size)
        return {
            "items": [record_to_dict(r) for r in items],
            "total": total,
            "page": page,
            "page_size": page_size,
        }

    @app.get("/records/{record_id}")
    def get_record(record_id: str):
        try:
            record = store.get(record_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown record {record_id}")
        payload = record_to_dict(record)
        gold = store.gold_for(record)
        payload["gold"] = gold
        payload["diff"] = (
            word_diff(record.prediction, gold)
            if record.prediction is not None and gold is not None
            else None
        )
        return payload

    @app.post("/records/{record_id}/approve")
    def approve(record_id: str):
        try:
            return record_to_dict(store.approve(record_id))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown record {record_id}")
        except _AlreadyFinal:
            raise HTTPException(status_code=409, detail="record already finalized")
        except _NoPrediction:
            raise HTTPException(status_code=400, detail="record has no prediction to adopt")

    @app.post("/records/{record_id}/amend")
    def amend(record_id: str, payload: dict = Body(...)):
        gold_text = payload.get("gold_text", "")
        try:
            return record_to_dict(store.amend(record_id, gold_text))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown record {record_id}")
        except _AlreadyFinal:
            raise HTTPException(status_code=409, detail="record already finalized")
        except _EmptyGold:
            raise HTTPException(status_code=400, detail="gold_text must be non-empty")

    @app.get("/stats")
    def stats():
        return store.stats()

    @app.get("/stats/curve.csv")
    def curve():
        from fastapi.responses import PlainTextResponse

        return PlainTextResponse(store.curve_csv(), media_type="text/csv")

    return app


def serve_review(records_path: str, bind: str = "127.0.0.1:8400", gold: dict[str, str] | None = None) -> None:
    """Run the review service until interrupted."""
    import uvicorn

    store = RecordStore.open(records_path, gold=gold)
    host, _, port = bind.partition(":")
    uvicorn.run(create_app(store), host=host or "127.0.0.1", port=int(port or 8400), log_level="info")
