"""Full consolidation run: split bill articles, resolve targets, gate, apply
backends, and persist records for the review loop.

Granularity: records are tracked per simple modification, but consolidation is
chained per target article - each modification applies to the output of the
previous one, so the last record of a chain carries the article's final text.
Any failure aborts the remainder of its chain (fail-closed; no partial text),
while other articles keep processing.
"""
from __future__ import annotations

import datetime as dt
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import requests

from . import amendments, llm, spanedit
from .datastore import save_records
from .model import (
    Backend,
    Bill,
    BillArticle,
    ConsolidationRecord,
    ConsolidationTriplet,
    GateOutcome,
    LawArticle,
    LegalReference,
    ReviewStatus,
)
from .references import NotFound, extract_references, load_corpus, normalize_key, resolve
from .splitter import (
    DEFAULT_HIERARCHY,
    HierarchyConfig,
    MalformedHierarchy,
    MarkerPattern,
    flatten_simple_modifications,
    split_article,
)

logger = logging.getLogger(__name__)


class PipelineConfigError(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    corpus_path: str
    bill_path: str
    backends: tuple[str, ...]
    output_dir: str
    hierarchy: HierarchyConfig = DEFAULT_HIERARCHY
    templates: tuple[amendments.Template, ...] = amendments.DEFAULT_TEMPLATES
    llm_config: llm.BackendConfig | None = None
    aliases: dict[str, str] = field(default_factory=dict)
    gold: dict[str, str] = field(default_factory=dict)
    span_labels_path: str | None = None
    review_bind: str = "127.0.0.1:8400"
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.backends:
            raise PipelineConfigError("select at least one backend")
        for backend in self.backends:
            if backend not in ("rule", "span", "llm"):
                raise PipelineConfigError(f"unknown backend {backend!r}")
        if "llm" in self.backends and self.llm_config is None:
            raise PipelineConfigError("the llm backend requires an [llm] config section")


def _resolve_path(base_dir: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def load_config(path: str, *, output_override: str | None = None, backends_override: tuple[str, ...] | None = None) -> PipelineConfig:
    """Parse the TOML config file; relative paths are taken relative to it."""
    import tomli

    with open(path, "rb") as fh:
        data = tomli.load(fh)
    base_dir = os.path.dirname(os.path.abspath(path))
    section = data.get("pipeline", {})

    def required(key: str) -> str:
        if key not in section:
            raise PipelineConfigError(f"[pipeline] section is missing {key!r}")
        return section[key]

    corpus_path = _resolve_path(base_dir, required("corpus"))
    bill_path = _resolve_path(base_dir, required("bill"))
    for p in (corpus_path, bill_path):
        if not os.path.exists(p):
            raise PipelineConfigError(f"path not resolvable: {p}")

    aliases: dict[str, str] = {}
    if section.get("aliases"):
        aliases_path = _resolve_path(base_dir, section["aliases"])
        with open(aliases_path, encoding="utf-8") as fh:
            aliases = json.load(fh)

    gold: dict[str, str] = {}
    if section.get("gold"):
        gold_path = _resolve_path(base_dir, section["gold"])
        with open(gold_path, encoding="utf-8") as fh:
            gold = json.load(fh)

    hierarchy = DEFAULT_HIERARCHY
    if data.get("hierarchy", {}).get("patterns"):
        hierarchy = HierarchyConfig(
            level_patterns=tuple(
                MarkerPattern(regex=regex, rank=rank) for regex, rank in data["hierarchy"]["patterns"]
            )
        )

    templates = amendments.DEFAULT_TEMPLATES
    if section.get("templates"):
        templates = amendments.load_templates(_resolve_path(base_dir, section["templates"]))

    llm_config = None
    if "llm" in data:
        llm_section = data["llm"]
        llm_config = llm.BackendConfig(
            endpoint=llm_section["endpoint"],
            model=llm_section["model"],
            max_prompt_tokens=llm_section.get("max_prompt_tokens", 1024),
            max_completion_tokens=llm_section.get("max_completion_tokens", 1024),
            timeout_seconds=llm_section.get("timeout_seconds", 30.0),
            max_retries=llm_section.get("max_retries", 3),
            concurrency=llm_section.get("concurrency", 1),
            api_key_env=llm_section.get("api_key_env", "CONSOLAW_API_KEY"),
        )

    backends = backends_override or tuple(section.get("backends", ("rule",)))
    if backends == ("all",) or "all" in backends:
        backends = ("rule", "span", "llm") if llm_config else ("rule", "span")

    return PipelineConfig(
        corpus_path=corpus_path,
        bill_path=bill_path,
        backends=backends,
        output_dir=output_override or _resolve_path(base_dir, section.get("output", "out")),
        hierarchy=hierarchy,
        templates=templates,
        llm_config=llm_config,
        aliases=aliases,
        gold=gold,
        span_labels_path=(
            _resolve_path(base_dir, section["span_labels"]) if section.get("span_labels") else None
        ),
        review_bind=data.get("review", {}).get("bind", "127.0.0.1:8400"),
        workers=section.get("workers", 1),
    )


def load_bill(path: str) -> Bill:
    """Bill file: JSON {id, title, snapshot_date?, articles: [{number, text}]}."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    return Bill(
        id=obj["id"],
        title=obj.get("title", obj["id"]),
        articles=tuple(BillArticle(number=a["number"], text=a["text"]) for a in obj["articles"]),
        snapshot_date=dt.date.fromisoformat(obj["snapshot_date"]) if obj.get("snapshot_date") else None,
    )


@dataclass
class _Modification:
    record_base: str
    article_number: str
    index: int
    path: list[str]
    text: str
    references: tuple[LegalReference, ...]
    target: LawArticle | None = None
    failure: str | None = None


@dataclass
class BackendSummary:
    records: int = 0
    possible: int = 0
    excluded_table: int = 0
    excluded_length: int = 0
    consolidated: int = 0
    errored: int = 0


@dataclass
class RunSummary:
    articles: int = 0
    split_errors: list[dict] = field(default_factory=list)
    simple_modifications: int = 0
    resolved: int = 0
    unresolved: int = 0
    law_articles_targeted: int = 0
    per_backend: dict[str, BackendSummary] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "articles": self.articles,
            "split_errors": self.split_errors,
            "simple_modifications": self.simple_modifications,
            "resolved": self.resolved,
            "unresolved": self.unresolved,
            "law_articles_targeted": self.law_articles_targeted,
            "per_backend": {
                label: {
                    "records": s.records,
                    "possible": s.possible,
                    "excluded_table": s.excluded_table,
                    "excluded_length": s.excluded_length,
                    "consolidated": s.consolidated,
                    "errored": s.errored,
                }
                for label, s in sorted(self.per_backend.items())
            },
        }

    def format_text(self) -> str:
        lines = [
            f"bill articles:          {self.articles}",
            f"split errors:           {len(self.split_errors)}",
            f"simple modifications:   {self.simple_modifications}",
            f"resolved targets:       {self.resolved}",
            f"unresolved targets:     {self.unresolved}",
            f"law articles targeted:  {self.law_articles_targeted}",
        ]
        for label, s in sorted(self.per_backend.items()):
            lines.append(
                f"[{label}] records={s.records} possible={s.possible} "
                f"excluded_table={s.excluded_table} excluded_length={s.excluded_length} "
                f"consolidated={s.consolidated} errored={s.errored}"
            )
        return "\n".join(lines)


def _make_backend(kind: str, config: PipelineConfig) -> Backend:
    if kind == "llm":
        assert config.llm_config is not None
        return Backend.llm(config.llm_config.model)
    return Backend(kind)


def _gate_budget(kind: str, config: PipelineConfig) -> int | None:
    # Token budgets only constrain the generation backend; the deterministic
    # backends have no context window.
    if kind == "llm" and config.llm_config is not None:
        return config.llm_config.max_prompt_tokens
    return None


class _ChainConsolidator:
    """Applies one backend to one target article's modification chain."""

    def __init__(self, config: PipelineConfig, backend: Backend, span_labels: dict[str, spanedit.SpanLabels]):
        self.config = config
        self.backend = backend
        self.span_labels = span_labels
        self.session = requests.Session() if backend.kind == "llm" else None

    def predict(self, record_id: str, triplet: ConsolidationTriplet, group_size: int) -> str:
        if self.backend.kind == "rule":
            return amendments.consolidate(triplet, self.config.templates)
        if self.backend.kind == "span":
            if group_size > 1:
                raise spanedit.NotSingleEdit("span baseline is restricted to single modifications")
            labels = self.span_labels.get(record_id)
            if labels is None:
                raise spanedit.SpanEditError(f"no span labels provided for record {record_id}")
            return spanedit.reconstruct(triplet.input, triplet.instruction, labels)
        assert self.config.llm_config is not None
        prompt = llm.build_prompt(triplet)
        return llm.consolidate_remote(prompt, self.config.llm_config, session=self.session)

    def consolidate_group(
        self, group: list[tuple[str, _Modification]], initial_text: str
    ) -> tuple[list[ConsolidationRecord], str | None]:
        records: list[ConsolidationRecord] = []
        current = initial_text
        chain_failure: str | None = None
        budget = _gate_budget(self.backend.kind, self.config)

        for record_id, modification in group:
            triplet = ConsolidationTriplet(instruction=modification.text, input=current or initial_text)
            prompt_tokens = llm.count_tokens(llm.PROMPT_LAYOUT.format(instruction=triplet.instruction, input=triplet.input))
            gate = llm.evaluate_gate(prompt_tokens, triplet.instruction, triplet.input, budget)

            prediction: str | None = None
            error: str | None = None
            if chain_failure is not None:
                error = f"aborted: {chain_failure}"
            elif not gate.is_possible:
                chain_failure = "an earlier modification was excluded by the gate"
            else:
                try:
                    prediction = self.predict(record_id, triplet, len(group))
                    current = prediction
                except (
                    amendments.AmendmentError,
                    spanedit.SpanEditError,
                    llm.LlmError,
                ) as exc:
                    error = f"{type(exc).__name__}: {exc}"
                    chain_failure = f"modification {modification.index} failed"

            records.append(
                ConsolidationRecord(
                    id=record_id,
                    triplet=triplet,
                    backend=self.backend,
                    gate=gate,
                    prediction=prediction,
                    review_status=ReviewStatus.pending(),
                    references=modification.references,
                    error=error,
                    prompt_tokens=prompt_tokens,
                )
            )

        final_text = current if chain_failure is None and records and records[-1].prediction is not None else None
        return records, final_text


def run(config: PipelineConfig) -> RunSummary:
    """Execute the pipeline and write records, unresolved items, consolidated
    texts, and the stage summary to the output directory.

    Per-record errors are recorded, never raised; only configuration and corpus
    loading failures abort the run.
    """
    corpus = load_corpus(config.corpus_path, config.aliases)
    bill = load_bill(config.bill_path)
    logger.info("run: bill %s (%d articles), corpus %d articles, backends %s",
                bill.id, len(bill.articles), len(corpus), ",".join(config.backends))
    os.makedirs(config.output_dir, exist_ok=True)

    span_labels: dict[str, spanedit.SpanLabels] = {}
    if config.span_labels_path:
        span_labels = spanedit.load_span_labels(config.span_labels_path)

    summary = RunSummary(articles=len(bill.articles))
    modifications: list[_Modification] = []

    for article in bill.articles:
        try:
            root = split_article(article, config.hierarchy)
        except MalformedHierarchy as exc:
            summary.split_errors.append(
                {"article": article.number, "offset": exc.offset, "snippet": exc.snippet}
            )
            continue
        for index, (path, text) in enumerate(flatten_simple_modifications(root), start=1):
            refs = tuple(extract_references(text, corpus.aliases))
            modification = _Modification(
                record_base=f"{bill.id}:a{article.number}:m{index}",
                article_number=article.number,
                index=index,
                path=path,
                text=text,
                references=refs,
            )
            if not refs:
                modification.failure = "no reference extracted"
            else:
                try:
                    modification.target = resolve(refs[0], corpus)
                except NotFound:
                    modification.failure = "target article not found in corpus"
            modifications.append(modification)

    summary.simple_modifications = len(modifications)
    resolved = [m for m in modifications if m.target is not None]
    unresolved = [m for m in modifications if m.target is None]
    summary.resolved = len(resolved)
    summary.unresolved = len(unresolved)

    with open(os.path.join(config.output_dir, "unresolved.jsonl"), "w", encoding="utf-8") as fh:
        for m in unresolved:
            fh.write(
                json.dumps(
                    {
                        "id": m.record_base,
                        "article": m.article_number,
                        "text": m.text,
                        "references": [
                            {"article_id": r.article_id, "act": r.act} for r in m.references
                        ],
                        "reason": m.failure,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )

    groups: dict[tuple[str, str], list[_Modification]] = {}
    for m in resolved:
        assert m.target is not None
        key = (
            normalize_key(m.target.reference.act),
            normalize_key(m.target.reference.article_id),
        )
        groups.setdefault(key, []).append(m)
    summary.law_articles_targeted = len(groups)

    all_records: list[ConsolidationRecord] = []
    consolidated: list[dict] = []

    for kind in config.backends:
        backend = _make_backend(kind, config)
        consolidator = _ChainConsolidator(config, backend, span_labels)
        backend_summary = BackendSummary()

        def run_group(item: tuple[tuple[str, str], list[_Modification]]):
            key, group = item
            ids = [(f"{m.record_base}:{backend.label}", m) for m in group]
            initial = group[0].target.text  # type: ignore[union-attr]
            records, final_text = consolidator.consolidate_group(ids, initial)
            return key, records, final_text

        workers = (
            config.llm_config.concurrency
            if kind == "llm" and config.llm_config is not None
            else 1
        )
        items = sorted(groups.items())
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run_group, items))
        else:
            results = [run_group(item) for item in items]

        for key, records, final_text in results:
            all_records.extend(records)
            for record in records:
                backend_summary.records += 1
                if record.gate.is_possible:
                    backend_summary.possible += 1
                elif record.gate.verdict == "excluded_table":
                    backend_summary.excluded_table += 1
                else:
                    backend_summary.excluded_length += 1
                if record.prediction is not None:
                    backend_summary.consolidated += 1
                if record.error is not None:
                    backend_summary.errored += 1
            if final_text is not None:
                consolidated.append(
                    {
                        "act": key[0],
                        "article_id": key[1],
                        "backend": backend.label,
                        "text": final_text,
                    }
                )
        summary.per_backend[backend.label] = backend_summary

    all_records.sort(key=lambda r: r.id)
    save_records(all_records, os.path.join(config.output_dir, "records.jsonl"))

    consolidated.sort(key=lambda c: (c["backend"], c["act"], c["article_id"]))
    with open(os.path.join(config.output_dir, "consolidated.jsonl"), "w", encoding="utf-8") as fh:
        for entry in consolidated:
            fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n")

    with open(os.path.join(config.output_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary.to_dict(), fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(config.output_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(summary.format_text() + "\n")

    return summary
