"""Rule-based extraction of targeted law articles and corpus resolution.

Deterministic replacement for a learned entity-recognition component. Three
citation families are covered:

* "Article N" (bare, act unresolved),
* "l'article L. 123-4 du code de commerce" (French code citations),
* "Article N of the [above-mentioned] Order of 4 May 2007" and its French
  equivalent (act + date, optionally anaphoric).

Anaphora ("above-mentioned …") are resolved through a per-bill alias table
when possible; otherwise the raw anaphora string is kept as the act so the
pipeline can route the record to human review.
"""
from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass, field

from .model import LawArticle, LegalReference, _require


class ReferenceError(Exception):
    pass


class NotFound(ReferenceError):
    """The reference resolves to nothing in the corpus (corpus gap)."""

    def __init__(self, reference: LegalReference):
        super().__init__(f"no corpus entry for article {reference.article_id!r} of {reference.act!r}")
        self.reference = reference


class EmptyGold(ReferenceError):
    """Success rate is undefined against an empty gold set."""


def normalize_key(value: str) -> str:
    return " ".join(value.casefold().split())


_MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11, "december": 12,
    "janvier": 1, "février": 2, "mars": 3, "avril": 4, "mai": 5, "juin": 6,
    "juillet": 7, "août": 8, "septembre": 9, "octobre": 10, "novembre": 11, "décembre": 12,
}

_MONTH_NAMES = "|".join(_MONTHS)
_DATE = rf"\d{{1,2}}(?:er|st|nd|rd|th)?\s+(?:{_MONTH_NAMES})\s+\d{{4}}"
_ARTICLE_ID = r"(?:[LRD]\.?\s?\d+(?:-\d+)*|\d+(?:er)?(?:\s(?:bis|ter|quater|quinquies))?)"
_ACT_KIND_EN = r"(?:Order|Decree|Act|Law|Ordinance|Regulation)"
_ACT_KIND_FR = r"(?:ordonnance|loi|décret|arrêté)"

_CITATION = re.compile(
    rf"(?P<en_full>[Aa]rticle\s+(?P<en_id>{_ARTICLE_ID})\s+of\s+the\s+"
    rf"(?P<en_ana>above-mentioned\s+)?(?P<en_act>{_ACT_KIND_EN}\s+of\s+(?P<en_date>{_DATE})))"
    rf"|(?P<fr_full>l['’]article\s+(?P<fr_id>{_ARTICLE_ID})\s+de\s+(?:la\s+|l['’])"
    rf"(?P<fr_act>{_ACT_KIND_FR}(?:\s+n°\s*[\d-]+)?\s+du\s+(?P<fr_date>{_DATE}))"
    rf"(?P<fr_ana>\s+(?:susmentionnée?|précitée?))?)"
    rf"|(?P<fr_code>l['’]article\s+(?P<code_id>[LRD]\.?\s?\d+(?:-\d+)*)\s+du\s+"
    rf"(?P<code_act>code(?:\s+(?!est\b|sont\b|ainsi\b|dans\b|a\b|ont\b)[a-zà-ÿ'’]+)+))"
    rf"|(?P<bare>[Aa]rticle\s+(?P<bare_id>{_ARTICLE_ID}))",
    re.IGNORECASE,
)

_DATE_PARTS = re.compile(
    rf"(\d{{1,2}})(?:er|st|nd|rd|th)?\s+({_MONTH_NAMES})\s+(\d{{4}})", re.IGNORECASE
)


def parse_citation_date(text: str) -> dt.date | None:
    m = _DATE_PARTS.search(text)
    if not m:
        return None
    day, month, year = int(m.group(1)), _MONTHS[m.group(2).casefold()], int(m.group(3))
    try:
        return dt.date(year, month, day)
    except ValueError:
        return None


def extract_references(section_text: str, context: dict[str, str] | None = None) -> list[LegalReference]:
    """References in order of appearance; spans never overlap.

    ``context`` maps normalized anaphora ("above-mentioned order of 4 may 2007")
    to canonical act names. An empty result is valid and means "no target
    found"; the pipeline routes those to human review.
    """
    context = context or {}
    refs: list[LegalReference] = []
    for m in _CITATION.finditer(section_text):
        span = m.span()
        if m.group("en_full"):
            article_id = m.group("en_id")
            act = m.group("en_act")
            date = parse_citation_date(m.group("en_date"))
            if m.group("en_ana"):
                anaphora = m.group("en_ana") + act
                act = context.get(normalize_key(anaphora), anaphora)
        elif m.group("fr_full"):
            article_id = m.group("fr_id")
            act = m.group("fr_act")
            date = parse_citation_date(m.group("fr_date"))
            if m.group("fr_ana"):
                anaphora = act + m.group("fr_ana")
                act = context.get(normalize_key(anaphora), anaphora)
        elif m.group("fr_code"):
            article_id = m.group("code_id")
            act = m.group("code_act")
            date = None
        else:
            article_id = m.group("bare_id")
            act = ""
            date = None
        refs.append(
            LegalReference(article_id=article_id, act=act, act_date=date, raw_span=span)
        )
    return refs


@dataclass(frozen=True)
class Corpus:
    """Read-only store of law articles keyed by normalized (act, article_id),
    plus a per-bill alias table for anaphoric act mentions."""

    articles: dict[tuple[str, str], LawArticle] = field(default_factory=dict)
    aliases: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        acts = {act for act, _ in self.articles}
        for anaphora, act in self.aliases.items():
            _require(
                normalize_key(act) in acts,
                f"alias target {act!r} for {anaphora!r} not present in the corpus",
            )

    @classmethod
    def from_articles(cls, articles: list[LawArticle], aliases: dict[str, str] | None = None) -> "Corpus":
        store: dict[tuple[str, str], LawArticle] = {}
        for article in articles:
            key = (normalize_key(article.reference.act), normalize_key(article.reference.article_id))
            _require(key not in store, f"duplicate corpus key {key}")
            store[key] = article
        normalized_aliases = {
            normalize_key(anaphora): act for anaphora, act in (aliases or {}).items()
        }
        return cls(articles=store, aliases=normalized_aliases)

    def __len__(self) -> int:
        return len(self.articles)


def load_corpus(path: str, aliases: dict[str, str] | None = None) -> Corpus:
    """JSONL corpus: one {act, article_id, date?, paragraphs: [...]} per line."""
    articles = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                date = dt.date.fromisoformat(obj["date"]) if obj.get("date") else None
                articles.append(
                    LawArticle(
                        reference=LegalReference(
                            article_id=obj["article_id"], act=obj["act"], act_date=date
                        ),
                        paragraphs=tuple(obj["paragraphs"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ReferenceError(f"bad corpus entry on line {line_no}: {exc}") from exc
    return Corpus.from_articles(articles, aliases)


def resolve(ref: LegalReference, corpus: Corpus) -> LawArticle:
    """The stored article for a reference.

    An act-less reference resolves only when its article id is unambiguous
    across the corpus; anything else raises NotFound (distinct from extraction
    failure: it signals a corpus gap).
    """
    act = normalize_key(ref.act)
    act = corpus.aliases.get(act, act)
    article_id = normalize_key(ref.article_id)
    if act:
        hit = corpus.articles.get((normalize_key(act), article_id))
        if hit is not None:
            return hit
        raise NotFound(ref)
    candidates = [
        article for (_, aid), article in corpus.articles.items() if aid == article_id
    ]
    if len(candidates) == 1:
        return candidates[0]
    raise NotFound(ref)


def _match_key(ref: LegalReference) -> tuple[str, str]:
    return (normalize_key(ref.act), normalize_key(ref.article_id))


def extraction_success_rate(predicted: list[LegalReference], gold: list[LegalReference]) -> float:
    """Fraction of gold references matched by a prediction with the same
    normalized (act, article_id); each prediction matches at most one gold
    item. Order-invariant in both arguments."""
    if not gold:
        raise EmptyGold("success rate needs a non-empty gold set")
    pred_counts: dict[tuple[str, str], int] = {}
    for ref in predicted:
        key = _match_key(ref)
        pred_counts[key] = pred_counts.get(key, 0) + 1
    gold_counts: dict[tuple[str, str], int] = {}
    for ref in gold:
        key = _match_key(ref)
        gold_counts[key] = gold_counts.get(key, 0) + 1
    # Matching on equality decomposes into per-key complete bipartite blocks,
    # where the maximum matching is just min(count, count).
    matched = sum(min(count, pred_counts.get(key, 0)) for key, count in gold_counts.items())
    return matched / len(gold)
