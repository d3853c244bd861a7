"""Seeded random generators for synthetic articles, operations, and bills.

Everything takes an explicit random.Random so tests stay reproducible. The
vocabulary is plain lowercase multi-letter words: no guillemets, no dots, no
single letters, so generated text can never collide with enumeration markers
or drafting formulas.
"""
from __future__ import annotations

import random

from consolaw.amendments import (
    AbrogateArticle,
    AmendmentOp,
    AppendText,
    DeleteParagraph,
    DeleteSentence,
    DeleteWords,
    InsertAfterWords,
    ReplaceParagraph,
    ReplaceSentence,
    ReplaceWords,
    Scope,
    WHOLE_ARTICLE,
    apply,
    render_amendment,
    sentence_spans,
)
from consolaw.model import ConsolidationTriplet

VOCABULARY = [
    "order", "general", "meeting", "appointment", "courthouse", "provision",
    "director", "department", "estate", "operations", "minister", "decree",
    "register", "council", "member", "session", "budget", "report", "notice",
    "mandate", "office", "service", "duty", "charge", "present", "annual",
    "public", "formal", "national", "regional", "special", "common", "civil",
]


def rand_word(rng: random.Random) -> str:
    return rng.choice(VOCABULARY)


def rand_sentence(rng: random.Random, n_words: int | None = None) -> str:
    n = n_words or rng.randint(3, 8)
    words = [rand_word(rng) for _ in range(n)]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def rand_paragraph(rng: random.Random, n_sentences: int | None = None) -> str:
    n = n_sentences or rng.randint(1, 3)
    return " ".join(rand_sentence(rng) for _ in range(n))


def rand_article_text(rng: random.Random, n_paragraphs: int | None = None) -> str:
    n = n_paragraphs or rng.randint(1, 4)
    return "\n".join(rand_paragraph(rng) for _ in range(n))


def _pick_span(rng: random.Random, region: str, max_words: int = 3) -> str | None:
    """A contiguous word span from one paragraph of the region."""
    paragraphs = [p for p in region.split("\n") if p.strip()]
    if not paragraphs:
        return None
    tokens = rng.choice(paragraphs).split()
    if not tokens:
        return None
    width = rng.randint(1, min(max_words, len(tokens)))
    start = rng.randint(0, len(tokens) - width)
    return " ".join(tokens[start : start + width])


def _rand_scope(rng: random.Random, text: str) -> Scope:
    roll = rng.random()
    paragraphs = text.split("\n")
    if roll < 0.6 or not text:
        return WHOLE_ARTICLE
    if roll < 0.85:
        return Scope.paragraph(rng.randint(1, len(paragraphs)))
    spans = sentence_spans(text)
    if not spans:
        return WHOLE_ARTICLE
    return Scope.sentence(rng.randint(1, len(spans)))


def _scope_region(text: str, scope: Scope) -> str:
    if scope.kind == "article":
        return text
    if scope.kind == "paragraph":
        return text.split("\n")[(scope.ordinal or 1) - 1]
    spans = sentence_spans(text)
    start, end = spans[(scope.ordinal or 1) - 1]
    return text[start:end]


def rand_op(rng: random.Random, text: str, allow_abrogate: bool = False) -> AmendmentOp | None:
    """One operation valid against ``text``, or None when the draw does not fit."""
    kinds = [
        "replace_words", "replace_words", "delete_words", "delete_sentence",
        "delete_paragraph", "replace_paragraph", "replace_sentence",
        "append_words", "append_paragraph", "insert_after",
    ]
    if allow_abrogate:
        kinds.append("abrogate")
    kind = rng.choice(kinds)
    paragraphs = text.split("\n")

    if kind == "abrogate":
        return AbrogateArticle()
    if kind == "replace_words":
        scope = _rand_scope(rng, text)
        old = _pick_span(rng, _scope_region(text, scope))
        if old is None:
            return None
        return ReplaceWords(old=old, new=" ".join(rand_word(rng) for _ in range(rng.randint(1, 3))), scope=scope)
    if kind == "delete_words":
        scope = _rand_scope(rng, text)
        target = _pick_span(rng, _scope_region(text, scope), max_words=2)
        if target is None:
            return None
        return DeleteWords(target=target, scope=scope)
    if kind == "delete_sentence":
        use_paragraph = rng.random() < 0.4
        if use_paragraph:
            p = rng.randint(1, len(paragraphs))
            count = len(sentence_spans(paragraphs[p - 1]))
            if count == 0:
                return None
            return DeleteSentence(ordinal=rng.randint(1, count), scope=Scope.paragraph(p))
        count = len(sentence_spans(text))
        if count == 0:
            return None
        return DeleteSentence(ordinal=rng.randint(1, count))
    if kind == "delete_paragraph":
        return DeleteParagraph(ordinal=rng.randint(1, len(paragraphs)))
    if kind == "replace_paragraph":
        return ReplaceParagraph(ordinal=rng.randint(1, len(paragraphs)), new_text=rand_paragraph(rng))
    if kind == "replace_sentence":
        count = len(sentence_spans(text))
        if count == 0:
            return None
        return ReplaceSentence(ordinal=rng.randint(1, count), new_text=rand_sentence(rng))
    if kind == "append_words":
        scope = _rand_scope(rng, text)
        if scope.kind == "article":
            scope = Scope.paragraph(rng.randint(1, len(paragraphs)))
        return AppendText(new_text=" ".join(rand_word(rng) for _ in range(rng.randint(1, 3))), scope=scope)
    if kind == "append_paragraph":
        return AppendText(new_text=rand_paragraph(rng), scope=WHOLE_ARTICLE)
    if kind == "insert_after":
        scope = _rand_scope(rng, text)
        anchor = _pick_span(rng, _scope_region(text, scope), max_words=2)
        if anchor is None:
            return None
        return InsertAfterWords(
            anchor=anchor,
            new_text=" ".join(rand_word(rng) for _ in range(rng.randint(1, 2))),
            scope=scope,
        )
    return None


def rand_ops(rng: random.Random, article: str, n_ops: int) -> tuple[list[AmendmentOp], str]:
    """Sequential operations, each valid against the evolving text, plus the
    final gold text produced by applying them forward."""
    ops: list[AmendmentOp] = []
    current = article
    attempts = 0
    while len(ops) < n_ops and attempts < 200:
        attempts += 1
        is_last = len(ops) == n_ops - 1
        op = rand_op(rng, current, allow_abrogate=is_last and rng.random() < 0.05)
        if op is None:
            continue
        try:
            produced = apply(current, [op])
        except Exception:
            continue
        if not produced and not isinstance(op, AbrogateArticle):
            continue  # keep the chain applicable
        ops.append(op)
        current = produced
        if isinstance(op, AbrogateArticle):
            break
    return ops, current


def rand_triplet(
    rng: random.Random, *, n_ops: int | None = None, language: str | None = None
) -> tuple[ConsolidationTriplet, list[AmendmentOp], str]:
    """A synthetic (instruction, input, response) triplet with its operations."""
    article = rand_article_text(rng)
    count = n_ops or rng.randint(1, 3)
    ops, gold = rand_ops(rng, article, count)
    while not ops:
        article = rand_article_text(rng)
        ops, gold = rand_ops(rng, article, count)
    lang = language or rng.choice(["en", "fr"])
    instruction = render_amendment(ops, article_label="10", language=lang)
    triplet = ConsolidationTriplet(instruction=instruction, input=article, response=gold)
    return triplet, ops, lang


def unique_replace_triplet(rng: random.Random) -> ConsolidationTriplet:
    """A single ReplaceWords triplet whose old text occurs exactly once, so the
    edit is one contiguous region (the span baseline's home turf)."""
    while True:
        article = rand_article_text(rng)
        old = _pick_span(rng, article, max_words=4)
        if old is None or article.count(old) != 1:
            continue
        op = ReplaceWords(old=old, new=" ".join(rand_word(rng) for _ in range(rng.randint(1, 3))))
        gold = apply(article, [op])
        instruction = render_amendment([op], language=rng.choice(["en", "fr"]))
        return ConsolidationTriplet(instruction=instruction, input=article, response=gold)


# ---------------------------------------------------------------------------
# Hierarchical articles for the splitter

_ROMAN = ["I", "II", "III", "IV", "V"]


def rand_hierarchical_article(rng: random.Random) -> tuple[str, int]:
    """Marker-structured article text plus its expected leaf count."""
    lines = [rand_sentence(rng) + " as follows:"]
    leaves = 0

    def item_text() -> str:
        return rand_sentence(rng)

    def letters(count: int, indent: str = "") -> None:
        nonlocal leaves
        for i in range(count):
            lines.append(f"{indent}{chr(ord('a') + i)}) {item_text()}")
            leaves += 1

    def arabics(count: int) -> None:
        nonlocal leaves
        for i in range(1, count + 1):
            lines.append(f"{i}° {item_text()}")
            if rng.random() < 0.3:
                letters(rng.randint(1, 3), indent="  " if rng.random() < 0.5 else "")
            else:
                leaves += 1

    if rng.random() < 0.5:
        for i in range(rng.randint(1, 3)):
            lines.append(f"{_ROMAN[i]}. – {item_text()}")
            if rng.random() < 0.6:
                arabics(rng.randint(1, 3))
            else:
                leaves += 1
    else:
        arabics(rng.randint(1, 4))

    if leaves == 0:
        leaves = 1  # degenerate: the preamble-only article is its own leaf
        return lines[0], leaves
    return "\n".join(lines), leaves


# ---------------------------------------------------------------------------
# Bills and corpora for pipeline runs

BILL_ACT = "Order of 4 May 2007"


def rand_bill_with_corpus(rng: random.Random, n_articles: int = 10):
    """A synthetic bill whose articles amend a matching corpus.

    Returns (bill_dict, corpus_entries, gold_by_record) where gold_by_record
    maps the rule backend's record ids to the text each chained modification
    should produce.
    """
    corpus_entries = []
    bill_articles = []
    gold: dict[str, str] = {}
    bill_id = "bill-demo"

    for k in range(1, n_articles + 1):
        law_text = rand_article_text(rng, rng.randint(2, 4))
        corpus_entries.append(
            {
                "act": BILL_ACT,
                "article_id": str(k),
                "paragraphs": law_text.split("\n"),
            }
        )
        ops, _final = rand_ops(rng, law_text, rng.randint(1, 3))
        while not ops:
            ops, _final = rand_ops(rng, law_text, 1)
        label = f"{k} of the {BILL_ACT}"
        text = render_amendment(ops, article_label=label, language="en", force_enumeration=True)
        bill_articles.append({"number": str(k), "text": text})

        current = law_text
        for idx, op in enumerate(ops, start=1):
            current = apply(current, [op])
            gold[f"{bill_id}:a{k}:m{idx}:rule"] = current

    bill = {"id": bill_id, "title": "Synthetic finance bill", "articles": bill_articles}
    return bill, corpus_entries, gold
