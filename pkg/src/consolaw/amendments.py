"""Parse modification sections into typed amendment operations and apply them.

Modification sections follow recurring drafting formulas ("The words « X » are
replaced by the words « Y »", "La seconde phrase est supprimée"). The parser
matches an ordered template table (most specific first, extendable from config)
against enumerated items of a section; the applier executes the resulting
operations strictly in order against the existing article text.

Semantics pinned here because drafting practice leaves them open:

* ReplaceWords/DeleteWords act on ALL occurrences of the quoted text within
  their scope; drafting disambiguates via explicit paragraph/sentence scopes.
* Sentences end at "." "!" "?" followed by whitespace or end of text, with an
  abbreviation allowlist (art., cf., etc., M., Mme); paragraphs are newline
  separated.
* Any error aborts the whole application: no partial consolidation is emitted.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

from .model import ConsolidationTriplet, _require


class AmendmentError(Exception):
    """Base class for parse/apply failures of the rule-based backend."""


class UnrecognizedPattern(AmendmentError):
    """A section item matches no known drafting template."""

    def __init__(self, offset: int, snippet: str):
        super().__init__(f"no template matches at offset {offset}: {snippet!r}")
        self.offset = offset
        self.snippet = snippet


class AnchorNotFound(AmendmentError):
    """Quoted text to replace, delete, or insert after is absent in scope."""

    def __init__(self, op_index: int, anchor: str):
        super().__init__(f"op {op_index}: anchor not found in scope: {anchor!r}")
        self.op_index = op_index
        self.anchor = anchor


class OrdinalOutOfRange(AmendmentError):
    """A sentence/paragraph ordinal exceeds what the scoped text contains."""

    def __init__(self, op_index: int, detail: str = ""):
        super().__init__(f"op {op_index}: ordinal out of range{': ' + detail if detail else ''}")
        self.op_index = op_index


# ---------------------------------------------------------------------------
# Operations


@dataclass(frozen=True)
class Scope:
    """Where an operation applies: the whole article, one paragraph, or one sentence."""

    kind: str = "article"
    ordinal: int | None = None

    def __post_init__(self) -> None:
        _require(self.kind in ("article", "paragraph", "sentence"), f"unknown scope kind {self.kind!r}")
        if self.kind == "article":
            _require(self.ordinal is None, "whole-article scope carries no ordinal")
        else:
            _require(self.ordinal is not None and self.ordinal >= 1, "scope ordinals start at 1")

    @classmethod
    def paragraph(cls, ordinal: int) -> "Scope":
        return cls("paragraph", ordinal)

    @classmethod
    def sentence(cls, ordinal: int) -> "Scope":
        return cls("sentence", ordinal)


WHOLE_ARTICLE = Scope()


@dataclass(frozen=True)
class ReplaceWords:
    old: str
    new: str
    scope: Scope = WHOLE_ARTICLE

    def __post_init__(self) -> None:
        _require(bool(self.old) and bool(self.new), "quoted strings must be non-empty")


@dataclass(frozen=True)
class DeleteWords:
    target: str
    scope: Scope = WHOLE_ARTICLE

    def __post_init__(self) -> None:
        _require(bool(self.target), "quoted strings must be non-empty")


@dataclass(frozen=True)
class DeleteSentence:
    ordinal: int
    scope: Scope = WHOLE_ARTICLE

    def __post_init__(self) -> None:
        _require(self.ordinal >= 1, "ordinals start at 1")


@dataclass(frozen=True)
class DeleteParagraph:
    ordinal: int

    def __post_init__(self) -> None:
        _require(self.ordinal >= 1, "ordinals start at 1")


@dataclass(frozen=True)
class ReplaceParagraph:
    ordinal: int
    new_text: str

    def __post_init__(self) -> None:
        _require(self.ordinal >= 1, "ordinals start at 1")
        _require(bool(self.new_text), "quoted strings must be non-empty")


@dataclass(frozen=True)
class ReplaceSentence:
    ordinal: int
    new_text: str
    scope: Scope = WHOLE_ARTICLE

    def __post_init__(self) -> None:
        _require(self.ordinal >= 1, "ordinals start at 1")
        _require(bool(self.new_text), "quoted strings must be non-empty")


@dataclass(frozen=True)
class AppendText:
    """Append text at the end of the scope: a new paragraph when the scope is
    the whole article, extra words (before trailing punctuation) otherwise."""

    new_text: str
    scope: Scope = WHOLE_ARTICLE

    def __post_init__(self) -> None:
        _require(bool(self.new_text), "quoted strings must be non-empty")


@dataclass(frozen=True)
class InsertAfterWords:
    anchor: str
    new_text: str
    scope: Scope = WHOLE_ARTICLE

    def __post_init__(self) -> None:
        _require(bool(self.anchor) and bool(self.new_text), "quoted strings must be non-empty")


@dataclass(frozen=True)
class AbrogateArticle:
    pass


AmendmentOp = Union[
    ReplaceWords,
    DeleteWords,
    DeleteSentence,
    DeleteParagraph,
    ReplaceParagraph,
    ReplaceSentence,
    AppendText,
    InsertAfterWords,
    AbrogateArticle,
]


# ---------------------------------------------------------------------------
# Sentence segmentation

_ABBREVIATIONS = frozenset({"art", "cf", "etc", "M", "Mme"})


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Spans (trimmed of surrounding whitespace) of the sentences in ``text``.

    A trailing fragment without terminal punctuation counts as a sentence.
    """
    ends = []
    for m in re.finditer(r"[.!?]", text):
        nxt = m.end()
        if nxt < len(text) and not text[nxt].isspace():
            continue
        if m.group() == ".":
            w = re.search(r"([^\W\d_]+)$", text[: m.start()])
            if w and w.group(1) in _ABBREVIATIONS:
                continue
        ends.append(nxt)

    spans = []
    pos = 0
    for end in ends:
        seg = text[pos:end]
        if seg.strip():
            lead = len(seg) - len(seg.lstrip())
            spans.append((pos + lead, end))
        pos = end
    tail = text[pos:]
    if tail.strip():
        lead = len(tail) - len(tail.lstrip())
        spans.append((pos + lead, pos + len(tail.rstrip())))
    return spans


# ---------------------------------------------------------------------------
# Ordinals (English and French, word and numeric forms)

_EN_ORDINALS = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth",
    "ninth", "tenth", "eleventh", "twelfth", "thirteenth", "fourteenth",
    "fifteenth", "sixteenth",
]
_FR_ORDINALS_M = [
    "premier", "deuxième", "troisième", "quatrième", "cinquième", "sixième",
    "septième", "huitième", "neuvième", "dixième", "onzième", "douzième",
    "treizième", "quatorzième", "quinzième", "seizième",
]
_FR_ORDINALS_F = ["première"] + _FR_ORDINALS_M[1:]

_ORDINAL_WORDS: dict[str, int] = {}
for _i, _w in enumerate(_EN_ORDINALS, start=1):
    _ORDINAL_WORDS[_w] = _i
for _i, _w in enumerate(_FR_ORDINALS_M, start=1):
    _ORDINAL_WORDS[_w] = _i
_ORDINAL_WORDS["première"] = 1
_ORDINAL_WORDS["second"] = 2
_ORDINAL_WORDS["seconde"] = 2

_NUMERIC_ORDINAL = re.compile(r"(\d+)(?:er|re|e|ème|eme|st|nd|rd|th)?$")


def parse_ordinal(word: str) -> int:
    w = word.strip().lower()
    if w in _ORDINAL_WORDS:
        return _ORDINAL_WORDS[w]
    m = _NUMERIC_ORDINAL.fullmatch(w)
    if m and int(m.group(1)) >= 1:
        return int(m.group(1))
    raise ValueError(f"not an ordinal: {word!r}")


def ordinal_word(n: int, language: str, feminine: bool = False) -> str:
    if language == "fr":
        words = _FR_ORDINALS_F if feminine else _FR_ORDINALS_M
        return words[n - 1] if n <= len(words) else f"{n}e"
    return _EN_ORDINALS[n - 1] if n <= len(_EN_ORDINALS) else f"{n}th"


# ---------------------------------------------------------------------------
# Template table

_ORD = r"[\w'’]+"


def _q(name: str) -> str:
    return rf"«\s*(?P<{name}>.*?)\s*»"


@dataclass(frozen=True)
class Template:
    """One drafting formula: an id, a regex over a section item, and the name
    of the operation it builds. Capture roles are the regex's named groups
    (old, new, text, anchor, target, ordinal, scope_ord, scope_kind)."""

    id: str
    pattern: str
    op: str


DEFAULT_TEMPLATES: tuple[Template, ...] = (
    # Scoped chapeaux open a paragraph/sentence context for the items after them.
    Template(
        "chapeau_scoped_en",
        rf"the\s+(?P<scope_ord>{_ORD})\s+(?P<scope_kind>paragraph|sentence)\s+is\s+(?:amended|modified)(?:\s+as\s+follows)?\s*:?",
        "chapeau_scoped",
    ),
    Template(
        "chapeau_scoped_fr",
        rf"l[ae]\s+(?P<scope_ord>{_ORD})\s+(?P<scope_kind>alinéa|phrase)\s+est\s+ainsi\s+modifiée?\s*:?",
        "chapeau_scoped",
    ),
    Template(
        "replace_paragraph_en",
        rf"the\s+(?P<ordinal>{_ORD})\s+paragraph(?:\s+of\s+[^«»]+?)?\s+is\s+replaced\s+by\s+the\s+following\s+provisions\s*:\s*{_q('text')}\s*[.;]?",
        "replace_paragraph",
    ),
    Template(
        "replace_paragraph_fr",
        rf"le\s+(?P<ordinal>{_ORD})\s+alinéa(?:\s+de\s+[^«»]+?)?\s+est\s+remplacé\s+par\s+(?:les\s+dispositions\s+suivantes|un\s+alinéa\s+ainsi\s+rédigé)\s*:\s*{_q('text')}\s*[.;]?",
        "replace_paragraph",
    ),
    Template(
        "replace_sentence_en",
        rf"the\s+(?P<ordinal>{_ORD})\s+sentence(?:\s+of\s+the\s+(?P<scope_ord>{_ORD})\s+paragraph)?\s+is\s+replaced\s+by\s+the\s+following\s+sentence\s*:\s*{_q('text')}\s*[.;]?",
        "replace_sentence",
    ),
    Template(
        "replace_sentence_fr",
        rf"la\s+(?P<ordinal>{_ORD})\s+phrase(?:\s+du\s+(?P<scope_ord>{_ORD})\s+alinéa)?\s+est\s+remplacée\s+par\s+(?:la\s+phrase\s+suivante|une\s+phrase\s+ainsi\s+rédigée)\s*:\s*{_q('text')}\s*[.;]?",
        "replace_sentence",
    ),
    Template(
        "replace_words_en",
        rf"the\s+words?\s+{_q('old')}\s+(?:are|is)\s+replaced\s+by\s+the\s+words?\s+{_q('new')}\s*[.;]?",
        "replace_words",
    ),
    Template(
        "replace_words_fr",
        rf"les?\s+mots?\s*:?\s*{_q('old')}\s+(?:sont|est)\s+remplacée?s?\s+par\s+les?\s+mots?\s*:?\s*{_q('new')}\s*[.;]?",
        "replace_words",
    ),
    Template(
        "delete_words_en",
        rf"the\s+words?\s+{_q('target')}\s+(?:are|is)\s+deleted\s*[.;]?",
        "delete_words",
    ),
    Template(
        "delete_words_fr",
        rf"les?\s+mots?\s*:?\s*{_q('target')}\s+(?:sont|est)\s+supprimée?s?\s*[.;]?",
        "delete_words",
    ),
    Template(
        "delete_sentence_en",
        rf"the\s+(?P<ordinal>{_ORD})\s+sentence(?:\s+of\s+the\s+(?P<scope_ord>{_ORD})\s+paragraph)?\s+is\s+deleted\s*[.;]?",
        "delete_sentence",
    ),
    Template(
        "delete_sentence_fr",
        rf"la\s+(?P<ordinal>{_ORD})\s+phrase(?:\s+du\s+(?P<scope_ord>{_ORD})\s+alinéa)?\s+est\s+supprimée\s*[.;]?",
        "delete_sentence",
    ),
    Template(
        "delete_paragraph_en",
        rf"the\s+(?P<ordinal>{_ORD})\s+paragraph\s+is\s+deleted\s*[.;]?",
        "delete_paragraph",
    ),
    Template(
        "delete_paragraph_fr",
        rf"le\s+(?P<ordinal>{_ORD})\s+alinéa\s+est\s+supprimé\s*[.;]?",
        "delete_paragraph",
    ),
    Template(
        "insert_after_en",
        rf"after\s+the\s+words?\s+{_q('anchor')}\s*,?\s*the\s+words?\s+{_q('new')}\s+(?:are|is)\s+inserted\s*[.;]?",
        "insert_after_words",
    ),
    Template(
        "insert_after_fr",
        rf"après\s+les?\s+mots?\s*:?\s*{_q('anchor')}\s*,?\s*(?:sont\s+insérés\s+les\s+mots|est\s+inséré\s+le\s+mot)\s*:?\s*{_q('new')}\s*[.;]?",
        "insert_after_words",
    ),
    Template(
        "append_paragraph_en",
        rf"(?:the\s+article|it)\s+is\s+supplemented\s+by\s+a\s+paragraph\s+worded\s+as\s+follows\s*:\s*{_q('text')}\s*[.;]?",
        "append_paragraph",
    ),
    Template(
        "append_paragraph_fr",
        rf"(?:l['’]article|il)\s+est\s+complété\s+par\s+un\s+alinéa\s+ainsi\s+rédigé\s*:\s*{_q('text')}\s*[.;]?",
        "append_paragraph",
    ),
    Template(
        "append_words_en",
        rf"(?:the\s+(?P<scope_ord>{_ORD})\s+(?P<scope_kind>paragraph|sentence)|it)\s+is\s+supplemented\s+by\s+the\s+words?\s+{_q('text')}\s*[.;]?",
        "append_words",
    ),
    Template(
        "append_words_fr",
        rf"(?:l[ae]\s+(?P<scope_ord>{_ORD})\s+(?P<scope_kind>alinéa|phrase)|il|elle)\s+est\s+complétée?\s+par\s+les?\s+mots?\s*:?\s*{_q('text')}\s*[.;]?",
        "append_words",
    ),
    Template(
        "abrogate_en",
        r"(?:the\s+)?article(?:\s+[^\s«»]+)?\s+is\s+(?:abrogated|repealed)\s*[.;]?",
        "abrogate_article",
    ),
    Template(
        "abrogate_fr",
        r"l['’]article(?:\s+[^\s«»]+)?\s+est\s+abrogé\s*[.;]?",
        "abrogate_article",
    ),
    # Generic chapeaux are last: they carry no operation and match loosely.
    Template("chapeau_en", r".+?\s+(?:is|are)\s+(?:amended|modified)(?:\s+as\s+follows)?\s*:?", "chapeau"),
    Template("chapeau_fr", r".+?\s+(?:est|sont)\s+ainsi\s+modifiée?s?\s*:?", "chapeau"),
)


@lru_cache(maxsize=256)
def _compiled(pattern: str) -> re.Pattern[str]:
    return re.compile(pattern, re.IGNORECASE | re.DOTALL)


def load_templates(path: str) -> tuple[Template, ...]:
    """Extra templates from a TOML file ([[template]] id/pattern/op), tried
    before the built-in table so site formulas can override defaults."""
    import tomli

    with open(path, "rb") as fh:
        data = tomli.load(fh)
    custom = tuple(Template(t["id"], t["pattern"], t["op"]) for t in data.get("template", ()))
    for template in custom:
        if template.op not in _OP_BUILDERS and template.op not in ("chapeau", "chapeau_scoped"):
            raise ValueError(f"template {template.id}: unknown op constructor {template.op!r}")
    return custom + DEFAULT_TEMPLATES


# ---------------------------------------------------------------------------
# Parsing

_SCOPE_KINDS = {"paragraph": "paragraph", "alinéa": "paragraph", "sentence": "sentence", "phrase": "sentence"}

_SCOPE_PREFIX = re.compile(
    rf"^(?:in|at)\s+the\s+(?P<pfx_ord>{_ORD})\s+(?P<pfx_kind>paragraph|sentence)\s*,\s*"
    rf"|^(?:au|à\s+la|a\s+la|dans\s+l[ae])\s+(?P<pfx_ord2>{_ORD})\s+(?P<pfx_kind2>alinéa|phrase)\s*,\s*",
    re.IGNORECASE,
)

_MARKER = r"(?:\d+°(?:\s(?:bis|ter|quater|quinquies))?|[a-z]{1,2}\)|[IVXLCDM]+\.)"
_BOUNDARY = re.compile(
    rf"(?m)(?:^[ \t]*(?P<m1>{_MARKER}|[–—])|(?<=[;:])\s*(?P<m2>{_MARKER}))(?=\s)"
)
_MARKER_PREFIX = re.compile(rf"^\s*(?:{_MARKER}\s*(?:[–—]\s+)?|[–—]\s+)")


def _mask_quotes(text: str) -> str:
    """Blank out quoted content so markers inside quotes never split items."""
    out = []
    depth = 0
    straight_open = False
    for ch in text:
        if ch == "«" or ch == "“":
            depth += 1
            out.append(ch)
        elif ch == "»" or ch == "”":
            depth = max(depth - 1, 0)
            out.append(ch)
        elif ch == '"':
            straight_open = not straight_open
            out.append(ch)
        elif depth > 0 or straight_open:
            out.append("\n" if ch == "\n" else "\x00")
        else:
            out.append(ch)
    return "".join(out)


def _normalize_quotes(segment: str) -> str:
    """Map straight/typographic double quotes to guillemets (same length)."""
    if "«" in segment:
        return segment.replace("“", "«").replace("”", "»")
    out = []
    open_next = True
    for ch in segment:
        if ch == '"':
            out.append("«" if open_next else "»")
            open_next = not open_next
        elif ch == "“":
            out.append("«")
        elif ch == "”":
            out.append("»")
        else:
            out.append(ch)
    return "".join(out)


def _scope_from(groups: dict[str, str | None], fallback: Scope) -> Scope:
    ord_word = groups.get("scope_ord") or groups.get("pfx_ord") or groups.get("pfx_ord2")
    if ord_word is None:
        return fallback
    kind_word = groups.get("scope_kind") or groups.get("pfx_kind") or groups.get("pfx_kind2")
    kind = _SCOPE_KINDS[kind_word.lower()] if kind_word else "paragraph"
    return Scope(kind, parse_ordinal(ord_word))


def _build_replace_words(g: dict, scope: Scope) -> AmendmentOp:
    return ReplaceWords(old=g["old"], new=g["new"], scope=scope)


def _build_delete_words(g: dict, scope: Scope) -> AmendmentOp:
    return DeleteWords(target=g["target"], scope=scope)


def _build_delete_sentence(g: dict, scope: Scope) -> AmendmentOp:
    return DeleteSentence(ordinal=parse_ordinal(g["ordinal"]), scope=scope)


def _build_delete_paragraph(g: dict, scope: Scope) -> AmendmentOp:
    return DeleteParagraph(ordinal=parse_ordinal(g["ordinal"]))


def _build_replace_sentence(g: dict, scope: Scope) -> AmendmentOp:
    return ReplaceSentence(ordinal=parse_ordinal(g["ordinal"]), new_text=g["text"], scope=scope)


def _build_replace_paragraph(g: dict, scope: Scope) -> AmendmentOp:
    return ReplaceParagraph(ordinal=parse_ordinal(g["ordinal"]), new_text=g["text"])


def _build_append_paragraph(g: dict, scope: Scope) -> AmendmentOp:
    return AppendText(new_text=g["text"], scope=WHOLE_ARTICLE)


def _build_append_words(g: dict, scope: Scope) -> AmendmentOp:
    return AppendText(new_text=g["text"], scope=scope)


def _build_insert_after(g: dict, scope: Scope) -> AmendmentOp:
    return InsertAfterWords(anchor=g["anchor"], new_text=g["new"], scope=scope)


def _build_abrogate(g: dict, scope: Scope) -> AmendmentOp:
    return AbrogateArticle()


_OP_BUILDERS: dict[str, Callable[[dict, Scope], AmendmentOp]] = {
    "replace_words": _build_replace_words,
    "delete_words": _build_delete_words,
    "delete_sentence": _build_delete_sentence,
    "delete_paragraph": _build_delete_paragraph,
    "replace_sentence": _build_replace_sentence,
    "replace_paragraph": _build_replace_paragraph,
    "append_paragraph": _build_append_paragraph,
    "append_words": _build_append_words,
    "insert_after_words": _build_insert_after,
    "abrogate_article": _build_abrogate,
}

# Ops whose scope comes from an explicit inline group; a scoped chapeau must
# not leak into paragraph-level operations.
_SCOPELESS_OPS = {"delete_paragraph", "replace_paragraph", "append_paragraph", "abrogate_article"}


def _split_on_semicolons(text: str) -> list[tuple[int, str]]:
    masked = _mask_quotes(text)
    parts = []
    start = 0
    for idx, ch in enumerate(masked):
        if ch == ";":
            parts.append((start, text[start:idx]))
            start = idx + 1
    parts.append((start, text[start:]))
    return [(off, piece) for off, piece in parts if piece.strip()]


class _ScopeContext:
    """Mutable chapeau scope carried across items of one section."""

    __slots__ = ("scope",)

    def __init__(self) -> None:
        self.scope = WHOLE_ARTICLE


def _match_item(
    item: str,
    offset: int,
    templates: tuple[Template, ...],
    context: _ScopeContext,
    allow_split: bool = True,
) -> list[AmendmentOp]:
    stripped = item.strip()
    if not stripped:
        return []
    item_offset = offset + len(item) - len(item.lstrip())

    marker = _MARKER_PREFIX.match(stripped)
    body = stripped[marker.end() :] if marker else stripped
    body = _normalize_quotes(body)

    prefix_scope = None
    prefix = _SCOPE_PREFIX.match(body)
    matchable = body
    if prefix:
        try:
            prefix_scope = _scope_from(prefix.groupdict(), WHOLE_ARTICLE)
            matchable = body[prefix.end() :]
        except ValueError:
            prefix_scope = None
            matchable = body

    for template in templates:
        m = _compiled(template.pattern).fullmatch(matchable.strip())
        if not m:
            continue
        groups = m.groupdict()
        if template.op == "chapeau":
            context.scope = WHOLE_ARTICLE
            return []
        if template.op == "chapeau_scoped":
            try:
                context.scope = _scope_from(groups, WHOLE_ARTICLE)
            except ValueError:
                continue
            return []
        fallback = prefix_scope or context.scope
        if template.op in _SCOPELESS_OPS:
            scope = WHOLE_ARTICLE
        else:
            try:
                scope = _scope_from(groups, fallback)
            except ValueError:
                continue
        try:
            return [_OP_BUILDERS[template.op](groups, scope)]
        except ValueError:
            continue

    if allow_split:
        pieces = _split_on_semicolons(item)
        if len(pieces) > 1:
            ops: list[AmendmentOp] = []
            for piece_off, piece in pieces:
                ops.extend(_match_item(piece, offset + piece_off, templates, context, allow_split=False))
            return ops

    raise UnrecognizedPattern(item_offset, stripped[:60])


def parse_amendment(
    section_text: str, templates: tuple[Template, ...] = DEFAULT_TEMPLATES
) -> list[AmendmentOp]:
    """Parse a modification section into operations, in textual order.

    Enumeration markers (1°, a), I.) delimit items; quoted material is taken
    between guillemets (straight double quotes accepted as fallback) exactly as
    written. Raises UnrecognizedPattern when an item matches no template.
    """
    masked = _mask_quotes(section_text)
    boundaries = [m.start("m1") if m.group("m1") else m.start("m2") for m in _BOUNDARY.finditer(masked)]

    segments: list[tuple[int, str]] = []
    if not boundaries:
        segments.append((0, section_text))
    else:
        if section_text[: boundaries[0]].strip():
            segments.append((0, section_text[: boundaries[0]]))
        for idx, start in enumerate(boundaries):
            end = boundaries[idx + 1] if idx + 1 < len(boundaries) else len(section_text)
            segments.append((start, section_text[start:end]))

    context = _ScopeContext()
    ops: list[AmendmentOp] = []
    for offset, segment in segments:
        ops.extend(_match_item(segment, offset, templates, context))
    return ops


# ---------------------------------------------------------------------------
# Application

def _paragraph_bounds(text: str, ordinal: int, op_index: int) -> tuple[int, int]:
    lines = text.split("\n")
    if ordinal > len(lines):
        raise OrdinalOutOfRange(op_index, f"paragraph {ordinal} of {len(lines)}")
    start = sum(len(line) + 1 for line in lines[: ordinal - 1])
    return start, start + len(lines[ordinal - 1])


def _scope_bounds(text: str, scope: Scope, op_index: int) -> tuple[int, int]:
    if scope.kind == "article":
        return 0, len(text)
    if scope.kind == "paragraph":
        return _paragraph_bounds(text, scope.ordinal or 1, op_index)
    spans = sentence_spans(text)
    if (scope.ordinal or 1) > len(spans):
        raise OrdinalOutOfRange(op_index, f"sentence {scope.ordinal} of {len(spans)}")
    return spans[(scope.ordinal or 1) - 1]


def _find_occurrences(region: str, needle: str) -> list[int]:
    sites = []
    pos = 0
    while True:
        idx = region.find(needle, pos)
        if idx < 0:
            return sites
        sites.append(idx)
        pos = idx + len(needle)


def _delete_occurrences(region: str, sites: list[int], width: int) -> str:
    """Remove ``width`` chars at each site, collapsing the space doubled at
    each seam (and orphan spaces at region/line edges)."""
    out: list[str] = []
    pos = 0
    for site in sites:
        out.append(region[pos:site])
        pos = site + width
        accumulated_tail = next((piece[-1] for piece in reversed(out) if piece), "")
        right = region[pos] if pos < len(region) else ""
        if right == " " and accumulated_tail in (" ", "", "\n"):
            pos += 1
        elif accumulated_tail == " " and right in ("", "\n"):
            for k in range(len(out) - 1, -1, -1):
                if out[k]:
                    out[k] = out[k][:-1]
                    break
    out.append(region[pos:])
    return "".join(out)


def _replace_in_region(region: str, old: str, new: str) -> str:
    if new:
        return region.replace(old, new)
    return _delete_occurrences(region, _find_occurrences(region, old), len(old))


def _drop_emptied_lines(before: str, after: str) -> str:
    """Deletions must not leave behind blank paragraphs they created."""
    b, a = before.split("\n"), after.split("\n")
    if len(b) != len(a):
        return after
    kept = [line for old, line in zip(b, a) if line.strip() or not old.strip()]
    return "\n".join(kept)


def _delete_sentence_in_region(region: str, ordinal: int, op_index: int) -> str:
    spans = sentence_spans(region)
    if ordinal > len(spans):
        raise OrdinalOutOfRange(op_index, f"sentence {ordinal} of {len(spans)}")
    start, end = spans[ordinal - 1]
    # Take the separating whitespace after the sentence, but never cross a
    # paragraph boundary; fall back to the whitespace before it.
    gap_consumed = False
    if ordinal < len(spans):
        gap = region[end : spans[ordinal][0]]
        cut = gap.find("\n")
        if cut < 0:
            end += len(gap)
            gap_consumed = True
        elif cut > 0:
            end += cut
            gap_consumed = True
    if not gap_consumed and ordinal > 1:
        prev_end = spans[ordinal - 2][1]
        if "\n" not in region[prev_end:start]:
            start = prev_end
    return region[:start] + region[end:]


def _append_in_region(region: str, new_text: str) -> str:
    trimmed = region.rstrip()
    if not trimmed:
        return new_text
    if trimmed[-1] in ".!?":
        insert_at = len(trimmed) - 1
        return region[:insert_at].rstrip() + " " + new_text + region[insert_at:]
    return trimmed + " " + new_text + region[len(trimmed):]


def _apply_one(text: str, op: AmendmentOp, op_index: int) -> str:
    if isinstance(op, AbrogateArticle):
        return ""

    if isinstance(op, DeleteParagraph):
        lines = text.split("\n")
        if op.ordinal > len(lines):
            raise OrdinalOutOfRange(op_index, f"paragraph {op.ordinal} of {len(lines)}")
        del lines[op.ordinal - 1]
        return "\n".join(lines)

    if isinstance(op, ReplaceParagraph):
        lines = text.split("\n")
        if op.ordinal > len(lines):
            raise OrdinalOutOfRange(op_index, f"paragraph {op.ordinal} of {len(lines)}")
        lines[op.ordinal - 1] = op.new_text
        return "\n".join(lines)

    if isinstance(op, AppendText) and op.scope.kind == "article":
        return text + "\n" + op.new_text if text else op.new_text

    start, end = _scope_bounds(text, getattr(op, "scope", WHOLE_ARTICLE), op_index)
    region = text[start:end]

    if isinstance(op, ReplaceWords):
        if op.old not in region:
            raise AnchorNotFound(op_index, op.old)
        new_region = _replace_in_region(region, op.old, op.new)
    elif isinstance(op, DeleteWords):
        if op.target not in region:
            raise AnchorNotFound(op_index, op.target)
        new_region = _replace_in_region(region, op.target, "")
    elif isinstance(op, DeleteSentence):
        new_region = _delete_sentence_in_region(region, op.ordinal, op_index)
    elif isinstance(op, ReplaceSentence):
        spans = sentence_spans(region)
        if op.ordinal > len(spans):
            raise OrdinalOutOfRange(op_index, f"sentence {op.ordinal} of {len(spans)}")
        s, e = spans[op.ordinal - 1]
        new_region = region[:s] + op.new_text + region[e:]
    elif isinstance(op, AppendText):
        new_region = _append_in_region(region, op.new_text)
    elif isinstance(op, InsertAfterWords):
        idx = region.find(op.anchor)
        if idx < 0:
            raise AnchorNotFound(op_index, op.anchor)
        at = idx + len(op.anchor)
        new_region = region[:at] + " " + op.new_text + region[at:]
    else:  # pragma: no cover - exhaustive over AmendmentOp
        raise AmendmentError(f"unsupported operation: {op!r}")

    result = text[:start] + new_region + text[end:]
    if isinstance(op, (DeleteWords, DeleteSentence)):
        result = _drop_emptied_lines(text, result)
    return result


def apply(article_text: str, ops: list[AmendmentOp]) -> str:
    """Apply operations strictly in order, each to the previous result.

    Fail-closed: AnchorNotFound/OrdinalOutOfRange abort the whole application;
    no partial consolidation is returned.
    """
    text = article_text
    for op_index, op in enumerate(ops):
        text = _apply_one(text, op, op_index)
    return text


def consolidate(triplet: ConsolidationTriplet, templates: tuple[Template, ...] = DEFAULT_TEMPLATES) -> str:
    """Deterministic consolidation: parse the instruction, apply to the input."""
    return apply(triplet.input, parse_amendment(triplet.instruction, templates))


# ---------------------------------------------------------------------------
# Rendering (canonical inverse of the template table, used to build synthetic
# datasets and to verify round trips)


def _quote(s: str) -> str:
    return f"« {s} »"


def _scope_prefix(scope: Scope, language: str) -> str:
    if scope.kind == "article":
        return ""
    n = scope.ordinal or 1
    if language == "fr":
        if scope.kind == "paragraph":
            return f"au {ordinal_word(n, 'fr')} alinéa, "
        return f"à la {ordinal_word(n, 'fr', feminine=True)} phrase, "
    kind = "paragraph" if scope.kind == "paragraph" else "sentence"
    return f"in the {ordinal_word(n, 'en')} {kind}, "


def _render_op_en(op: AmendmentOp) -> str:
    if isinstance(op, ReplaceWords):
        return _scope_prefix(op.scope, "en") + f"the words {_quote(op.old)} are replaced by the words {_quote(op.new)}"
    if isinstance(op, DeleteWords):
        return _scope_prefix(op.scope, "en") + f"the words {_quote(op.target)} are deleted"
    if isinstance(op, DeleteSentence):
        of = f" of the {ordinal_word(op.scope.ordinal or 1, 'en')} paragraph" if op.scope.kind == "paragraph" else ""
        if op.scope.kind == "sentence":
            raise ValueError("sentence-scoped DeleteSentence cannot be rendered")
        return f"the {ordinal_word(op.ordinal, 'en')} sentence{of} is deleted"
    if isinstance(op, DeleteParagraph):
        return f"the {ordinal_word(op.ordinal, 'en')} paragraph is deleted"
    if isinstance(op, ReplaceParagraph):
        return f"the {ordinal_word(op.ordinal, 'en')} paragraph is replaced by the following provisions: {_quote(op.new_text)}"
    if isinstance(op, ReplaceSentence):
        of = f" of the {ordinal_word(op.scope.ordinal or 1, 'en')} paragraph" if op.scope.kind == "paragraph" else ""
        if op.scope.kind == "sentence":
            raise ValueError("sentence-scoped ReplaceSentence cannot be rendered")
        return f"the {ordinal_word(op.ordinal, 'en')} sentence{of} is replaced by the following sentence: {_quote(op.new_text)}"
    if isinstance(op, AppendText):
        if op.scope.kind == "article":
            return f"it is supplemented by a paragraph worded as follows: {_quote(op.new_text)}"
        kind = "paragraph" if op.scope.kind == "paragraph" else "sentence"
        return f"the {ordinal_word(op.scope.ordinal or 1, 'en')} {kind} is supplemented by the words {_quote(op.new_text)}"
    if isinstance(op, InsertAfterWords):
        return _scope_prefix(op.scope, "en") + f"after the words {_quote(op.anchor)}, the words {_quote(op.new_text)} are inserted"
    if isinstance(op, AbrogateArticle):
        return "the article is abrogated"
    raise ValueError(f"cannot render {op!r}")


def _render_op_fr(op: AmendmentOp) -> str:
    if isinstance(op, ReplaceWords):
        return _scope_prefix(op.scope, "fr") + f"les mots : {_quote(op.old)} sont remplacés par les mots : {_quote(op.new)}"
    if isinstance(op, DeleteWords):
        return _scope_prefix(op.scope, "fr") + f"les mots : {_quote(op.target)} sont supprimés"
    if isinstance(op, DeleteSentence):
        if op.scope.kind == "sentence":
            raise ValueError("sentence-scoped DeleteSentence cannot be rendered")
        du = f" du {ordinal_word(op.scope.ordinal or 1, 'fr')} alinéa" if op.scope.kind == "paragraph" else ""
        return f"la {ordinal_word(op.ordinal, 'fr', feminine=True)} phrase{du} est supprimée"
    if isinstance(op, DeleteParagraph):
        return f"le {ordinal_word(op.ordinal, 'fr')} alinéa est supprimé"
    if isinstance(op, ReplaceParagraph):
        return f"le {ordinal_word(op.ordinal, 'fr')} alinéa est remplacé par les dispositions suivantes : {_quote(op.new_text)}"
    if isinstance(op, ReplaceSentence):
        if op.scope.kind == "sentence":
            raise ValueError("sentence-scoped ReplaceSentence cannot be rendered")
        du = f" du {ordinal_word(op.scope.ordinal or 1, 'fr')} alinéa" if op.scope.kind == "paragraph" else ""
        return f"la {ordinal_word(op.ordinal, 'fr', feminine=True)} phrase{du} est remplacée par la phrase suivante : {_quote(op.new_text)}"
    if isinstance(op, AppendText):
        if op.scope.kind == "article":
            return f"il est complété par un alinéa ainsi rédigé : {_quote(op.new_text)}"
        if op.scope.kind == "paragraph":
            return f"le {ordinal_word(op.scope.ordinal or 1, 'fr')} alinéa est complété par les mots : {_quote(op.new_text)}"
        return f"la {ordinal_word(op.scope.ordinal or 1, 'fr', feminine=True)} phrase est complétée par les mots : {_quote(op.new_text)}"
    if isinstance(op, InsertAfterWords):
        return _scope_prefix(op.scope, "fr") + f"après les mots : {_quote(op.anchor)}, sont insérés les mots : {_quote(op.new_text)}"
    if isinstance(op, AbrogateArticle):
        return "l'article est abrogé"
    raise ValueError(f"cannot render {op!r}")


def _capitalize(s: str) -> str:
    return s[0].upper() + s[1:] if s else s


def render_amendment(
    ops: list[AmendmentOp],
    *,
    article_label: str = "10",
    language: str = "en",
    force_enumeration: bool = False,
) -> str:
    """Emit the canonical drafting text for ``ops``; parse_amendment inverts it."""
    if not ops:
        raise ValueError("cannot render an empty operation list")
    render_op = _render_op_fr if language == "fr" else _render_op_en
    sentences = [render_op(op) for op in ops]
    if len(sentences) == 1 and not force_enumeration:
        return _capitalize(sentences[0]) + "."
    if language == "fr":
        chapeau = f"L'article {article_label} est ainsi modifié :"
    else:
        chapeau = f"Article {article_label} is amended as follows:"
    items = [
        f"{i}° {_capitalize(s)}" + (";" if i < len(sentences) else ".")
        for i, s in enumerate(sentences, start=1)
    ]
    return chapeau + "\n" + "\n".join(items)
