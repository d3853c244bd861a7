"""Hierarchical decomposition of bill articles into enumerated sections.

A bill article mixes a preamble ("Article 10 is amended as follows:") with
enumerated items at several levels (I., 1°, a), –). The splitter builds a
lossless tree over the raw text and flattens it into self-contained "simple
modifications", one per leaf item.

Losslessness contract: for every node, ``marker + own text + children`` (in
order) reproduces the source slice byte for byte, so re-assembling the root
yields the input unchanged.

What counts as a simple modification is not standardized anywhere; here it is
defined as a non-blank leaf item prefixed by the chain of its ancestors'
preamble text, which makes each entry independently interpretable.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from .model import BillArticle, _require


class MalformedHierarchy(Exception):
    """A marker appears where no open section can absorb it (drafting anomaly).

    Recoverable: carries the offending character offset so the pipeline can
    route the article to human review and keep going.
    """

    def __init__(self, offset: int, snippet: str, message: str):
        super().__init__(f"{message} at offset {offset}: {snippet!r}")
        self.offset = offset
        self.snippet = snippet


@dataclass(frozen=True)
class MarkerPattern:
    """A marker regex and its seniority rank (lower rank = more senior level)."""

    regex: str
    rank: int

    def __post_init__(self) -> None:
        _require(self.rank >= 1, "marker ranks start at 1 (0 is the article root)")


@dataclass(frozen=True)
class HierarchyConfig:
    """Ordered marker patterns defining the enumeration hierarchy."""

    level_patterns: tuple[MarkerPattern, ...]

    def __post_init__(self) -> None:
        _require(len(self.level_patterns) > 0, "hierarchy config needs at least one pattern")
        ranks = [p.rank for p in self.level_patterns]
        _require(
            all(a < b for a, b in zip(ranks, ranks[1:])),
            "marker ranks must be strictly increasing",
        )

    @classmethod
    def default(cls) -> "HierarchyConfig":
        return DEFAULT_HIERARCHY


# French legistic drafting order: I. > 1° > a) > – . Markers are recognized
# only at line starts (after optional indentation) and must be followed by
# whitespace or the end of the line, which keeps inline citations like
# "1° of Article 5" out of the hierarchy.
DEFAULT_HIERARCHY = HierarchyConfig(
    level_patterns=(
        MarkerPattern(r"[IVXLCDM]+\.", 1),
        MarkerPattern(r"\d+°(?:\s(?:bis|ter|quater|quinquies))?", 2),
        MarkerPattern(r"[a-z]{1,2}\)", 3),
        MarkerPattern(r"[–—]", 4),
    )
)


@dataclass(frozen=True)
class SectionNode:
    """A node of the decomposition. ``text`` is the node's own text, excluding
    children; ``source_range`` is its slice of the article text."""

    marker: str | None
    level: int
    text: str
    children: tuple["SectionNode", ...]
    source_range: tuple[int, int]

    def __post_init__(self) -> None:
        _require(self.level >= 0, "level must be non-negative")
        for child in self.children:
            _require(child.level > self.level, "children levels must exceed the parent level")

    def reassemble(self) -> str:
        parts = [self.marker or "", self.text]
        parts.extend(child.reassemble() for child in self.children)
        return "".join(parts)

    def leaves(self) -> list["SectionNode"]:
        if not self.children:
            return [self]
        out: list[SectionNode] = []
        for child in self.children:
            out.extend(child.leaves())
        return out


@lru_cache(maxsize=64)
def _compiled(regex: str) -> re.Pattern[str]:
    # Boundary lookahead: a marker must be followed by whitespace or line end.
    return re.compile(regex + r"(?=\s|$)")


class _Builder:
    __slots__ = ("marker", "rank", "level", "start", "text", "children", "last_child_rank", "end")

    def __init__(self, marker: str | None, rank: int, level: int, start: int):
        self.marker = marker
        self.rank = rank
        self.level = level
        self.start = start
        self.text: str | None = None
        self.children: list[SectionNode] = []
        self.last_child_rank = 0
        self.end = start

    def close_text(self, source: str, upto: int) -> None:
        if self.text is None:
            begin = self.start if self.marker is None else self.start + len(self.marker)
            self.text = source[begin:upto]

    def freeze(self) -> SectionNode:
        return SectionNode(
            marker=self.marker,
            level=self.level,
            text=self.text or "",
            children=tuple(self.children),
            source_range=(self.start, self.end),
        )


def _find_markers(text: str, config: HierarchyConfig) -> list[tuple[int, str, int]]:
    """Scan line starts for markers, skipping lines inside open guillemets.

    Quoted provisions may themselves contain enumerated text; those lines
    belong to the quoting section, not to the hierarchy.
    """
    markers: list[tuple[int, str, int]] = []
    quote_depth = 0
    pos = 0
    n = len(text)
    while pos <= n:
        line_end = text.find("\n", pos)
        if line_end < 0:
            line_end = n
        if quote_depth == 0:
            ws = re.match(r"[ \t]*", text[pos:line_end])
            marker_start = pos + ws.end()
            for pattern in config.level_patterns:
                m = _compiled(pattern.regex).match(text, marker_start, line_end)
                if m:
                    markers.append((marker_start, m.group(0), pattern.rank))
                    break
        quote_depth += text.count("«", pos, line_end) - text.count("»", pos, line_end)
        quote_depth = max(quote_depth, 0)
        if line_end == n:
            break
        pos = line_end + 1
    return markers


def split_article(article: BillArticle, config: HierarchyConfig = DEFAULT_HIERARCHY) -> SectionNode:
    """Decompose an article into its enumeration tree.

    Levels are nesting depths (root = 0), not pattern ranks: an article whose
    top items are "1°, 2°" gets them at level 1. Sibling items under one parent
    must share a marker kind; a mismatch (e.g. "a)" opened before any "1°",
    then "1°" arriving with nothing senior to attach to) raises
    MalformedHierarchy with the offending offset.
    """
    text = article.text
    markers = _find_markers(text, config)

    root = _Builder(None, 0, 0, 0)
    stack: list[_Builder] = [root]

    for marker_start, marker_text, rank in markers:
        stack[-1].close_text(text, marker_start)
        while stack[-1].rank >= rank:
            closing = stack.pop()
            closing.end = marker_start
            stack[-1].children.append(closing.freeze())
        parent = stack[-1]
        if parent.children and parent.last_child_rank != rank:
            raise MalformedHierarchy(
                marker_start,
                text[marker_start : marker_start + 40],
                "enumeration level regresses with no parent to absorb it",
            )
        parent.last_child_rank = rank
        stack.append(_Builder(marker_text, rank, parent.level + 1, marker_start))

    stack[-1].close_text(text, len(text))
    while len(stack) > 1:
        closing = stack.pop()
        closing.end = len(text)
        stack[-1].children.append(closing.freeze())
    root.end = len(text)
    return root.freeze()


def flatten_simple_modifications(root: SectionNode) -> list[tuple[list[str], str]]:
    """Flatten the tree into self-contained simple modifications.

    One entry per non-blank leaf: the leaf's marker and text, prefixed by each
    ancestor's marker and own (preamble) text, so entries read like the item
    plus its introductory chain.
    """
    out: list[tuple[list[str], str]] = []

    def walk(node: SectionNode, preamble: str, path: list[str]) -> None:
        own = (node.marker or "") + node.text
        if not node.children:
            if node.text.strip():
                out.append((path, preamble + own))
            return
        for child in node.children:
            child_path = path + ([child.marker] if child.marker else [])
            walk(child, preamble + own, child_path)

    walk(root, "", [])
    return out
