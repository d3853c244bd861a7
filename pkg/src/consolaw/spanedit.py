"""Span-based representation of a consolidation: [NL] marking, two-span labels,
label derivation from completed triplets, and text reconstruction.

The representation models one contiguous edit: a deletion span over the
NL-marked existing article, overwritten by an addition span taken from the
NL-marked modification section. Pure insertions have an empty-width deletion
span; pure deletions an empty-width addition span. Derivation refuses to guess
on multi-edit triplets, which keeps the baseline restricted to single
modifications.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .model import ConsolidationTriplet, _require

NL_TOKEN = "[NL]"


class SpanEditError(Exception):
    pass


class MalformedMarkers(SpanEditError):
    """Text is not in the shape produced by insert_nl."""


class NotSingleEdit(SpanEditError):
    """Input and response differ in more than one contiguous region."""


class AdditionNotFound(SpanEditError):
    """The replacement text does not occur verbatim in the modification section
    (paraphrased drafting, or an edit assembled from several fragments)."""


class SpanOutOfRange(SpanEditError):
    """A span does not fit inside the text it indexes."""


@dataclass(frozen=True)
class SpanLabels:
    """Character ranges over the NL-marked texts: what to delete from the
    existing article and what to take from the modification section.

    ``addition_ambiguous`` is set when the addition text occurs more than once
    in the modification section (the first occurrence is labeled).
    """

    deletion_span: tuple[int, int]
    addition_span: tuple[int, int]
    addition_ambiguous: bool = False

    def __post_init__(self) -> None:
        for name, (start, end) in (("deletion_span", self.deletion_span), ("addition_span", self.addition_span)):
            _require(0 <= start <= end, f"{name} must be a non-negative ordered range")


def insert_nl(text: str) -> str:
    """Prefix every paragraph with "[NL] " and close the text with " [NL]"
    (just "[NL]" for empty text)."""
    if text == "":
        return NL_TOKEN
    marked = "\n".join(f"{NL_TOKEN} {paragraph}" for paragraph in text.split("\n"))
    return f"{marked} {NL_TOKEN}"


def strip_nl(text: str) -> str:
    """Exact inverse of insert_nl; raises MalformedMarkers on any other shape."""
    if text == NL_TOKEN:
        return ""
    terminal = f" {NL_TOKEN}"
    if not text.endswith(terminal):
        raise MalformedMarkers(f"missing terminal {NL_TOKEN!r} token")
    body = text[: -len(terminal)]
    prefix = f"{NL_TOKEN} "
    paragraphs = []
    for line in body.split("\n"):
        if not line.startswith(prefix):
            raise MalformedMarkers(f"paragraph does not start with {prefix!r}: {line[:30]!r}")
        stripped = line[len(prefix) :]
        if NL_TOKEN in stripped:
            raise MalformedMarkers(f"unexpected {NL_TOKEN!r} inside a paragraph")
        paragraphs.append(stripped)
    return "\n".join(paragraphs)


def _common_prefix_len(a: str, b: str) -> int:
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i


def _common_suffix_len(a: str, b: str, limit: int) -> int:
    n = min(len(a), len(b), limit)
    i = 0
    while i < n and a[len(a) - 1 - i] == b[len(b) - 1 - i]:
        i += 1
    return i


def derive_labels(triplet: ConsolidationTriplet) -> SpanLabels:
    """Labels for a completed triplet via the longest-common-prefix/suffix diff.

    The single contiguous difference between the NL-marked input and response
    is the deletion span; its replacement text is located verbatim (first
    occurrence) in the NL-marked instruction. Edits spanning several paragraphs
    raise NotSingleEdit; replacement text not quoted verbatim raises
    AdditionNotFound.
    """
    if triplet.response is None:
        raise ValueError("derive_labels needs a triplet with a response")

    marked_input = insert_nl(triplet.input)
    marked_response = insert_nl(triplet.response)

    prefix = _common_prefix_len(marked_input, marked_response)
    suffix = _common_suffix_len(
        marked_input, marked_response, min(len(marked_input), len(marked_response)) - prefix
    )

    deleted = marked_input[prefix : len(marked_input) - suffix]
    added = marked_response[prefix : len(marked_response) - suffix]

    # Edits in two different paragraphs leave a complete unchanged line inside
    # both middles; a single contiguous edit never does.
    inner_deleted = deleted.split("\n")[1:-1]
    inner_added = added.split("\n")[1:-1]
    if set(inner_deleted) & set(inner_added):
        raise NotSingleEdit("input and response differ in more than one region")

    marked_instruction = insert_nl(triplet.instruction)
    at = marked_instruction.find(added)
    if at < 0:
        raise AdditionNotFound(f"replacement text not found in the modification section: {added[:40]!r}")
    ambiguous = bool(added) and marked_instruction.find(added, at + 1) >= 0

    return SpanLabels(
        deletion_span=(prefix, len(marked_input) - suffix),
        addition_span=(at, at + len(added)),
        addition_ambiguous=ambiguous,
    )


def reconstruct(existing: str, modification: str, labels: SpanLabels) -> str:
    """Consolidated text: overwrite the deletion span of the NL-marked existing
    article with the addition span of the NL-marked modification, then strip
    the markers."""
    marked_existing = insert_nl(existing)
    marked_modification = insert_nl(modification)

    d_start, d_end = labels.deletion_span
    a_start, a_end = labels.addition_span
    if d_end > len(marked_existing):
        raise SpanOutOfRange(f"deletion span {labels.deletion_span} exceeds text of length {len(marked_existing)}")
    if a_end > len(marked_modification):
        raise SpanOutOfRange(f"addition span {labels.addition_span} exceeds text of length {len(marked_modification)}")

    spliced = marked_existing[:d_start] + marked_modification[a_start:a_end] + marked_existing[d_end:]
    return strip_nl(spliced)


def save_span_labels(labels: dict[str, SpanLabels], path: str) -> None:
    """JSONL interface: one {triplet_id, del_start, del_end, add_start, add_end}
    object per line, offsets over the NL-marked texts."""
    with open(path, "w", encoding="utf-8") as fh:
        for triplet_id in labels:
            entry = labels[triplet_id]
            fh.write(
                json.dumps(
                    {
                        "triplet_id": triplet_id,
                        "del_start": entry.deletion_span[0],
                        "del_end": entry.deletion_span[1],
                        "add_start": entry.addition_span[0],
                        "add_end": entry.addition_span[1],
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_span_labels(path: str) -> dict[str, SpanLabels]:
    labels: dict[str, SpanLabels] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                labels[obj["triplet_id"]] = SpanLabels(
                    deletion_span=(obj["del_start"], obj["del_end"]),
                    addition_span=(obj["add_start"], obj["add_end"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MalformedMarkers(f"bad span label on line {line_no}: {exc}") from exc
    return labels
