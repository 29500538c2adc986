"""Triplet sets and their marker-delimited linearizations.

A triplet set serializes as one ``[s] subject [r] relation [o] object [e]``
block per triplet, in order. At the token level the markers sit directly
against the field tokens; the single spaces around markers exist only in the
human-readable text form produced by :func:`to_text`.

Two parsers come back from token sequences: :func:`parse_strict` accepts
exactly the well-formed, catalog-valid linearizations (what constrained
decoding emits), while :func:`parse_lenient` is a total function that
salvages every well-formed block from arbitrary output and reports the rest
as diagnostics.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .catalog import Catalog
from .errors import StrictParseError
from .vocab import SPECIAL_TOKENS, Vocabulary


@dataclass(frozen=True)
class Triplet:
    """One (subject, relation, object) fact; fields are non-empty strings."""

    subject: str
    relation: str
    object: str

    def __post_init__(self):
        if not (self.subject and self.relation and self.object):
            raise ValueError(f"triplet fields must be non-empty: {self!r}")

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.subject, self.relation, self.object)


class TripletSet:
    """Ordered, duplicate-free collection of triplets.

    Equality is order-sensitive so render/parse round trips can be checked
    exactly; use :meth:`as_set` for set semantics.
    """

    __slots__ = ("triplets",)

    def __init__(self, triplets: Iterable[Triplet] = ()):
        items = tuple(triplets)
        if len(set(items)) != len(items):
            raise ValueError("duplicate triplets in TripletSet")
        object.__setattr__(self, "triplets", items)

    @classmethod
    def deduped(cls, triplets: Iterable[Triplet]) -> tuple["TripletSet", tuple[Triplet, ...]]:
        """Build keeping first occurrences; also return the dropped duplicates."""
        seen = set()
        kept: list[Triplet] = []
        dropped: list[Triplet] = []
        for t in triplets:
            if t in seen:
                dropped.append(t)
            else:
                seen.add(t)
                kept.append(t)
        return cls(kept), tuple(dropped)

    def __iter__(self) -> Iterator[Triplet]:
        return iter(self.triplets)

    def __len__(self) -> int:
        return len(self.triplets)

    def __contains__(self, item: Triplet) -> bool:
        return item in self.triplets

    def __getitem__(self, i: int) -> Triplet:
        return self.triplets[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, TripletSet) and self.triplets == other.triplets

    def __hash__(self) -> int:
        return hash(self.triplets)

    def __repr__(self) -> str:
        return f"TripletSet({list(self.triplets)!r})"

    def as_set(self) -> frozenset[Triplet]:
        return frozenset(self.triplets)

    def entity_names(self) -> set[str]:
        names = set()
        for t in self.triplets:
            names.add(t.subject)
            names.add(t.object)
        return names


class ParseIssue(enum.Enum):
    MALFORMED_MARKERS = "MalformedMarkers"
    EMPTY_FIELD = "EmptyField"
    OUT_OF_CATALOG_ENTITY = "OutOfCatalogEntity"
    OUT_OF_CATALOG_RELATION = "OutOfCatalogRelation"
    TRUNCATED_TRIPLET = "TruncatedTriplet"


@dataclass(frozen=True)
class ParseReport:
    """Lenient-parse result: salvaged triplets plus diagnostics.

    ``diagnostics`` is empty iff the input was a well-formed linearization
    (catalog membership is not checked here). Exact re-emissions of an
    already-seen triplet are collapsed and recorded in ``duplicates``
    rather than flagged as malformed.
    """

    triplets: TripletSet
    diagnostics: tuple[tuple[int, ParseIssue], ...] = ()
    duplicates: tuple[tuple[int, Triplet], ...] = ()


def render(ts: TripletSet, vocab: Vocabulary) -> tuple[int, ...]:
    """Token-level linearization; the empty set renders to the empty sequence."""
    out: list[int] = []
    for t in ts:
        out.append(vocab.subject)
        out.extend(vocab.encode(t.subject))
        out.append(vocab.relation)
        out.extend(vocab.encode(t.relation))
        out.append(vocab.object)
        out.extend(vocab.encode(t.object))
        out.append(vocab.end)
    return tuple(out)


def render_text(ts: TripletSet) -> str:
    """Human-readable linearization, single spaces around markers."""
    parts = []
    for t in ts:
        parts.append(f"[s] {t.subject} [r] {t.relation} [o] {t.object} [e]")
    return " ".join(parts)


def to_text(token_ids: Iterable[int], vocab: Vocabulary) -> str:
    """Render any token sequence as text, markers set off by single spaces."""
    words: list[str] = []
    run: list[str] = []
    for t in token_ids:
        if vocab.is_special(t):
            if run:
                words.append("".join(run))
                run = []
            words.append(vocab.piece(t))
        else:
            run.append(vocab.piece(t))
    if run:
        words.append("".join(run))
    return " ".join(words)


_MARKER_SPLIT = re.compile("(" + "|".join(re.escape(m) for m in SPECIAL_TOKENS) + ")")


def from_text(text: str, vocab: Vocabulary) -> tuple[int, ...]:
    """Inverse of :func:`to_text` for marker-delimited strings.

    Splits on marker literals, strips the separator whitespace runs around
    them, and encodes the remaining content pieces.
    """
    out: list[int] = []
    for i, piece in enumerate(_MARKER_SPLIT.split(text)):
        if i % 2 == 1:
            out.append(vocab.id_of(piece))
        else:
            content = piece.strip()
            if content:
                out.extend(vocab.encode(content))
    return tuple(out)


def parse_strict(seq: Iterable[int], catalog: Catalog) -> TripletSet:
    """Parse a token sequence that must be a catalog-valid linearization.

    Exact re-emissions of an earlier triplet are collapsed (first occurrence
    kept), matching what a constrained decoder may legally produce. Any
    other deviation raises :class:`StrictParseError` with the first
    diagnostic.
    """
    report = _parse(seq, catalog)
    if report.diagnostics:
        position, kind = report.diagnostics[0]
        raise StrictParseError(kind, position)
    return report.triplets


def parse_lenient(seq: Iterable[int], vocab: Vocabulary) -> ParseReport:
    """Best-effort parse of arbitrary decoder output; never raises.

    Every maximal well-formed ``[s]..[e]`` block becomes a triplet verbatim
    (no catalog check); malformed stretches and truncated tails are
    reported, never silently dropped.
    """
    return _parse(seq, catalog=None, vocab=vocab)


def _parse(seq: Iterable[int], catalog: Catalog | None, vocab: Vocabulary | None = None) -> ParseReport:
    if catalog is not None:
        vocab = catalog.vocab
    assert vocab is not None
    tokens = tuple(seq)
    triplets: list[Triplet] = []
    seen: set[Triplet] = set()
    diagnostics: list[tuple[int, ParseIssue]] = []
    duplicates: list[tuple[int, Triplet]] = []

    closer_of = {
        vocab.subject: vocab.relation,
        vocab.relation: vocab.object,
        vocab.object: vocab.end,
    }

    i = 0
    n = len(tokens)
    while i < n:
        if tokens[i] != vocab.subject:
            # garbage run up to the next [s]
            start = i
            while i < n and tokens[i] != vocab.subject:
                i += 1
            diagnostics.append((start, ParseIssue.MALFORMED_MARKERS))
            continue

        block_start = i
        i += 1  # past [s]
        fields: list[str] = []
        ok = True
        for marker in (vocab.subject, vocab.relation, vocab.object):
            want_close = closer_of[marker]
            field_start = i
            while i < n and not vocab.is_special(tokens[i]):
                i += 1
            if i >= n:
                diagnostics.append((block_start, ParseIssue.TRUNCATED_TRIPLET))
                ok = False
                break
            if tokens[i] != want_close:
                diagnostics.append((i, ParseIssue.MALFORMED_MARKERS))
                ok = False
                break
            if i == field_start:
                diagnostics.append((field_start, ParseIssue.EMPTY_FIELD))
                ok = False
                break
            fields.append(vocab.decode(tokens[field_start:i]))
            i += 1  # past the closing marker

        if not ok:
            # resume at the token that broke the block; an [s] there opens a
            # fresh block, anything else becomes a garbage run
            continue

        triplet = Triplet(*fields)
        if catalog is not None:
            if triplet.subject not in catalog.entities:
                diagnostics.append((block_start, ParseIssue.OUT_OF_CATALOG_ENTITY))
                continue
            if triplet.relation not in catalog.relations:
                diagnostics.append((block_start, ParseIssue.OUT_OF_CATALOG_RELATION))
                continue
            if triplet.object not in catalog.entities:
                diagnostics.append((block_start, ParseIssue.OUT_OF_CATALOG_ENTITY))
                continue
        if triplet in seen:
            duplicates.append((block_start, triplet))
        else:
            seen.add(triplet)
            triplets.append(triplet)

    return ParseReport(TripletSet(triplets), tuple(diagnostics), tuple(duplicates))
