"""Two-phase boosted decoding orchestration.

Phase 1 decodes an input twice with the base scorer, unconstrained and
constrained, giving two weak predictions. Phase 2 packs the input text and
both weak predictions into a single three-segment sequence; a boosted scorer
maps it to the final prediction, either constrained (guaranteed catalog-valid)
or unconstrained (parsed leniently). Training records for the boosted model
pair that assembled input with the curated gold target.

One boosting step is wired here, but nothing stops chaining: a boosted
scorer is just a scorer, so its output can feed another round.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

from .catalog import Catalog
from .curation import CuratedSample, decode_pass_over
from .decoding import beam_decode
from .linearize import ParseReport, TripletSet, from_text, parse_lenient, parse_strict, render, to_text
from .scorers import Scorer
from .vocab import Vocabulary

logger = logging.getLogger(__name__)

FinalMode = Literal["constrained", "unconstrained"]


@dataclass(frozen=True)
class WeakPredictions:
    """Phase-1 outputs: lenient view of the unconstrained decode and the
    (always catalog-valid) constrained decode."""

    unconstrained: ParseReport
    constrained: TripletSet


@dataclass(frozen=True)
class BoostedRecord:
    """One boosted-model training pair."""

    sample_id: str
    input: tuple[int, ...]
    target: tuple[int, ...]


def assemble_boosted_input(
    x: str,
    y_u: ParseReport,
    y_c: TripletSet,
    vocab: Vocabulary,
) -> tuple[int, ...]:
    """Concatenate text and weak predictions into one three-segment sequence.

    Layout: ``[text]`` x ``[unc]`` render(y_u.triplets) ``[con]`` render(y_c).
    The unconstrained triplets are rendered verbatim, surface errors and
    all; empty predictions leave their segment empty. Content encoding
    never produces segment-marker ids, so each marker occurs exactly once.
    """
    return (
        (vocab.text_segment,)
        + vocab.encode(x)
        + (vocab.unconstrained_segment,)
        + render(y_u.triplets, vocab)
        + (vocab.constrained_segment,)
        + render(y_c, vocab)
    )


def split_boosted_input(
    tokens: Sequence[int], vocab: Vocabulary
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Exact inverse of :func:`assemble_boosted_input` at the token level."""
    tokens = tuple(tokens)
    markers = (vocab.text_segment, vocab.unconstrained_segment, vocab.constrained_segment)
    positions = []
    for marker in markers:
        hits = [i for i, t in enumerate(tokens) if t == marker]
        if len(hits) != 1:
            raise ValueError(f"expected exactly one {vocab.piece(marker)!r} marker, found {len(hits)}")
        positions.append(hits[0])
    p_text, p_unc, p_con = positions
    if not (p_text == 0 and p_text < p_unc < p_con):
        raise ValueError("segment markers out of order")
    return tokens[p_text + 1 : p_unc], tokens[p_unc + 1 : p_con], tokens[p_con + 1 :]


def dual_decode(
    scorer: Scorer,
    text: str,
    catalog: Catalog,
    beam_width: int = 10,
    max_len: int = 256,
) -> tuple[WeakPredictions, tuple[int, ...], tuple[int, ...]]:
    """Phase 1 for one input: returns parsed weak predictions plus the raw
    unconstrained and constrained token sequences."""
    prompt = catalog.vocab.encode(text)
    eos = catalog.vocab.eos
    unconstrained = beam_decode(scorer, prompt, None, beam_width, max_len)
    constrained = beam_decode(scorer, prompt, catalog, beam_width, max_len)
    y_u = unconstrained[0].content(eos) if unconstrained else ()
    y_c = constrained[0].content(eos)
    weak = WeakPredictions(
        unconstrained=parse_lenient(y_u, catalog.vocab),
        constrained=parse_strict(y_c, catalog),
    )
    return weak, y_u, y_c


def build_boosted_training_set(
    curated: Sequence[CuratedSample],
    base_scorer: Scorer,
    catalog: Catalog,
    beam_width: int = 10,
    max_len: int = 256,
    jobs: int = 1,
) -> list[BoostedRecord]:
    """Phase-1 decode every curated sample and emit training records.

    The constrained weak decode of each sample runs under that sample's
    restricted catalog view; the target is the render of the curated gold.
    Per-sample failures are logged and skipped, the rest of the run
    continues.
    """
    vocab = catalog.vocab

    def build_one(sample: CuratedSample) -> BoostedRecord | tuple[str, Exception]:
        try:
            [(_, y_u, y_c)] = decode_pass_over([sample], base_scorer, catalog, beam_width, max_len)
            weak_unc = parse_lenient(y_u, vocab)
            weak_con = parse_strict(y_c, catalog)
            assembled = assemble_boosted_input(sample.base.text, weak_unc, weak_con, vocab)
            target = render(sample.curated_gold, vocab)
            return BoostedRecord(sample.base.id, assembled, target)
        except Exception as exc:
            return (sample.base.id, exc)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(build_one, curated))
    else:
        results = [build_one(c) for c in curated]

    records: list[BoostedRecord] = []
    failures: list[tuple[str, Exception]] = []
    for res in results:
        if isinstance(res, BoostedRecord):
            records.append(res)
        else:
            failures.append(res)
            logger.warning("skipping sample %s: %s", res[0], res[1])
    if failures:
        logger.warning("boosted training set: %d of %d samples failed", len(failures), len(curated))
    return records


@dataclass(frozen=True)
class BoostResult:
    """Final prediction of a boosted two-phase run."""

    triplets: TripletSet
    report: ParseReport
    weak: WeakPredictions
    final_tokens: tuple[int, ...]


def boost_infer(
    base_scorer: Scorer,
    boosted_scorer: Scorer,
    x: str,
    catalog: Catalog,
    final_mode: FinalMode = "constrained",
    beam_width: int = 10,
    max_len: int = 256,
) -> BoostResult:
    """Run both phases on one input.

    Phase 1 uses the full catalog (no per-sample restriction exists at
    inference time). In constrained final mode the result is strictly
    catalog-valid; in unconstrained mode the boosted output is parsed
    leniently and returned with its diagnostics.
    """
    if final_mode not in ("constrained", "unconstrained"):
        raise ValueError(f"unknown final_mode: {final_mode!r}")
    vocab = catalog.vocab
    weak, _, _ = dual_decode(base_scorer, x, catalog, beam_width, max_len)
    assembled = assemble_boosted_input(x, weak.unconstrained, weak.constrained, vocab)

    if final_mode == "constrained":
        hyps = beam_decode(boosted_scorer, assembled, catalog, beam_width, max_len)
        final = hyps[0].content(vocab.eos)
        triplets = parse_strict(final, catalog)
        report = parse_lenient(final, vocab)
    else:
        hyps = beam_decode(boosted_scorer, assembled, None, beam_width, max_len)
        final = hyps[0].content(vocab.eos) if hyps else ()
        report = parse_lenient(final, vocab)
        triplets = report.triplets
    return BoostResult(triplets=triplets, report=report, weak=weak, final_tokens=final)


# -- boosted-record files ------------------------------------------------------


def save_boosted_records(records: Iterable[BoostedRecord], vocab: Vocabulary, path) -> None:
    """JSONL with human-readable marker strings for both sequences."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "id": rec.sample_id,
                "input_text": to_text(rec.input, vocab),
                "target_text": to_text(rec.target, vocab),
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_boosted_records(path, vocab: Vocabulary) -> list[BoostedRecord]:
    out: list[BoostedRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append(
                BoostedRecord(
                    sample_id=str(obj["id"]),
                    input=from_text(obj["input_text"], vocab),
                    target=from_text(obj["target_text"], vocab),
                )
            )
    return out
