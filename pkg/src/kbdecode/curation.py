"""Training-data curation by simulated knowledge-base incompleteness.

A fraction of samples gets a handful of their gold entities "removed from
the KB": every gold triplet touching a removed entity is dropped from the
target, and constrained decoding for that sample runs under a catalog view
without those entities. Some curated targets end up empty, which is the
point: the downstream model must learn to emit nothing when the catalog
cannot express the text.

Randomness comes from a counter-based Philox stream keyed by the seed, with
the sample position as the counter, so runs are reproducible and samples are
independent of processing order.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .catalog import Catalog
from .decoding import beam_decode
from .errors import SampleError
from .linearize import Triplet, TripletSet
from .scorers import Scorer


@dataclass(frozen=True)
class Sample:
    """One dataset record: input text and its gold triplet set."""

    id: str
    text: str
    gold: TripletSet


@dataclass(frozen=True)
class CuratedSample:
    """A sample after (possible) entity removal.

    ``removed_entities`` is non-empty iff the sample was selected and had
    entities to remove; ``alteration_skipped`` marks samples that were
    selected but had no gold entities.
    """

    base: Sample
    removed_entities: frozenset[str] = frozenset()
    curated_gold: TripletSet = field(default_factory=TripletSet)
    alteration_skipped: bool = False


def _drop_entities(gold: TripletSet, removed: frozenset[str]) -> TripletSet:
    return TripletSet(
        t for t in gold if t.subject not in removed and t.object not in removed
    )


def _sample_rng(seed: int, position: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=position))


def curate(
    dataset: Sequence[Sample],
    alter_fraction: float = 0.4,
    max_removed: int = 3,
    seed: int = 0,
) -> list[CuratedSample]:
    """Independently alter each sample with probability ``alter_fraction``.

    An altered sample loses k ~ Uniform{1..min(max_removed, #entities)}
    distinct gold entities, drawn uniformly without replacement, and every
    triplet mentioning one of them. Deterministic given (dataset, seed).
    """
    if not 0.0 <= alter_fraction <= 1.0:
        raise ValueError("alter_fraction must be in [0, 1]")
    if max_removed < 1:
        raise ValueError("max_removed must be >= 1")

    out: list[CuratedSample] = []
    for position, sample in enumerate(dataset):
        rng = _sample_rng(seed, position)
        if rng.random() >= alter_fraction:
            out.append(CuratedSample(sample, frozenset(), sample.gold))
            continue
        entities = sorted(sample.gold.entity_names())
        if not entities:
            out.append(CuratedSample(sample, frozenset(), sample.gold, alteration_skipped=True))
            continue
        k = int(rng.integers(1, min(max_removed, len(entities)) + 1))
        picked = rng.choice(len(entities), size=k, replace=False)
        removed = frozenset(entities[i] for i in picked)
        out.append(CuratedSample(sample, removed, _drop_entities(sample.gold, removed)))
    return out


def decode_pass_over(
    dataset: Sequence[CuratedSample],
    base_scorer: Scorer,
    catalog: Catalog,
    beam_width: int = 10,
    max_len: int = 256,
    jobs: int = 1,
) -> list[tuple[CuratedSample, tuple[int, ...], tuple[int, ...]]]:
    """Dual weak decode per sample: unconstrained and view-constrained.

    The constrained pass runs under ``catalog.restrict(removed_entities)``,
    i.e. the per-sample KB view, so the decode cannot mention a removed
    entity. Returns (sample, unconstrained tokens, constrained tokens) in
    input order; decoder failures are re-raised tagged with the sample id.
    """
    eos = catalog.vocab.eos

    def run(curated: CuratedSample):
        try:
            prompt = catalog.vocab.encode(curated.base.text)
            view = catalog.restrict(curated.removed_entities) if curated.removed_entities else catalog
            unconstrained = beam_decode(base_scorer, prompt, None, beam_width, max_len)
            constrained = beam_decode(base_scorer, prompt, view, beam_width, max_len)
        except Exception as exc:
            raise SampleError(curated.base.id, exc) from exc
        y_u = unconstrained[0].content(eos) if unconstrained else ()
        y_c = constrained[0].content(eos)
        return curated, y_u, y_c

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, dataset))
    return [run(c) for c in dataset]


# -- JSONL dataset files -------------------------------------------------------


def _sample_from_obj(obj: dict) -> Sample:
    triplets = TripletSet(Triplet(s, r, o) for s, r, o in obj["triplets"])
    return Sample(id=str(obj["id"]), text=obj["text"], gold=triplets)


def load_samples(path, catalog: Catalog | None = None) -> list[Sample]:
    """Read dataset JSONL; with a catalog, gold validity is enforced."""
    samples: list[Sample] = []
    seen_ids = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            sample = _sample_from_obj(json.loads(line))
            if sample.id in seen_ids:
                raise ValueError(f"{path}:{lineno}: duplicate sample id {sample.id!r}")
            seen_ids.add(sample.id)
            if catalog is not None:
                for t in sample.gold:
                    if t.subject not in catalog.entities or t.object not in catalog.entities:
                        raise ValueError(f"{path}:{lineno}: out-of-catalog entity in gold")
                    if t.relation not in catalog.relations:
                        raise ValueError(f"{path}:{lineno}: out-of-catalog relation in gold")
            samples.append(sample)
    return samples


def _sample_obj(sample: Sample) -> dict:
    return {
        "id": sample.id,
        "text": sample.text,
        "triplets": [list(t.as_tuple()) for t in sample.gold],
    }


def save_samples(samples: Iterable[Sample], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(_sample_obj(sample), ensure_ascii=False) + "\n")


def load_curated_samples(path) -> list[CuratedSample]:
    out: list[CuratedSample] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            base = Sample(
                id=str(obj["id"]),
                text=obj["text"],
                gold=TripletSet(Triplet(s, r, o) for s, r, o in obj.get("base_triplets", obj["triplets"])),
            )
            removed = frozenset(obj.get("removed_entities", []))
            out.append(
                CuratedSample(
                    base=base,
                    removed_entities=removed,
                    curated_gold=TripletSet(Triplet(s, r, o) for s, r, o in obj["triplets"]),
                    alteration_skipped=bool(obj.get("alteration_skipped", False)),
                )
            )
    return out


def save_curated_samples(samples: Iterable[CuratedSample], path) -> None:
    """Curated JSONL: the base schema plus removed entities.

    ``triplets`` holds the curated gold (what training targets see);
    ``base_triplets`` preserves the original gold for round trips.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for curated in samples:
            obj = {
                "id": curated.base.id,
                "text": curated.base.text,
                "triplets": [list(t.as_tuple()) for t in curated.curated_gold],
                "removed_entities": sorted(curated.removed_entities),
                "base_triplets": [list(t.as_tuple()) for t in curated.base.gold],
            }
            if curated.alteration_skipped:
                obj["alteration_skipped"] = True
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
