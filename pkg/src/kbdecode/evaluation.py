"""Micro/macro scoring, bootstrap intervals, frequency buckets, error tallies.

A predicted fact counts only on exact (subject, relation, object) match.
Micro scores pool counts over documents; macro scores average per-relation
scores over a relation universe (by default the relations seen in the batch,
optionally a full catalog list). Zero-denominator terms score 1.0: with
nothing predicted (or nothing to recall) there is nothing wrong, which keeps
the all-empty edge cases well defined.

Confidence intervals come from percentile bootstrap over documents with a
counter-based per-resample stream, so intervals are reproducible and
resamples could run concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .linearize import Triplet, TripletSet

ERROR_CATEGORIES = (
    "Unexhaustive",
    "IncorrectRelated",
    "MisclassifiedEntity",
    "Unrelated",
    "EntityCentered",
)


@dataclass(frozen=True)
class EvalBatch:
    """Per-document (predicted, gold) triplet sets; doc ids unique."""

    pairs: tuple[tuple[str, TripletSet, TripletSet], ...]

    def __post_init__(self):
        ids = [doc_id for doc_id, _, _ in self.pairs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate doc ids in EvalBatch")

    @classmethod
    def of(cls, pairs: Iterable[tuple[str, TripletSet, TripletSet]]) -> "EvalBatch":
        return cls(tuple(pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def relations(self) -> set[str]:
        rels = set()
        for _, pred, gold in self.pairs:
            rels.update(t.relation for t in pred)
            rels.update(t.relation for t in gold)
        return rels

    def resample(self, indices: Sequence[int]) -> "EvalBatch":
        # bootstrap replicate: duplicated docs get distinct synthetic ids
        pairs = []
        for j, i in enumerate(indices):
            doc_id, pred, gold = self.pairs[i]
            pairs.append((f"{doc_id}#{j}", pred, gold))
        return EvalBatch(tuple(pairs))

    def filter_relations(self, relations: set[str]) -> "EvalBatch":
        pairs = []
        for doc_id, pred, gold in self.pairs:
            pairs.append(
                (
                    doc_id,
                    TripletSet(t for t in pred if t.relation in relations),
                    TripletSet(t for t in gold if t.relation in relations),
                )
            )
        return EvalBatch(tuple(pairs))


@dataclass(frozen=True)
class ScoreReport:
    precision: float
    recall: float
    f1: float
    n_docs: int
    n_relations: int
    ci: dict[str, tuple[float, float]] | None = None


def _ratio(num: int, den: int) -> float:
    # empty denominator is vacuous success: nothing there to be wrong
    return num / den if den else 1.0


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def micro_scores(batch: EvalBatch) -> ScoreReport:
    """Instance-weighted scores pooled over all documents."""
    correct = 0
    n_pred = 0
    n_gold = 0
    for _, pred, gold in batch.pairs:
        correct += len(pred.as_set() & gold.as_set())
        n_pred += len(pred)
        n_gold += len(gold)
    precision = _ratio(correct, n_pred)
    recall = _ratio(correct, n_gold)
    return ScoreReport(
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        n_docs=len(batch),
        n_relations=len(batch.relations()),
    )


def macro_scores(
    batch: EvalBatch,
    universe: Iterable[str] | None = None,
    f1_mode: str = "mean_per_relation",
) -> ScoreReport:
    """Relation-weighted scores.

    Per relation, precision and recall pool the relation's triplets over
    all documents; the macro score is their unweighted mean over the
    universe. With no explicit universe, relations appearing in the batch's
    gold or predictions are used. ``f1_mode`` picks between the mean of
    per-relation F1 (default) and the harmonic mean of macro-precision and
    macro-recall.
    """
    if f1_mode not in ("mean_per_relation", "harmonic"):
        raise ValueError(f"unknown f1_mode: {f1_mode!r}")
    relations = sorted(set(universe)) if universe is not None else sorted(batch.relations())
    if not relations:
        # no relations anywhere: vacuously perfect, matching the micro convention
        return ScoreReport(1.0, 1.0, _f1(1.0, 1.0), len(batch), 0)

    precisions = []
    recalls = []
    f1s = []
    for r in relations:
        correct = 0
        n_pred = 0
        n_gold = 0
        for _, pred, gold in batch.pairs:
            p_r = {t for t in pred.as_set() if t.relation == r}
            g_r = {t for t in gold.as_set() if t.relation == r}
            correct += len(p_r & g_r)
            n_pred += len(p_r)
            n_gold += len(g_r)
        p = _ratio(correct, n_pred)
        rec = _ratio(correct, n_gold)
        precisions.append(p)
        recalls.append(rec)
        f1s.append(_f1(p, rec))

    precision = sum(precisions) / len(relations)
    recall = sum(recalls) / len(relations)
    f1 = sum(f1s) / len(relations) if f1_mode == "mean_per_relation" else _f1(precision, recall)
    return ScoreReport(precision, recall, f1, len(batch), len(relations))


def bootstrap_ci(
    batch: EvalBatch,
    metric: Callable[[EvalBatch], float],
    n_boot: int = 50,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile interval of ``metric`` over document resamples."""
    if len(batch) == 0:
        raise ValueError("bootstrap over an empty batch")
    values = _bootstrap_values(batch, lambda b: (metric(b),), n_boot, seed)
    return _percentile_interval([v[0] for v in values], level)


def _bootstrap_values(
    batch: EvalBatch,
    metrics: Callable[[EvalBatch], tuple[float, ...]],
    n_boot: int,
    seed: int,
) -> list[tuple[float, ...]]:
    # resample in doc-id order so intervals do not depend on input order
    canonical = EvalBatch(tuple(sorted(batch.pairs, key=lambda p: p[0])))
    n = len(canonical)
    values = []
    for b in range(n_boot):
        rng = np.random.Generator(np.random.Philox(key=seed, counter=b))
        indices = rng.integers(0, n, size=n)
        values.append(metrics(canonical.resample([int(i) for i in indices])))
    return values


def _percentile_interval(values: Sequence[float], level: float) -> tuple[float, float]:
    if not 0 < level < 1:
        raise ValueError("level must be in (0, 1)")
    alpha = (1.0 - level) / 2.0
    low, high = np.quantile(np.asarray(values, dtype=np.float64), [alpha, 1.0 - alpha])
    return float(low), float(high)


def scores_with_ci(
    batch: EvalBatch,
    kind: str = "micro",
    universe: Iterable[str] | None = None,
    f1_mode: str = "mean_per_relation",
    n_boot: int = 50,
    level: float = 0.95,
    seed: int = 0,
) -> ScoreReport:
    """Point scores plus bootstrap intervals for all three metrics.

    One set of resamples feeds all three intervals, so precision, recall
    and F1 are judged on the same replicates.
    """
    if kind == "micro":
        compute = micro_scores
    elif kind == "macro":
        def compute(b: EvalBatch) -> ScoreReport:
            return macro_scores(b, universe=universe, f1_mode=f1_mode)
    else:
        raise ValueError(f"unknown score kind: {kind!r}")

    point = compute(batch)
    triples = _bootstrap_values(
        batch,
        lambda b: (lambda s: (s.precision, s.recall, s.f1))(compute(b)),
        n_boot,
        seed,
    )
    ci = {
        "precision": _percentile_interval([t[0] for t in triples], level),
        "recall": _percentile_interval([t[1] for t in triples], level),
        "f1": _percentile_interval([t[2] for t in triples], level),
    }
    return ScoreReport(point.precision, point.recall, point.f1, point.n_docs, point.n_relations, ci)


# -- relation-frequency buckets -------------------------------------------------


@dataclass(frozen=True)
class BucketScore:
    """Relations whose corpus count lies in [2^exponent, 2^(exponent+1))."""

    exponent: int
    relations: tuple[str, ...]
    micro: ScoreReport
    n_gold: int
    n_pred: int


@dataclass(frozen=True)
class BucketTable:
    buckets: tuple[BucketScore, ...]
    zero_count_relations: tuple[str, ...]


def bucket_report(
    batch: EvalBatch,
    relation_counts: Mapping[str, int],
    n_boot: int = 50,
    level: float = 0.95,
    seed: int = 0,
) -> BucketTable:
    """Micro-F1 (with CI) per relation-frequency bucket.

    Bucket membership uses the given corpus counts, not batch counts:
    relation with count c goes to bucket floor(log2(c)). Relations with a
    zero or missing count are left out of every bucket and reported
    separately. Per-bucket scores consider only triplets whose relation is
    in the bucket.
    """
    for r, c in relation_counts.items():
        if c < 0:
            raise ValueError(f"negative count for relation {r!r}")
    zero = {r for r, c in relation_counts.items() if c == 0}
    zero.update(r for r in batch.relations() if r not in relation_counts)

    by_exponent: dict[int, list[str]] = {}
    for r, c in relation_counts.items():
        if c > 0:
            by_exponent.setdefault(c.bit_length() - 1, []).append(r)

    buckets = []
    for exponent in sorted(by_exponent):
        relations = tuple(sorted(by_exponent[exponent]))
        filtered = batch.filter_relations(set(relations))
        micro = scores_with_ci(filtered, "micro", n_boot=n_boot, level=level, seed=seed)
        n_gold = sum(len(g) for _, _, g in filtered.pairs)
        n_pred = sum(len(p) for _, p, _ in filtered.pairs)
        buckets.append(BucketScore(exponent, relations, micro, n_gold, n_pred))
    return BucketTable(tuple(buckets), tuple(sorted(zero)))


# -- error-annotation aggregation -----------------------------------------------


@dataclass(frozen=True)
class FractionWithCI:
    fraction: float
    low: float
    high: float


def error_fraction_report(
    annotations: Sequence[tuple[str, Mapping[str, bool]]],
    n_boot: int = 50,
    level: float = 0.95,
    seed: int = 0,
) -> dict[str, FractionWithCI]:
    """Per-category fraction of flagged samples with bootstrap CI.

    Categories may co-occur on a sample; each fraction is computed
    independently over all samples.
    """
    if not annotations:
        raise ValueError("no annotations given")
    for sample_id, flags in annotations:
        unknown = set(flags) - set(ERROR_CATEGORIES)
        if unknown:
            raise ValueError(f"sample {sample_id!r}: unknown error categories {sorted(unknown)}")

    n = len(annotations)
    matrix = {
        cat: np.array([bool(flags.get(cat, False)) for _, flags in annotations], dtype=np.float64)
        for cat in ERROR_CATEGORIES
    }
    out: dict[str, FractionWithCI] = {}
    resample_rows = []
    for b in range(n_boot):
        rng = np.random.Generator(np.random.Philox(key=seed, counter=b))
        resample_rows.append(rng.integers(0, n, size=n))
    for cat in ERROR_CATEGORIES:
        flags = matrix[cat]
        values = [float(flags[idx].mean()) for idx in resample_rows]
        low, high = _percentile_interval(values, level)
        out[cat] = FractionWithCI(float(flags.mean()), low, high)
    return out


# -- files -----------------------------------------------------------------------


def load_predictions(path) -> list[tuple[str, TripletSet]]:
    """Predictions JSONL: {"id": ..., "triplets": [[s, r, o], ...]}."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            ts, _ = TripletSet.deduped(Triplet(s, r, o) for s, r, o in obj["triplets"])
            out.append((str(obj["id"]), ts))
    return out


def save_predictions(predictions: Iterable[tuple[str, TripletSet]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, ts in predictions:
            obj = {"id": doc_id, "triplets": [list(t.as_tuple()) for t in ts]}
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def build_eval_batch(
    predictions: Sequence[tuple[str, TripletSet]],
    golds: Sequence[tuple[str, TripletSet]],
) -> EvalBatch:
    """Align predictions to gold docs by id; missing predictions are empty."""
    pred_by_id = dict(predictions)
    unknown = set(pred_by_id) - {doc_id for doc_id, _ in golds}
    if unknown:
        raise ValueError(f"predictions for unknown doc ids: {sorted(unknown)[:5]}")
    pairs = []
    for doc_id, gold in golds:
        pairs.append((doc_id, pred_by_id.get(doc_id, TripletSet()), gold))
    return EvalBatch(tuple(pairs))


def load_relation_counts(path) -> dict[str, int]:
    """Tab-separated ``relation<TAB>count`` lines."""
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                relation, count = line.rsplit("\t", 1)
                counts[relation] = int(count)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: expected 'relation<TAB>count'") from exc
    return counts
