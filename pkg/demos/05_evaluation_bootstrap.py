"""Scoring predictions: micro/macro, bootstrap intervals, frequency buckets.

Micro pools counts over documents; macro averages per-relation scores, so a
rare relation failing everywhere drags macro far more than micro. Intervals
come from 50 seeded bootstrap resamples over documents.
"""

from kbdecode import (
    EvalBatch,
    Triplet,
    TripletSet,
    bucket_report,
    error_fraction_report,
    macro_scores,
    micro_scores,
    scores_with_ci,
)


def ts(*triples):
    return TripletSet([Triplet(*t) for t in triples])


pairs = []
for i in range(12):
    gold = ts((f"E{i}", "common", f"F{i}"), (f"E{i}", "rare", f"G{i}"))
    if i % 3 == 0:
        pred = gold  # perfect document
    else:
        pred = ts((f"E{i}", "common", f"F{i}"), (f"E{i}", "rare", "WRONG"))
    pairs.append((f"doc{i}", pred, gold))
batch = EvalBatch.of(pairs)

micro = micro_scores(batch)
macro = macro_scores(batch)
print(f"micro  P={micro.precision:.3f} R={micro.recall:.3f} F1={micro.f1:.3f}")
print(f"macro  P={macro.precision:.3f} R={macro.recall:.3f} F1={macro.f1:.3f}"
      f"  (over {macro.n_relations} relations)")

with_ci = scores_with_ci(batch, "micro", n_boot=50, level=0.95, seed=7)
lo, hi = with_ci.ci["f1"]
print(f"micro F1 95% CI from 50 bootstrap resamples: [{lo:.3f}, {hi:.3f}]")

table = bucket_report(batch, {"common": 900, "rare": 3}, n_boot=50, seed=7)
print("\nrelation-frequency buckets (count in [2^i, 2^(i+1))):")
for bucket in table.buckets:
    lo, hi = bucket.micro.ci["f1"]
    print(f"  2^{bucket.exponent:<2} {bucket.relations}: "
          f"F1={bucket.micro.f1:.3f} CI=[{lo:.3f}, {hi:.3f}]")

annotations = [
    (f"doc{i}", {"Unexhaustive": i % 4 == 0, "IncorrectRelated": i % 3 != 0})
    for i in range(12)
]
print("\nerror-annotation fractions with 95% CI:")
for category, frac in error_fraction_report(annotations, n_boot=50, seed=7).items():
    print(f"  {category:<20} {frac.fraction:.2f} [{frac.low:.2f}, {frac.high:.2f}]")
