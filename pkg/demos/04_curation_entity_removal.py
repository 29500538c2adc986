"""Curating boosted-model training data by simulated KB incompleteness.

A seeded pass alters ~40% of samples: up to three of their gold entities
are "removed from the KB", every triplet touching them leaves the target,
and the constrained weak decode for that sample runs under the restricted
catalog view. Some targets become empty on purpose.
"""

from collections import Counter

import numpy as np

from kbdecode import Catalog, Sample, Triplet, TripletSet, Vocabulary, curate

vocab = Vocabulary.ascii_basic()
entities = [f"Entity{i}" for i in range(12)]
catalog = Catalog(set(entities), {"linked to", "part of"}, vocab)

rng = np.random.Generator(np.random.Philox(key=7, counter=0))
samples = []
for i in range(2000):
    picked = rng.choice(len(entities), size=4, replace=False)
    triplets = TripletSet(
        Triplet(entities[int(picked[j])], "linked to", entities[int(picked[j + 1])])
        for j in range(3)
    )
    samples.append(Sample(f"s{i:04d}", f"synthetic document {i}", triplets))

curated = curate(samples, alter_fraction=0.4, max_removed=3, seed=99)

altered = [c for c in curated if c.removed_entities]
print(f"altered {len(altered)} of {len(curated)} samples "
      f"({len(altered) / len(curated):.1%}, target 40%)")
print("removal-count distribution:", dict(Counter(len(c.removed_entities) for c in altered)))
empty_targets = sum(1 for c in curated if len(c.curated_gold) == 0)
print(f"samples whose curated target became empty: {empty_targets}")

example = next(c for c in altered if len(c.curated_gold) < len(c.base.gold))
print("\nexample alteration:")
print("  removed entities:", sorted(example.removed_entities))
print("  gold before:", [t.as_tuple() for t in example.base.gold])
print("  gold after: ", [t.as_tuple() for t in example.curated_gold])

view = catalog.restrict(example.removed_entities)
print("  restricted catalog has", len(view.entities), "of", len(catalog.entities), "entities")
