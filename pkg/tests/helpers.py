"""Shared test utilities: seeded random scorers, random instance generators,
and independent oracles (naive metrics, exhaustive constrained enumeration).

The oracles deliberately avoid the library's trie, grammar and scoring code:
they re-derive allowed-token sets from a plain dict trie and re-walk scores
with their own accumulator, so agreement with the library is meaningful.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from kbdecode import Catalog, Sample, Scorer, Triplet, TripletSet, Vocabulary


class SeededRandomScorer(Scorer):
    """Random-table scorer: an i.i.d. random distribution per context,
    deterministic in (seed, context) and cached for reuse."""

    def __init__(self, vocab: Vocabulary, seed: int):
        self.vocab = vocab
        self.seed = seed
        self._cache: dict[tuple[int, ...], np.ndarray] = {}

    def next_logprobs(self, context):
        key = tuple(context)
        hit = self._cache.get(key)
        if hit is None:
            digest = hashlib.blake2b(
                np.array([self.seed, *key], dtype=np.int64).tobytes(), digest_size=16
            ).digest()
            rng = np.random.Generator(
                np.random.Philox(key=self.seed, counter=int.from_bytes(digest, "little"))
            )
            weights = rng.random(len(self.vocab)) + 1e-3
            hit = np.log(weights / weights.sum())
            self._cache[key] = hit
        return hit


def random_names(rng: np.random.Generator, count: int, alphabet: str, max_len: int) -> list[str]:
    names: set[str] = set()
    while len(names) < count:
        n = int(rng.integers(1, max_len + 1))
        names.add("".join(alphabet[int(i)] for i in rng.integers(0, len(alphabet), size=n)))
    return sorted(names)


def random_catalog(
    rng: np.random.Generator,
    max_entities: int = 10,
    max_relations: int = 5,
    entity_alphabet: str = "ab",
    relation_alphabet: str = "xy",
    max_name_len: int = 3,
) -> Catalog:
    vocab = Vocabulary.from_characters(entity_alphabet + relation_alphabet)
    n_e = int(rng.integers(1, max_entities + 1))
    n_r = int(rng.integers(1, max_relations + 1))
    entities = random_names(rng, n_e, entity_alphabet, max_name_len)
    relations = random_names(rng, n_r, relation_alphabet, max_name_len)
    return Catalog(entities, relations, vocab)


def random_triplet_set(rng: np.random.Generator, catalog: Catalog, max_size: int = 4) -> TripletSet:
    entities = sorted(catalog.entities)
    relations = sorted(catalog.relations)
    size = int(rng.integers(0, max_size + 1))
    seen = set()
    out = []
    for _ in range(size):
        t = Triplet(
            entities[int(rng.integers(0, len(entities)))],
            relations[int(rng.integers(0, len(relations)))],
            entities[int(rng.integers(0, len(entities)))],
        )
        if t not in seen:
            seen.add(t)
            out.append(t)
    return TripletSet(out)


def make_samples(rng: np.random.Generator, catalog: Catalog, count: int, max_size: int = 4) -> list[Sample]:
    return [
        Sample(f"s{i:05d}", f"doc {i}", random_triplet_set(rng, catalog, max_size))
        for i in range(count)
    ]


# -- naive metric oracle (loops and lists, no set algebra) -------------------------


def naive_micro(batch) -> tuple[float, float, float]:
    correct = 0
    n_pred = 0
    n_gold = 0
    for _, pred, gold in batch.pairs:
        for p in pred:
            for g in gold:
                if (
                    p.subject == g.subject
                    and p.relation == g.relation
                    and p.object == g.object
                ):
                    correct += 1
                    break
        n_pred += len(pred)
        n_gold += len(gold)
    precision = correct / n_pred if n_pred else 1.0
    recall = correct / n_gold if n_gold else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def naive_macro(batch) -> tuple[float, float, float]:
    relations = []
    for _, pred, gold in batch.pairs:
        for t in list(pred) + list(gold):
            if t.relation not in relations:
                relations.append(t.relation)
    relations.sort()
    if not relations:
        return 1.0, 1.0, 1.0
    precisions = []
    recalls = []
    f1s = []
    for r in relations:
        correct = 0
        n_pred = 0
        n_gold = 0
        for _, pred, gold in batch.pairs:
            p_r = [t for t in pred if t.relation == r]
            g_r = [t for t in gold if t.relation == r]
            for p in p_r:
                for g in g_r:
                    if p.subject == g.subject and p.object == g.object:
                        correct += 1
                        break
            n_pred += len(p_r)
            n_gold += len(g_r)
        p = correct / n_pred if n_pred else 1.0
        rec = correct / n_gold if n_gold else 1.0
        precisions.append(p)
        recalls.append(rec)
        f1s.append(2 * p * rec / (p + rec) if p + rec else 0.0)
    return (
        sum(precisions) / len(relations),
        sum(recalls) / len(relations),
        sum(f1s) / len(relations),
    )


# -- exhaustive constrained-decoding oracle ------------------------------------------


class _DictTrie:
    """Independent trie over name tokenizations, plain nested dicts."""

    END = object()

    def __init__(self, names, vocab):
        self.root: dict = {}
        for name in names:
            node = self.root
            for t in vocab.encode(name):
                node = node.setdefault(t, {})
            node[self.END] = True


class ExhaustiveOracle:
    """Enumerates every constrained-legal finished sequence within a length
    budget and scores it by walking the masked, renormalized distributions.

    Re-implements the grammar (boundary/subject/relation/object), the trie,
    and the log-sum-exp renormalization without touching the library's
    decoder internals.
    """

    def __init__(self, catalog: Catalog):
        self.vocab = catalog.vocab
        self.ent = _DictTrie(sorted(catalog.entities), catalog.vocab)
        self.rel = _DictTrie(sorted(catalog.relations), catalog.vocab)

    # grammar state: ("boundary",) or (phase, trie-node) with phase in s/r/o
    def _allowed(self, state) -> list[int]:
        v = self.vocab
        if state[0] == "boundary":
            allowed = [v.eos]
            if self.ent.root and self.rel.root:
                allowed.append(v.subject)
            return sorted(allowed)
        phase, node = state
        allowed = [t for t in node if t is not _DictTrie.END]
        if _DictTrie.END in node:
            allowed.append({"s": v.relation, "r": v.object, "o": v.end}[phase])
        return sorted(allowed)

    def _step(self, state, token):
        v = self.vocab
        if state[0] == "boundary":
            assert token == v.subject
            return ("s", self.ent.root)
        phase, node = state
        if phase == "s" and token == v.relation:
            return ("r", self.rel.root)
        if phase == "r" and token == v.object:
            return ("o", self.ent.root)
        if phase == "o" and token == v.end:
            return ("boundary",)
        return (phase, node[token])

    def _renorm(self, logprobs, allowed):
        sub = logprobs[list(allowed)]
        m = float(sub.max())
        logz = m + math.log(float(np.exp(sub - m).sum()))
        return sub - logz

    def enumerate(self, scorer: Scorer, prompt, max_len: int) -> list[tuple[tuple[int, ...], float]]:
        """All valid finished sequences (eos included) of length <= max_len,
        ranked by (-score, tokens)."""
        prompt = tuple(prompt)
        results: list[tuple[tuple[int, ...], float]] = []
        eos = self.vocab.eos

        def rec(state, tokens, score):
            if len(tokens) >= max_len:
                return
            allowed = self._allowed(state)
            renormed = self._renorm(scorer.next_logprobs(prompt + tokens), allowed)
            for tok, lp in zip(allowed, renormed):
                s = score + float(lp)
                if tok == eos:
                    results.append((tokens + (tok,), s))
                else:
                    rec(self._step(state, tok), tokens + (tok,), s)

        rec(("boundary",), (), 0.0)
        results.sort(key=lambda r: (-r[1], r[0]))
        return results

    def width_for_exactness(self, max_len: int) -> int:
        """Beam width that provably prevents any eviction: the max number of
        step candidates (legal prefixes plus finishes) at any depth."""
        eos = self.vocab.eos

        def key_of(state):
            return ("boundary",) if state[0] == "boundary" else (state[0], id(state[1]))

        level = {key_of(("boundary",)): (("boundary",), 1)}
        worst = 1
        for _ in range(max_len):
            nxt: dict = {}
            finishes = 0
            for state, count in level.values():
                for tok in self._allowed(state):
                    if tok == eos:
                        finishes += count
                    else:
                        succ = self._step(state, tok)
                        k = key_of(succ)
                        prev = nxt.get(k)
                        nxt[k] = (succ, (prev[1] if prev else 0) + count)
            candidates = finishes + sum(c for _, c in nxt.values())
            worst = max(worst, candidates)
            level = nxt
            if not level:
                break
        return worst
