"""Pluggable autoregressive token scorers.

A scorer maps a context (token-id sequence) to a full next-token
log-probability distribution. The decoder does all masking and
renormalization itself, so implementations must return a finite
log-probability for every vocabulary token, summing to one in probability
space. Anything with that contract plugs into the beam decoder; the two
built-ins here are deterministic file-loadable scorers used for testing and
for exercising pipelines without a neural model.
"""

from __future__ import annotations

import abc
import json
from typing import Mapping, Sequence

import numpy as np

from .errors import ScorerVocabularyMismatch
from .linearize import from_text, to_text
from .vocab import Vocabulary


class Scorer(abc.ABC):
    """Deterministic autoregressive token-probability source."""

    vocab: Vocabulary

    @abc.abstractmethod
    def next_logprobs(self, context: Sequence[int]) -> np.ndarray:
        """Log-probabilities over the full vocabulary given ``context``.

        The returned array is shared and must be treated as read-only.
        Same context, same distribution.
        """


def ensure_same_vocab(scorer: Scorer, vocab: Vocabulary) -> None:
    if scorer.vocab != vocab:
        raise ScorerVocabularyMismatch(
            "scorer and catalog vocabularies differ; rebuild one of them"
        )


def _distribution(vocab_size: int, weights: dict[int, float], epsilon: float) -> np.ndarray:
    probs = np.zeros(vocab_size, dtype=np.float64)
    total = sum(weights.values())
    if total <= 0:
        raise ValueError("distribution weights must sum to a positive value")
    for token_id, w in weights.items():
        if w < 0:
            raise ValueError("distribution weights must be non-negative")
        probs[token_id] = w / total
    probs = (1.0 - epsilon) * probs + epsilon / vocab_size
    return np.log(probs)


class TableScorer(Scorer):
    """Scorer backed by an explicit context -> distribution table.

    Contexts missing from the table fall back to a default distribution
    (uniform unless given). Every distribution is mixed with a small
    uniform component so all tokens keep finite log-probability.
    """

    def __init__(
        self,
        vocab: Vocabulary,
        table: Mapping[tuple[int, ...] | str, Mapping[str, float]] | None = None,
        default: Mapping[str, float] | None = None,
        epsilon: float = 1e-6,
    ):
        if not 0 < epsilon < 1:
            raise ValueError("epsilon must be in (0, 1)")
        self.vocab = vocab
        self.epsilon = epsilon
        self._table: dict[tuple[int, ...], np.ndarray] = {}
        for key, weights in (table or {}).items():
            ctx = self._context_key_parse(key) if isinstance(key, str) else tuple(key)
            self._table[ctx] = _distribution(len(vocab), self._resolve(weights), epsilon)
        if default is None:
            self._default = np.full(len(vocab), -np.log(len(vocab)))
        else:
            self._default = _distribution(len(vocab), self._resolve(default), epsilon)

    def _resolve(self, weights: Mapping[str, float]) -> dict[int, float]:
        resolved: dict[int, float] = {}
        for token, w in weights.items():
            resolved[self.vocab.id_of(token)] = resolved.get(self.vocab.id_of(token), 0.0) + w
        return resolved

    def next_logprobs(self, context: Sequence[int]) -> np.ndarray:
        return self._table.get(tuple(context), self._default)

    @classmethod
    def scripted(
        cls,
        vocab: Vocabulary,
        prompt: Sequence[int],
        continuations: Sequence[str],
        weight_decay: float = 0.5,
        epsilon: float = 1e-6,
    ) -> "TableScorer":
        """Scorer whose argmax path spells out the given continuations.

        Each continuation is a marker-delimited string; its token path gets
        table entries from the prompt onward, ending in ``[eos]``. Where
        continuations share a context, earlier ones receive geometrically
        larger weight, so the first listed wins unconstrained while later
        ones take over once masking rules the first out.
        """
        entries: dict[tuple[int, ...], dict[str, float]] = {}
        cls._script_into(entries, vocab, prompt, continuations, weight_decay)
        return cls(vocab, entries, epsilon=epsilon)

    @classmethod
    def scripted_many(
        cls,
        vocab: Vocabulary,
        scripts: Sequence[tuple[Sequence[int], Sequence[str]]],
        weight_decay: float = 0.5,
        epsilon: float = 1e-6,
    ) -> "TableScorer":
        """One table covering several (prompt, continuations) scripts."""
        entries: dict[tuple[int, ...], dict[str, float]] = {}
        for prompt, continuations in scripts:
            cls._script_into(entries, vocab, prompt, continuations, weight_decay)
        return cls(vocab, entries, epsilon=epsilon)

    @staticmethod
    def _script_into(entries, vocab, prompt, continuations, weight_decay) -> None:
        weight = 1.0
        for cont in continuations:
            tokens = from_text(cont, vocab) + (vocab.eos,)
            prefix = tuple(prompt)
            for tok in tokens:
                entry = entries.setdefault(prefix, {})
                piece = vocab.piece(tok)
                entry[piece] = entry.get(piece, 0.0) + weight
                prefix = prefix + (tok,)
            weight *= weight_decay

    def _context_key_text(self, ctx: tuple[int, ...]) -> str:
        # text form when it round-trips exactly, otherwise explicit ids
        text = to_text(ctx, self.vocab)
        if not text.startswith("#ids") and from_text(text, self.vocab) == ctx:
            return text
        return "#ids " + ",".join(map(str, ctx))

    def _context_key_parse(self, key: str) -> tuple[int, ...]:
        if key.startswith("#ids"):
            body = key[4:].strip()
            return tuple(int(x) for x in body.split(",")) if body else ()
        return from_text(key, self.vocab)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        table = {}
        for ctx, logp in sorted(self._table.items()):
            probs = np.exp(logp)
            entry = {
                self.vocab.piece(i): float(p)
                for i, p in enumerate(probs)
                if p > 2 * self.epsilon / len(self.vocab)
            }
            table[self._context_key_text(ctx)] = entry
        default_probs = np.exp(self._default)
        default = {
            self.vocab.piece(i): float(p)
            for i, p in enumerate(default_probs)
            if p > 2 * self.epsilon / len(self.vocab)
        }
        return {
            "format": "kbdecode/table-scorer@1",
            "vocab": self.vocab.to_dict(),
            "epsilon": self.epsilon,
            "default": default or None,
            "table": table,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TableScorer":
        vocab = Vocabulary.from_dict(payload["vocab"])
        return cls(
            vocab,
            payload.get("table") or {},
            default=payload.get("default"),
            epsilon=payload.get("epsilon", 1e-6),
        )


class NgramScorer(Scorer):
    """Laplace-smoothed order-K n-gram scorer fit on plain text."""

    def __init__(self, vocab: Vocabulary, order: int, counts: Mapping[tuple[int, ...], Mapping[int, int]]):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.vocab = vocab
        self.order = order
        self._counts: dict[tuple[int, ...], dict[int, int]] = {
            tuple(ctx): dict(nxt) for ctx, nxt in counts.items()
        }
        self._totals = {ctx: sum(nxt.values()) for ctx, nxt in self._counts.items()}

    @classmethod
    def fit(cls, text: str, order: int, vocab: Vocabulary | None = None) -> "NgramScorer":
        if vocab is None:
            vocab = Vocabulary.for_texts([text])
        stream = (vocab.bos,) * (order - 1) + vocab.encode(text) + (vocab.eos,)
        counts: dict[tuple[int, ...], dict[int, int]] = {}
        for i in range(order - 1, len(stream)):
            ctx = stream[i - order + 1 : i]
            nxt = counts.setdefault(ctx, {})
            nxt[stream[i]] = nxt.get(stream[i], 0) + 1
        return cls(vocab, order, counts)

    def _context_key(self, context: Sequence[int]) -> tuple[int, ...]:
        padded = (self.vocab.bos,) * (self.order - 1) + tuple(context)
        if self.order == 1:
            return ()
        return padded[-(self.order - 1):]

    def next_logprobs(self, context: Sequence[int]) -> np.ndarray:
        key = self._context_key(context)
        v = len(self.vocab)
        arr = np.ones(v, dtype=np.float64)
        total = self._totals.get(key, 0)
        for tok, c in self._counts.get(key, {}).items():
            arr[tok] += c
        return np.log(arr / (total + v))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": "kbdecode/ngram-scorer@1",
            "vocab": self.vocab.to_dict(),
            "order": self.order,
            "counts": {
                ",".join(map(str, ctx)): {str(t): c for t, c in sorted(nxt.items())}
                for ctx, nxt in sorted(self._counts.items())
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "NgramScorer":
        vocab = Vocabulary.from_dict(payload["vocab"])
        counts = {}
        for ctx_key, nxt in payload["counts"].items():
            ctx = tuple(int(x) for x in ctx_key.split(",")) if ctx_key else ()
            counts[ctx] = {int(t): int(c) for t, c in nxt.items()}
        return cls(vocab, payload["order"], counts)


_FORMATS = {
    "kbdecode/table-scorer@1": TableScorer,
    "kbdecode/ngram-scorer@1": NgramScorer,
}


def save_scorer(scorer: TableScorer | NgramScorer, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scorer.to_dict(), fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def load_scorer(path) -> Scorer:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    fmt = payload.get("format")
    if fmt not in _FORMATS:
        raise ValueError(f"not a scorer file: format={fmt!r}")
    return _FORMATS[fmt].from_dict(payload)
