"""Beam search with grammar-and-catalog token masking.

Constrained decoding walks a small grammar (triplet boundary, subject,
relation, object) crossed with the catalog prefix indexes; at every step the
scorer's distribution is masked to the tokens that keep the sequence
extendable to a strictly parseable linearization, then renormalized. With no
catalog the scorer's raw distribution is used and any token may follow any
context.

Scores are raw sums of per-step log-probabilities: no length normalization,
ties broken by token-id-lexicographic order, so results are exactly
reproducible and can be checked against exhaustive enumeration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .catalog import Catalog, PrefixIndex
from .errors import IllegalTransitionError, NoValidContinuationError
from .linearize import Triplet
from .scorers import Scorer, ensure_same_vocab


class GrammarPhase(enum.Enum):
    BOUNDARY = "boundary"
    SUBJECT = "subject"
    RELATION = "relation"
    OBJECT = "object"
    DONE = "done"


@dataclass(frozen=True)
class DecoderState:
    """Position in the linearization grammar x the prefix indexes.

    ``node`` tracks the current prefix-index node while inside a field;
    ``emitted`` collects completed triplets (catalog-valid by construction,
    re-derivations included; deduplication happens at parse time).
    """

    phase: GrammarPhase = GrammarPhase.BOUNDARY
    node: int | None = None
    partial: tuple[int, ...] = ()
    pending_subject: str | None = None
    pending_relation: str | None = None
    emitted: tuple[Triplet, ...] = ()


INITIAL_STATE = DecoderState()

_FIELD_CLOSER = {
    GrammarPhase.SUBJECT: "relation",
    GrammarPhase.RELATION: "object",
    GrammarPhase.OBJECT: "end",
}


def _field_index(state: DecoderState, catalog: Catalog) -> PrefixIndex:
    if state.phase == GrammarPhase.RELATION:
        return catalog.relation_index
    return catalog.entity_index


def allowed_tokens(state: DecoderState, catalog: Catalog) -> frozenset[int]:
    """Tokens that keep the sequence extendable to a valid linearization.

    At a triplet boundary that is ``[s]`` (when the catalog can produce a
    triplet at all) and ``[eos]``; inside a field, the prefix-index
    children plus the closing marker once a full catalog name has been
    spelled out.
    """
    vocab = catalog.vocab
    if state.phase == GrammarPhase.DONE:
        return frozenset()
    if state.phase == GrammarPhase.BOUNDARY:
        allowed = {vocab.eos}
        if not catalog.entity_index.is_empty() and not catalog.relation_index.is_empty():
            allowed.add(vocab.subject)
        return frozenset(allowed)
    index = _field_index(state, catalog)
    allowed = set(index.children_of(state.node))
    if index.is_terminal(state.node):
        allowed.add(getattr(vocab, _FIELD_CLOSER[state.phase]))
    return frozenset(allowed)


def advance(state: DecoderState, token: int, catalog: Catalog) -> DecoderState:
    """Deterministic transition; raises IllegalTransitionError otherwise."""
    vocab = catalog.vocab
    if state.phase == GrammarPhase.BOUNDARY:
        if token == vocab.eos:
            return replace(state, phase=GrammarPhase.DONE)
        if token == vocab.subject and vocab.subject in allowed_tokens(state, catalog):
            return replace(state, phase=GrammarPhase.SUBJECT, node=PrefixIndex.ROOT, partial=())
        raise IllegalTransitionError(f"token {token} not allowed at a triplet boundary")

    if state.phase == GrammarPhase.DONE:
        raise IllegalTransitionError("sequence already finished")

    index = _field_index(state, catalog)
    closer = getattr(vocab, _FIELD_CLOSER[state.phase])
    if token == closer:
        if not index.is_terminal(state.node):
            raise IllegalTransitionError(f"field is not a complete catalog name: {state.partial}")
        name = vocab.decode(state.partial)
        if state.phase == GrammarPhase.SUBJECT:
            return replace(
                state,
                phase=GrammarPhase.RELATION,
                node=PrefixIndex.ROOT,
                partial=(),
                pending_subject=name,
            )
        if state.phase == GrammarPhase.RELATION:
            return replace(
                state,
                phase=GrammarPhase.OBJECT,
                node=PrefixIndex.ROOT,
                partial=(),
                pending_relation=name,
            )
        triplet = Triplet(state.pending_subject, state.pending_relation, name)
        return DecoderState(emitted=state.emitted + (triplet,))

    nxt = index.step(state.node, token)
    if nxt is None:
        raise IllegalTransitionError(f"token {token} leaves the {state.phase.value} index")
    return replace(state, node=nxt, partial=state.partial + (token,))


@dataclass(frozen=True)
class Hypothesis:
    """One beam-search candidate.

    ``score`` is the sum of per-step chosen-token log-probabilities under
    the (masked and renormalized, in constrained mode) scorer distribution.
    ``tokens`` includes the closing ``[eos]`` when the hypothesis finished
    by emitting it; ``finished`` is False for unconstrained hypotheses that
    were cut off at the length budget.
    """

    tokens: tuple[int, ...]
    score: float
    state: DecoderState | None
    finished: bool

    def content(self, eos_id: int) -> tuple[int, ...]:
        if self.tokens and self.tokens[-1] == eos_id:
            return self.tokens[:-1]
        return self.tokens


def masked_logprobs(logprobs: np.ndarray, allowed: Sequence[int]) -> np.ndarray:
    """Renormalized log-probabilities over ``allowed`` (sorted token ids)."""
    sub = logprobs[list(allowed)]
    m = float(sub.max())
    logz = m + math.log(float(np.exp(sub - m).sum()))
    return sub - logz


def beam_decode(
    scorer: Scorer,
    prompt: Sequence[int],
    catalog: Catalog | None = None,
    beam_width: int = 10,
    max_len: int = 256,
) -> list[Hypothesis]:
    """Beam search from ``prompt``; constrained when a catalog is given.

    Returns up to ``beam_width`` hypotheses by descending score (ties by
    token sequence). In constrained mode every result strictly parses
    against the catalog; hypotheses that hit ``max_len`` unfinished are
    discarded, and if nothing finished, NoValidContinuationError is raised.
    In unconstrained mode length-exhausted hypotheses are returned truncated
    with ``finished=False``.
    """
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    constrained = catalog is not None
    if constrained:
        ensure_same_vocab(scorer, catalog.vocab)
    vocab = scorer.vocab
    prompt = tuple(prompt)

    live = [Hypothesis((), 0.0, INITIAL_STATE if constrained else None, False)]
    pool: list[Hypothesis] = []

    for _ in range(max_len):
        if not live:
            break
        candidates: list[tuple[float, tuple[int, ...], Hypothesis, int]] = []
        for hyp in live:
            logprobs = scorer.next_logprobs(prompt + hyp.tokens)
            if constrained:
                allowed = sorted(allowed_tokens(hyp.state, catalog))
                renormed = masked_logprobs(logprobs, allowed)
                for tok, lp in zip(allowed, renormed):
                    candidates.append((hyp.score + float(lp), hyp.tokens + (tok,), hyp, tok))
            else:
                for tok in range(len(vocab)):
                    candidates.append(
                        (hyp.score + float(logprobs[tok]), hyp.tokens + (tok,), hyp, tok)
                    )
        candidates.sort(key=lambda c: (-c[0], c[1]))
        live = []
        for score, tokens, hyp, tok in candidates[:beam_width]:
            if tok == vocab.eos:
                state = advance(hyp.state, tok, catalog) if constrained else None
                pool.append(Hypothesis(tokens, score, state, True))
            else:
                state = advance(hyp.state, tok, catalog) if constrained else None
                live.append(Hypothesis(tokens, score, state, False))

    if not constrained:
        pool.extend(live)
    elif not pool:
        raise NoValidContinuationError(
            f"no finished hypothesis within max_len={max_len}"
        )
    pool.sort(key=lambda h: (-h.score, h.tokens))
    return pool[:beam_width]
