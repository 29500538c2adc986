"""Preference-pair construction for alignment finetuning.

The stage is deliberately thin on intelligence: a pluggable realness scorer
ranks candidate texts, two candidate providers (typically constrained
decodes of two different scorers) produce one triplet set each, and a
pluggable judge picks the better one. Samples where the judge likes neither,
where a provider fails, or where both candidates coincide, are dropped with
a logged reason. The judge can live behind any request/response transport;
a deterministic table judge ships for tests.
"""

from __future__ import annotations

import enum
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Protocol, Sequence

from .catalog import Catalog
from .curation import Sample
from .decoding import beam_decode
from .linearize import TripletSet, parse_strict, render_text
from .scorers import Scorer

logger = logging.getLogger(__name__)


class Verdict(enum.Enum):
    PREFER_A = "PreferA"
    PREFER_B = "PreferB"
    NEITHER_GOOD = "NeitherGood"


class RealnessScorer(Protocol):
    def score(self, text: str) -> float:
        """Probability in [0, 1] that ``text`` is natural; deterministic."""
        ...


class PreferenceJudge(Protocol):
    def judge(self, text: str, candidate_a: TripletSet, candidate_b: TripletSet) -> Verdict:
        """Total preference function over two candidate extractions."""
        ...


@dataclass(frozen=True)
class PreferenceRecord:
    prompt: str
    chosen: TripletSet
    rejected: TripletSet
    verdict: Verdict
    chosen_source: str  # "a" or "b"

    def __post_init__(self):
        if render_text(self.chosen) == render_text(self.rejected):
            raise ValueError("chosen and rejected are identical")


def select_realistic(samples: Sequence[Sample], scorer: RealnessScorer, k: int) -> list[Sample]:
    """Top-k samples by realness score, descending; ties by id ascending."""
    if k > len(samples):
        raise ValueError(f"k={k} exceeds {len(samples)} samples")
    ranked = sorted(samples, key=lambda s: (-scorer.score(s.text), s.id))
    return ranked[:k]


CandidateProvider = Callable[[Sample], TripletSet]


def build_preferences(
    samples: Sequence[Sample],
    gen_a: CandidateProvider,
    gen_b: CandidateProvider,
    judge: PreferenceJudge,
    swap_trial: bool = False,
    jobs: int = 1,
) -> list[PreferenceRecord]:
    """Judge the two candidates per sample and emit preference records.

    ``swap_trial`` queries the judge in both presentation orders and keeps
    only samples with a consistent verdict. Output preserves sample order;
    sample count is an upper bound on record count.
    """

    def run(sample: Sample) -> PreferenceRecord | None:
        try:
            a = gen_a(sample)
            b = gen_b(sample)
        except Exception as exc:
            logger.warning("sample %s skipped: provider failed: %s", sample.id, exc)
            return None
        if render_text(a) == render_text(b):
            logger.warning("sample %s skipped: DegeneratePair", sample.id)
            return None
        try:
            verdict = judge.judge(sample.text, a, b)
            if swap_trial:
                swapped = judge.judge(sample.text, b, a)
                if not _consistent(verdict, swapped):
                    logger.warning("sample %s skipped: InconsistentVerdict", sample.id)
                    return None
        except Exception as exc:
            logger.warning("sample %s skipped: judge failed: %s", sample.id, exc)
            return None
        if verdict == Verdict.NEITHER_GOOD:
            return None
        if verdict == Verdict.PREFER_A:
            return PreferenceRecord(sample.text, a, b, verdict, "a")
        return PreferenceRecord(sample.text, b, a, verdict, "b")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, samples))
    else:
        results = [run(s) for s in samples]
    return [r for r in results if r is not None]


def _consistent(first: Verdict, swapped: Verdict) -> bool:
    flipped = {
        Verdict.PREFER_A: Verdict.PREFER_B,
        Verdict.PREFER_B: Verdict.PREFER_A,
        Verdict.NEITHER_GOOD: Verdict.NEITHER_GOOD,
    }
    return swapped == flipped[first]


class ConstrainedExtractionProvider:
    """Candidate provider wrapping a scorer's constrained decode."""

    def __init__(self, scorer: Scorer, catalog: Catalog, beam_width: int = 10, max_len: int = 256):
        self.scorer = scorer
        self.catalog = catalog
        self.beam_width = beam_width
        self.max_len = max_len

    def __call__(self, sample: Sample) -> TripletSet:
        prompt = self.catalog.vocab.encode(sample.text)
        hyps = beam_decode(self.scorer, prompt, self.catalog, self.beam_width, self.max_len)
        return parse_strict(hyps[0].content(self.catalog.vocab.eos), self.catalog)


class TableRealnessScorer:
    """Realness scores from a fixed text -> score table."""

    def __init__(self, scores: Mapping[str, float], default: float | None = None):
        for text, s in scores.items():
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"score out of [0, 1] for {text!r}: {s}")
        self._scores = dict(scores)
        self._default = default

    @classmethod
    def from_id_scores(cls, id_scores: Mapping[str, float], samples: Sequence[Sample], default: float | None = None):
        by_text = {s.text: id_scores[s.id] for s in samples if s.id in id_scores}
        return cls(by_text, default)

    def score(self, text: str) -> float:
        if text in self._scores:
            return self._scores[text]
        if self._default is None:
            raise KeyError(f"no realness score for text: {text[:40]!r}")
        return self._default


class TableJudge:
    """Deterministic judge from a sample-id -> verdict rule table."""

    def __init__(self, rules: Mapping[str, Verdict | str], samples: Sequence[Sample], default: Verdict = Verdict.NEITHER_GOOD):
        text_to_id = {s.text: s.id for s in samples}
        self._by_text: dict[str, Verdict] = {}
        for text, sample_id in text_to_id.items():
            if sample_id in rules:
                v = rules[sample_id]
                self._by_text[text] = v if isinstance(v, Verdict) else Verdict(v)
        self._default = default

    def judge(self, text: str, candidate_a: TripletSet, candidate_b: TripletSet) -> Verdict:
        return self._by_text.get(text, self._default)


# -- wire contract -----------------------------------------------------------------


def judge_request(text: str, candidate_a: TripletSet, candidate_b: TripletSet) -> dict:
    return {"text": text, "a": render_text(candidate_a), "b": render_text(candidate_b)}


def judge_response(verdict: Verdict) -> dict:
    return {"verdict": verdict.value}


def parse_judge_response(payload: dict) -> Verdict:
    return Verdict(payload["verdict"])


class RemoteJudge:
    """Judge speaking the request/response contract over any transport.

    ``transport`` takes the request dict and returns the response dict; an
    HTTP POST, a subprocess, or a local function all qualify.
    """

    def __init__(self, transport: Callable[[dict], dict]):
        self._transport = transport

    def judge(self, text: str, candidate_a: TripletSet, candidate_b: TripletSet) -> Verdict:
        return parse_judge_response(self._transport(judge_request(text, candidate_a, candidate_b)))


# -- files ---------------------------------------------------------------------------


def save_preference_records(records: Iterable[PreferenceRecord], path) -> None:
    """JSONL with linearized triplet strings for chosen and rejected."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "prompt": rec.prompt,
                "chosen": render_text(rec.chosen),
                "rejected": render_text(rec.rejected),
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
