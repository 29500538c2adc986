"""kbdecode: knowledge-base constrained decoding for closed information extraction.

Catalog prefix indexes, triplet linearization, constrained/unconstrained beam
search over pluggable scorers, two-phase boosted inference, entity-removal
data curation, preference-pair construction, and a micro/macro evaluation
harness with bootstrap confidence intervals.
"""

from .catalog import Catalog, PrefixIndex, allowed_next, build_prefix_index, load_catalog
from .curation import CuratedSample, Sample, curate, decode_pass_over, load_samples, save_samples
from .decoding import (
    DecoderState,
    GrammarPhase,
    Hypothesis,
    advance,
    allowed_tokens,
    beam_decode,
    masked_logprobs,
)
from .dpo_prep import (
    ConstrainedExtractionProvider,
    PreferenceRecord,
    RemoteJudge,
    TableJudge,
    TableRealnessScorer,
    Verdict,
    build_preferences,
    select_realistic,
)
from .errors import (
    CatalogFormatError,
    IllegalTransitionError,
    InvalidPrefixError,
    KBDecodeError,
    NoValidContinuationError,
    SampleError,
    ScorerVocabularyMismatch,
    StrictParseError,
    UnknownEntityError,
    UnknownTokenError,
)
from .evaluation import (
    ERROR_CATEGORIES,
    EvalBatch,
    ScoreReport,
    bootstrap_ci,
    bucket_report,
    error_fraction_report,
    macro_scores,
    micro_scores,
    scores_with_ci,
)
from .linearize import (
    ParseIssue,
    ParseReport,
    Triplet,
    TripletSet,
    from_text,
    parse_lenient,
    parse_strict,
    render,
    render_text,
    to_text,
)
from .pipeline import (
    BoostedRecord,
    BoostResult,
    WeakPredictions,
    assemble_boosted_input,
    boost_infer,
    build_boosted_training_set,
    dual_decode,
    split_boosted_input,
)
from .scorers import NgramScorer, Scorer, TableScorer, load_scorer, save_scorer
from .vocab import Vocabulary

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "PrefixIndex",
    "Vocabulary",
    "allowed_next",
    "build_prefix_index",
    "load_catalog",
    "Triplet",
    "TripletSet",
    "ParseIssue",
    "ParseReport",
    "render",
    "render_text",
    "to_text",
    "from_text",
    "parse_strict",
    "parse_lenient",
    "Scorer",
    "TableScorer",
    "NgramScorer",
    "load_scorer",
    "save_scorer",
    "GrammarPhase",
    "DecoderState",
    "Hypothesis",
    "allowed_tokens",
    "advance",
    "beam_decode",
    "masked_logprobs",
    "Sample",
    "CuratedSample",
    "curate",
    "decode_pass_over",
    "load_samples",
    "save_samples",
    "WeakPredictions",
    "BoostedRecord",
    "BoostResult",
    "assemble_boosted_input",
    "split_boosted_input",
    "dual_decode",
    "build_boosted_training_set",
    "boost_infer",
    "EvalBatch",
    "ScoreReport",
    "micro_scores",
    "macro_scores",
    "scores_with_ci",
    "bootstrap_ci",
    "bucket_report",
    "error_fraction_report",
    "ERROR_CATEGORIES",
    "Verdict",
    "PreferenceRecord",
    "select_realistic",
    "build_preferences",
    "ConstrainedExtractionProvider",
    "TableRealnessScorer",
    "TableJudge",
    "RemoteJudge",
    "KBDecodeError",
    "UnknownTokenError",
    "CatalogFormatError",
    "UnknownEntityError",
    "InvalidPrefixError",
    "StrictParseError",
    "IllegalTransitionError",
    "NoValidContinuationError",
    "ScorerVocabularyMismatch",
    "SampleError",
]
