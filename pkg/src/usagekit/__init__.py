"""usagekit: scoring and tooling for usage-option extraction from reviews.

The core surface is the set-to-set scores (S4, MS4, HAMS4, WMS) over
pluggable string similarity, plus corpus statistics, paired significance
testing, prompt building and response parsing for LLM labeling, review-dump
preprocessing, and FLOPs break-even estimates.
"""

from .corpus_stats import (
    EMPTY_CLASS,
    USAGE_CLASS,
    CorpusReport,
    LabeledExample,
    SignificanceConfig,
    classification_scores,
    classify_example,
    hams4,
    inter_annotator_agreement,
    mean_ms4_tp,
    permutation_test,
    score_corpus,
)
from .embedding import (
    DeterministicEmbedder,
    EmbeddingBackendConfig,
    ExactMatchBackend,
    FileCacheBackend,
    RemoteEmbedder,
    make_backend,
)
from .errors import CacheFormatError, ContractViolation, RemoteError
from .feasibility import FeasibilityModel, break_even, flops_per_token, reference_table
from .set_metrics import UsageOptionSet, ms4, option_set, s4, s4_precision, weight
from .similarity import (
    BetaParams,
    Similarity,
    SimilarityConfig,
    beta_cdf,
    clipped_cosine,
    deterministic_similarity,
    exact_match_similarity,
)
from .transport import TransportProblem, solve_transport
from .wms import WmsConfig, corpus_wms, unit_weights, wmd, wms_example

__version__ = "0.1.0"

__all__ = [
    "BetaParams",
    "CacheFormatError",
    "ContractViolation",
    "CorpusReport",
    "DeterministicEmbedder",
    "EMPTY_CLASS",
    "EmbeddingBackendConfig",
    "ExactMatchBackend",
    "FeasibilityModel",
    "FileCacheBackend",
    "LabeledExample",
    "RemoteEmbedder",
    "RemoteError",
    "Similarity",
    "SimilarityConfig",
    "SignificanceConfig",
    "TransportProblem",
    "USAGE_CLASS",
    "UsageOptionSet",
    "WmsConfig",
    "beta_cdf",
    "break_even",
    "classification_scores",
    "classify_example",
    "clipped_cosine",
    "corpus_wms",
    "deterministic_similarity",
    "exact_match_similarity",
    "flops_per_token",
    "hams4",
    "inter_annotator_agreement",
    "make_backend",
    "mean_ms4_tp",
    "ms4",
    "option_set",
    "permutation_test",
    "reference_table",
    "s4",
    "s4_precision",
    "score_corpus",
    "solve_transport",
    "unit_weights",
    "weight",
    "wmd",
    "wms_example",
]
