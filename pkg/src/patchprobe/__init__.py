"""patchprobe: diagnostics for information loss in single-vector aggregation
of visual document patch embeddings."""

from .store import PatchEmbeddingSet, load_embeddings, save_embeddings, validate
from .similarity import (
    MECHANISMS,
    MechanismScore,
    SkippedScore,
    cosine,
    max_pool_score,
    maxsim_score,
    mean_pool_score,
    meanpatch_score,
    minpatch_score,
    score_all,
)
from .mitigation import (
    PatchWeights,
    attention_weights,
    topk_removal_score,
    variance_weights,
    weighted_mean_score,
)
from .attention import AttentionGap, AttentionTriplet, attention_gap, summarize_gaps
from .synth import expected_collapse_scores, generate_synthetic_pair
from .harness import (
    BenchConfig,
    DocumentPair,
    ScoreRecord,
    compare_domains,
    run_bench,
    score_pair,
)

__version__ = "0.1.0"

__all__ = [
    "PatchEmbeddingSet",
    "load_embeddings",
    "save_embeddings",
    "validate",
    "MECHANISMS",
    "MechanismScore",
    "SkippedScore",
    "cosine",
    "mean_pool_score",
    "max_pool_score",
    "maxsim_score",
    "meanpatch_score",
    "minpatch_score",
    "score_all",
    "PatchWeights",
    "variance_weights",
    "attention_weights",
    "weighted_mean_score",
    "topk_removal_score",
    "AttentionGap",
    "AttentionTriplet",
    "attention_gap",
    "summarize_gaps",
    "generate_synthetic_pair",
    "expected_collapse_scores",
    "BenchConfig",
    "DocumentPair",
    "ScoreRecord",
    "score_pair",
    "run_bench",
    "compare_domains",
]
