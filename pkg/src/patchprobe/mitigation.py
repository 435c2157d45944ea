"""Alternative aggregation strategies: variance weighting, attention guiding,
top-k aligned-patch removal.

These are probes, not fixes: on texture-dominated inputs they stay near the
plain mean-pool score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMean, DimMismatch, PatchCountMismatch, TooFewPatches
from .similarity import NORM_EPS, _bounded, _normalized_rows, cosine_flagged
from .store import PatchEmbeddingSet

DEFAULT_TOPK = 50

# Weight mass below this is treated as "no signal": fall back to uniform.
_FLAT_EPS = 1e-18

STRATEGIES = ("varwgt", "attngd", "topkr")


@dataclass(frozen=True)
class PatchWeights:
    weights: np.ndarray  # non-negative, sums to 1
    source: str  # variance | attention | uniform_fallback

    def __post_init__(self):
        object.__setattr__(
            self, "weights", np.ascontiguousarray(self.weights, dtype=np.float64)
        )


def _uniform(n: int, source: str = "uniform_fallback") -> PatchWeights:
    return PatchWeights(np.full(n, 1.0 / n), source)


def variance_weights(v: PatchEmbeddingSet) -> PatchWeights:
    """Weight each patch by the population variance of its components."""
    variances = np.var(v.matrix.astype(np.float64), axis=1)
    total = variances.sum()
    if total < _FLAT_EPS or np.all(variances < _FLAT_EPS):
        return _uniform(v.n_patches)
    return PatchWeights(variances / total, "variance")


def attention_weights(v: PatchEmbeddingSet) -> PatchWeights:
    """Weight each patch by the spread of its similarities to the other patches.

    Builds the n x n cosine matrix of L2-normalized rows and takes the
    population std of each row excluding the diagonal (self-similarity is
    constantly 1 and only dilutes the statistic).
    """
    n = v.n_patches
    if n < 2:
        raise TooFewPatches(f"attention weights need n >= 2, got {n}")
    rows, _ = _normalized_rows(v.matrix)
    sims = rows @ rows.T
    off_diag = sims[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    stds = np.std(off_diag, axis=1)
    total = stds.sum()
    if total < _FLAT_EPS or np.all(stds < _FLAT_EPS):
        return _uniform(n)
    return PatchWeights(stds / total, "attention")


def weighted_mean_score(
    a: PatchEmbeddingSet,
    b: PatchEmbeddingSet,
    wa: PatchWeights,
    wb: PatchWeights,
) -> float:
    """Cosine of the weighted means of the two patch matrices."""
    if a.dim != b.dim:
        raise DimMismatch(f"dim {a.dim} != {b.dim}")
    if wa.weights.shape[0] != a.n_patches or wb.weights.shape[0] != b.n_patches:
        raise PatchCountMismatch("weight length does not match patch count")
    pooled_a = wa.weights @ a.matrix.astype(np.float64)
    pooled_b = wb.weights @ b.matrix.astype(np.float64)
    if np.linalg.norm(pooled_a) < NORM_EPS or np.linalg.norm(pooled_b) < NORM_EPS:
        raise DegenerateMean("weighted mean has near-zero norm")
    value, _ = cosine_flagged(pooled_a, pooled_b)
    return _bounded(value)


def topk_removal_indices(a: PatchEmbeddingSet, b: PatchEmbeddingSet, k: int) -> np.ndarray:
    """Indices of the min(k, n-1) most similar aligned pairs, ties toward lower index."""
    if a.dim != b.dim:
        raise DimMismatch(f"dim {a.dim} != {b.dim}")
    if a.n_patches != b.n_patches:
        raise PatchCountMismatch(f"n_patches {a.n_patches} != {b.n_patches}")
    n = a.n_patches
    na, _ = _normalized_rows(a.matrix)
    nb, _ = _normalized_rows(b.matrix)
    aligned = np.einsum("ij,ij->i", na, nb)
    k_eff = min(max(k, 0), n - 1)
    # stable sort on -cosine keeps lower indices first among ties
    order = np.argsort(-aligned, kind="stable")
    return np.sort(order[:k_eff])


def topk_removal_score(a: PatchEmbeddingSet, b: PatchEmbeddingSet, k: int = DEFAULT_TOPK) -> float:
    """Drop the k most similar aligned pairs, then mean-pool the survivors.

    k is clamped to n-1 so at least one pair always survives.
    """
    removed = topk_removal_indices(a, b, k)
    keep = np.setdiff1d(np.arange(a.n_patches), removed, assume_unique=True)
    pooled_a = np.mean(a.matrix[keep].astype(np.float64), axis=0)
    pooled_b = np.mean(b.matrix[keep].astype(np.float64), axis=0)
    if np.linalg.norm(pooled_a) < NORM_EPS or np.linalg.norm(pooled_b) < NORM_EPS:
        raise DegenerateMean("surviving-patch mean has near-zero norm")
    value, _ = cosine_flagged(pooled_a, pooled_b)
    return _bounded(value)


def score_mitigations(
    a: PatchEmbeddingSet,
    b: PatchEmbeddingSet,
    strategies: tuple[str, ...] = STRATEGIES,
    k: int = DEFAULT_TOPK,
) -> dict[str, float]:
    """Score one pair under each requested mitigation strategy."""
    out: dict[str, float] = {}
    for strat in strategies:
        if strat == "varwgt":
            out[strat] = weighted_mean_score(a, b, variance_weights(a), variance_weights(b))
        elif strat == "attngd":
            out[strat] = weighted_mean_score(a, b, attention_weights(a), attention_weights(b))
        elif strat == "topkr":
            out[strat] = topk_removal_score(a, b, k)
        else:
            raise ValueError(f"unknown mitigation strategy {strat!r}")
    return out
