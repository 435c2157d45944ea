"""Five scoring mechanisms over patch embedding sets.

Two aggregation scores (mean pooling, max pooling) collapse each set to a
single vector before comparing; three late-interaction scores (maxsim,
meanpatch, minpatch) compare at the patch level. All accumulation is in
float64 regardless of storage dtype.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMax, DegenerateMean, DimMismatch, PatchCountMismatch
from .store import PatchEmbeddingSet

MECHANISMS = ("mean_pool", "max_pool", "maxsim", "meanpatch", "minpatch")

# Below this, a vector is treated as zero: cosine against it is 0.0.
NORM_EPS = 1e-12

# Rows per block in the optimized maxsim kernel; correctness is guarded by
# the brute-force oracle in the test suite, this only tunes memory locality.
_MAXSIM_BLOCK = 256


@dataclass(frozen=True)
class MechanismScore:
    mechanism: str
    value: float
    direction: str = "symmetric"  # a_to_b | symmetric; meaningful for maxsim
    degenerate: bool = False  # some zero-norm patch row was scored as 0.0
    argmin_patch: int | None = None  # minpatch only


@dataclass(frozen=True)
class SkippedScore:
    mechanism: str
    reason: str


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    value, _ = cosine_flagged(u, v)
    return value


def cosine_flagged(u: np.ndarray, v: np.ndarray) -> tuple[float, bool]:
    """Cosine in float64; (0.0, True) when either vector has near-zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu < NORM_EPS or nv < NORM_EPS:
        return 0.0, True
    return float(np.dot(u, v) / (nu * nv)), False


def _bounded(value: float) -> float:
    # fp round-off can land a hair outside [-1, 1]; clamp to the contract.
    return float(min(1.0, max(-1.0, value)))


def _check_dims(a: PatchEmbeddingSet, b: PatchEmbeddingSet) -> None:
    if a.dim != b.dim:
        raise DimMismatch(f"dim {a.dim} != {b.dim}")


def _check_aligned(a: PatchEmbeddingSet, b: PatchEmbeddingSet) -> None:
    _check_dims(a, b)
    if a.n_patches != b.n_patches:
        raise PatchCountMismatch(f"n_patches {a.n_patches} != {b.n_patches}")


def _normalized_rows(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """L2-normalize rows in float64; zero-norm rows become zero (degenerate mask)."""
    m64 = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m64, axis=1)
    degenerate = norms < NORM_EPS
    out = np.divide(m64, np.where(degenerate, 1.0, norms)[:, None])
    out[degenerate] = 0.0
    return out, degenerate


def mean_pool_score(a: PatchEmbeddingSet, b: PatchEmbeddingSet) -> MechanismScore:
    """Cosine of the arithmetic means of the two patch matrices."""
    _check_dims(a, b)
    ma = np.mean(a.matrix, axis=0, dtype=np.float64)
    mb = np.mean(b.matrix, axis=0, dtype=np.float64)
    if np.linalg.norm(ma) < NORM_EPS or np.linalg.norm(mb) < NORM_EPS:
        raise DegenerateMean("mean-pooled vector has near-zero norm")
    value, _ = cosine_flagged(ma, mb)
    return MechanismScore("mean_pool", _bounded(value))


def max_pool_score(a: PatchEmbeddingSet, b: PatchEmbeddingSet) -> MechanismScore:
    """Cosine of the per-dimension (signed) maxima of the two patch matrices."""
    _check_dims(a, b)
    ma = np.max(a.matrix, axis=0).astype(np.float64)
    mb = np.max(b.matrix, axis=0).astype(np.float64)
    if np.linalg.norm(ma) < NORM_EPS or np.linalg.norm(mb) < NORM_EPS:
        raise DegenerateMax("max-pooled vector has near-zero norm")
    value, _ = cosine_flagged(ma, mb)
    return MechanismScore("max_pool", _bounded(value))


def _maxsim_directed(na: np.ndarray, nb: np.ndarray) -> float:
    """Mean over rows of na of the best cosine against any row of nb.

    Rows are pre-normalized; similarity reduces to blocked matrix products
    with a running per-row maximum.
    """
    n_a = na.shape[0]
    best = np.full(n_a, -np.inf)
    for ai in range(0, n_a, _MAXSIM_BLOCK):
        a_blk = na[ai : ai + _MAXSIM_BLOCK]
        blk_best = np.full(a_blk.shape[0], -np.inf)
        for bi in range(0, nb.shape[0], _MAXSIM_BLOCK):
            sims = a_blk @ nb[bi : bi + _MAXSIM_BLOCK].T
            np.maximum(blk_best, sims.max(axis=1), out=blk_best)
        best[ai : ai + _MAXSIM_BLOCK] = blk_best
    # np.sum is pairwise, bounding accumulation error for large n.
    return float(np.sum(best) / n_a)


def maxsim_score(
    a: PatchEmbeddingSet, b: PatchEmbeddingSet, direction: str = "a_to_b"
) -> MechanismScore:
    """Late-interaction score: average best-match cosine per patch of a.

    direction "a_to_b" follows the printed formula (sum over a's patches);
    "symmetric" averages both directions.
    """
    _check_dims(a, b)
    if direction not in ("a_to_b", "symmetric"):
        raise ValueError(f"unknown direction {direction!r}")
    na, deg_a = _normalized_rows(a.matrix)
    nb, deg_b = _normalized_rows(b.matrix)
    value = _maxsim_directed(na, nb)
    if direction == "symmetric":
        value = 0.5 * (value + _maxsim_directed(nb, na))
    return MechanismScore(
        "maxsim", _bounded(value), direction=direction, degenerate=bool(deg_a.any() or deg_b.any())
    )


def _aligned_cosines(a: PatchEmbeddingSet, b: PatchEmbeddingSet) -> tuple[np.ndarray, bool]:
    _check_aligned(a, b)
    na, deg_a = _normalized_rows(a.matrix)
    nb, deg_b = _normalized_rows(b.matrix)
    return np.einsum("ij,ij->i", na, nb), bool(deg_a.any() or deg_b.any())


def meanpatch_score(a: PatchEmbeddingSet, b: PatchEmbeddingSet) -> MechanismScore:
    """Mean cosine over spatially aligned patch pairs."""
    cos, degenerate = _aligned_cosines(a, b)
    return MechanismScore(
        "meanpatch", _bounded(float(np.sum(cos) / cos.shape[0])), degenerate=degenerate
    )


def minpatch_score(a: PatchEmbeddingSet, b: PatchEmbeddingSet) -> MechanismScore:
    """Worst aligned-patch cosine plus its index; probes local deviations."""
    cos, degenerate = _aligned_cosines(a, b)
    idx = int(np.argmin(cos))
    return MechanismScore(
        "minpatch", _bounded(float(cos[idx])), degenerate=degenerate, argmin_patch=idx
    )


def score_all(
    a: PatchEmbeddingSet,
    b: PatchEmbeddingSet,
    mechanisms: tuple[str, ...] = MECHANISMS,
    maxsim_direction: str = "a_to_b",
) -> dict[str, MechanismScore | SkippedScore]:
    """Score one pair under every requested mechanism.

    Per-mechanism failures become SkippedScore entries; the map always has
    one entry per requested mechanism.
    """
    out: dict[str, MechanismScore | SkippedScore] = {}
    for mech in mechanisms:
        if mech not in MECHANISMS:
            out[mech] = SkippedScore(mech, f"unknown mechanism {mech!r}")
            continue
        try:
            if mech == "mean_pool":
                out[mech] = mean_pool_score(a, b)
            elif mech == "max_pool":
                out[mech] = max_pool_score(a, b)
            elif mech == "maxsim":
                out[mech] = maxsim_score(a, b, direction=maxsim_direction)
            elif mech == "meanpatch":
                out[mech] = meanpatch_score(a, b)
            else:
                out[mech] = minpatch_score(a, b)
        except (DimMismatch, PatchCountMismatch, DegenerateMean, DegenerateMax) as exc:
            out[mech] = SkippedScore(mech, f"{type(exc).__name__}: {exc}")
    return out
