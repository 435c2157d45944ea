"""Synthetic collapse-family pairs with closed-form expected scores.

Construction: n copies of one unit texture vector (dim 0), optional seeded
jitter confined to dims >= 2, and change_count trailing rows rotated by
change_angle in the (dim 0, dim 1) plane. The rotation plane is orthogonal
to the jitter, so with zero jitter the aligned cosine of a changed row is
cos(change_angle) and of an unchanged row is 1, giving:

    mean_pool  = (n - c + c*cos) / sqrt((n - c + c*cos)^2 + (c*sin)^2) (c changed rows)
    meanpatch  = (n - c + c*cos) / n
    minpatch   = cos(change_angle)
    maxsim     = 1 when at least one row is unchanged (a_to_b, A all texture)
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParams
from .store import PatchEmbeddingSet


def generate_synthetic_pair(
    n: int,
    d: int,
    change_count: int,
    change_angle: float,
    seed: int,
    jitter: float = 0.0,
    doc_id: str = "synth",
) -> tuple[PatchEmbeddingSet, PatchEmbeddingSet]:
    """Build an (original, counterfactual) collapse-family pair."""
    if n < 2 or not (1 <= change_count < n):
        raise InvalidParams(f"need 1 <= change_count < n, got n={n}, change_count={change_count}")
    if d < 2:
        raise InvalidParams(f"need d >= 2, got d={d}")
    if jitter < 0:
        raise InvalidParams(f"jitter must be non-negative, got {jitter}")

    rng = np.random.default_rng(seed)
    base = np.zeros((n, d), dtype=np.float64)
    base[:, 0] = 1.0
    if jitter > 0 and d > 2:
        noise = rng.normal(scale=jitter, size=(n, d))
        noise[:, :2] = 0.0  # keep the rotation plane clean
        base += noise

    changed = base.copy()
    changed[n - change_count :, 0] = math.cos(change_angle)
    changed[n - change_count :, 1] = math.sin(change_angle)

    original = PatchEmbeddingSet(
        doc_id=doc_id,
        model_id="synthetic",
        variant="reference",
        matrix=base.astype(np.float32),
    )
    counterfactual = PatchEmbeddingSet(
        doc_id=doc_id,
        model_id="synthetic",
        variant="counterfactual",
        matrix=changed.astype(np.float32),
    )
    return original, counterfactual


def expected_collapse_scores(n: int, change_count: int, change_angle: float) -> dict[str, float]:
    """Closed-form zero-jitter scores for the collapse family."""
    c = change_count
    cos_t = math.cos(change_angle)
    sin_t = math.sin(change_angle)
    mean_x = n - c + c * cos_t
    mean_norm = math.hypot(mean_x, c * sin_t)
    return {
        "mean_pool": mean_x / mean_norm if mean_norm else 0.0,
        "meanpatch": (n - c + c * cos_t) / n,
        "minpatch": min(cos_t, 1.0),
        "maxsim": 1.0 if c < n else cos_t,
    }
