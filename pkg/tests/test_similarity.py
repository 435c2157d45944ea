import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchprobe.errors import (
    DegenerateMax,
    DegenerateMean,
    DimMismatch,
    PatchCountMismatch,
)
from patchprobe.similarity import (
    MECHANISMS,
    SkippedScore,
    cosine,
    cosine_flagged,
    max_pool_score,
    maxsim_score,
    mean_pool_score,
    meanpatch_score,
    minpatch_score,
    score_all,
)

from probe_helpers import basis_rows, make_set
from oracles import (
    max_pool_oracle,
    maxsim_oracle,
    mean_pool_oracle,
    meanpatch_oracle,
    minpatch_oracle,
)

# Collapse example used throughout: A = 100 x e1, B = 99 x e1 + 1 x e2.
# Closed forms: mean = 99/sqrt(9802), max = 1/sqrt(2).
MEAN_99_1 = 99.0 / math.sqrt(9802.0)
MAX_99_1 = 1.0 / math.sqrt(2.0)


def collapse_pair(dim=8):
    a = make_set(basis_rows([0] * 100, dim))
    b = make_set(basis_rows([0] * 99 + [1], dim), variant="counterfactual")
    return a, b


def random_pair(rng, n_a=None, n_b=None, d=None):
    d = d or int(rng.integers(2, 32))
    n_a = n_a or int(rng.integers(1, 24))
    n_b = n_b or int(rng.integers(1, 24))
    return (
        make_set(rng.standard_normal((n_a, d)).astype(np.float32)),
        make_set(rng.standard_normal((n_b, d)).astype(np.float32), variant="counterfactual"),
    )


# --- cosine ---------------------------------------------------------------

def test_cosine_self_is_one(rng):
    for _ in range(20):
        v = rng.standard_normal(16)
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)


def test_cosine_orthogonal():
    e1, e2 = np.eye(4)[0], np.eye(4)[1]
    assert cosine(e1, e2) == 0.0


def test_cosine_antipodal(rng):
    u = rng.standard_normal(8)
    assert cosine(u, -u) == pytest.approx(-1.0, abs=1e-12)


def test_cosine_zero_norm_flagged():
    value, degenerate = cosine_flagged(np.zeros(4), np.ones(4))
    assert value == 0.0 and degenerate


# --- mean pooling ---------------------------------------------------------

def test_mean_pool_identity(rng):
    a, _ = random_pair(rng)
    assert mean_pool_score(a, a).value == pytest.approx(1.0, abs=1e-12)


def test_mean_pool_collapse_closed_form():
    a, b = collapse_pair()
    assert mean_pool_score(a, b).value == pytest.approx(MEAN_99_1, abs=1e-9)
    assert mean_pool_score(a, b).value == pytest.approx(mean_pool_oracle(a.matrix, b.matrix), abs=1e-12)


def test_mean_pool_antipodal():
    a = make_set(basis_rows([0], 4))
    b = make_set(-basis_rows([0], 4), variant="counterfactual")
    assert mean_pool_score(a, b).value == pytest.approx(-1.0, abs=1e-12)


def test_mean_pool_dim_mismatch():
    with pytest.raises(DimMismatch):
        mean_pool_score(make_set(np.ones((2, 3))), make_set(np.ones((2, 4))))


def test_mean_pool_degenerate_mean():
    a = make_set(np.vstack([basis_rows([0], 4), -basis_rows([0], 4)]))
    with pytest.raises(DegenerateMean):
        mean_pool_score(a, a)


# --- max pooling ----------------------------------------------------------

def test_max_pool_identity(rng):
    a, _ = random_pair(rng)
    assert max_pool_score(a, a).value == pytest.approx(1.0, abs=1e-12)


def test_max_pool_collapse_closed_form():
    a, b = collapse_pair()
    assert max_pool_score(a, b).value == pytest.approx(MAX_99_1, abs=1e-9)
    assert max_pool_score(a, b).value == pytest.approx(max_pool_oracle(a.matrix, b.matrix), abs=1e-12)


def test_max_pool_row_permutation_invariance(rng):
    b = make_set(rng.standard_normal((12, 6)).astype(np.float32))
    perm = make_set(b.matrix[rng.permutation(12)])
    assert max_pool_score(perm, b).value == pytest.approx(1.0, abs=1e-12)


def test_max_pool_signed_maxima():
    # maxima are taken over signed values, not magnitudes
    a = make_set(np.array([[-2.0, 1.0], [-3.0, 0.5]]))
    assert np.allclose(np.max(a.matrix, axis=0), [-2.0, 1.0])
    assert max_pool_score(a, a).value == pytest.approx(1.0, abs=1e-12)


# --- maxsim ---------------------------------------------------------------

def test_maxsim_identity(rng):
    for _ in range(5):
        a, _ = random_pair(rng)
        assert maxsim_score(a, a).value == pytest.approx(1.0, abs=1e-9)


def test_maxsim_collapse_blindness():
    a, b = collapse_pair()
    assert maxsim_score(a, b, "a_to_b").value == pytest.approx(1.0, abs=1e-12)


def test_maxsim_matches_oracle(rng):
    for _ in range(50):
        a, b = random_pair(rng)
        got = maxsim_score(a, b, "a_to_b").value
        want = maxsim_oracle(a.matrix, b.matrix)
        assert got == pytest.approx(want, abs=1e-6)


def test_maxsim_symmetric_is_mean_of_directions(rng):
    a, b = random_pair(rng)
    ab = maxsim_score(a, b, "a_to_b").value
    ba = maxsim_score(b, a, "a_to_b").value
    assert maxsim_score(a, b, "symmetric").value == pytest.approx((ab + ba) / 2, abs=1e-12)


def test_maxsim_blocked_kernel_crosses_block_boundary(rng):
    # n > block size exercises the running-maximum path
    a = make_set(rng.standard_normal((300, 8)).astype(np.float32))
    b = make_set(rng.standard_normal((270, 8)).astype(np.float32))
    sub_a, sub_b = a.matrix[:40], b.matrix[:40]
    got = maxsim_score(make_set(sub_a), make_set(sub_b)).value
    assert got == pytest.approx(maxsim_oracle(sub_a, sub_b), abs=1e-6)
    full = maxsim_score(a, b).value
    assert -1.0 <= full <= 1.0


# --- meanpatch / minpatch ---------------------------------------------------

def test_meanpatch_identity(rng):
    a, _ = random_pair(rng)
    assert meanpatch_score(a, a).value == pytest.approx(1.0, abs=1e-12)


def test_meanpatch_collapse():
    a, b = collapse_pair()
    assert meanpatch_score(a, b).value == pytest.approx(0.99, abs=1e-12)


def test_meanpatch_alignment_sensitivity():
    rows = basis_rows([0, 1, 2, 3], 4)
    a = make_set(rows)
    b = make_set(rows[::-1], variant="counterfactual")
    assert meanpatch_score(a, b).value == pytest.approx(
        meanpatch_oracle(a.matrix, b.matrix), abs=1e-12
    )
    assert meanpatch_score(a, b).value == pytest.approx(0.0, abs=1e-12)


def test_meanpatch_patch_count_mismatch():
    with pytest.raises(PatchCountMismatch):
        meanpatch_score(make_set(np.ones((3, 4))), make_set(np.ones((4, 4))))


def test_minpatch_identity(rng):
    a, _ = random_pair(rng)
    assert minpatch_score(a, a).value == pytest.approx(1.0, abs=1e-12)


def test_minpatch_collapse_argmin():
    a, b = collapse_pair()
    score = minpatch_score(a, b)
    assert score.value == pytest.approx(0.0, abs=1e-12)
    assert score.argmin_patch == 99


def test_minpatch_single_patch_antipodal():
    a = make_set(basis_rows([0], 4))
    b = make_set(-basis_rows([0], 4), variant="counterfactual")
    assert minpatch_score(a, b).value == pytest.approx(-1.0, abs=1e-12)


def test_minpatch_matches_oracle(rng):
    for _ in range(30):
        n = int(rng.integers(1, 20))
        a, b = random_pair(rng, n_a=n, n_b=n)
        assert minpatch_score(a, b).value == pytest.approx(
            minpatch_oracle(a.matrix, b.matrix), abs=1e-9
        )


# --- score_all --------------------------------------------------------------

def test_score_all_identity(rng):
    a, _ = random_pair(rng)
    results = score_all(a, a)
    assert set(results) == set(MECHANISMS)
    for entry in results.values():
        assert entry.value == pytest.approx(1.0, abs=1e-12)


def test_score_all_collapse_values():
    a, b = collapse_pair()
    results = score_all(a, b)
    assert results["mean_pool"].value == pytest.approx(MEAN_99_1, abs=1e-9)
    assert results["max_pool"].value == pytest.approx(MAX_99_1, abs=1e-9)
    assert results["maxsim"].value == pytest.approx(1.0, abs=1e-12)
    assert results["meanpatch"].value == pytest.approx(0.99, abs=1e-12)
    assert results["minpatch"].value == pytest.approx(0.0, abs=1e-12)


def test_score_all_skips_alignment_mechanisms_on_count_mismatch(rng):
    a = make_set(np.ones((4, 3), dtype=np.float32))
    b = make_set(np.ones((5, 3), dtype=np.float32))
    results = score_all(a, b)
    assert isinstance(results["meanpatch"], SkippedScore)
    assert isinstance(results["minpatch"], SkippedScore)
    assert "PatchCountMismatch" in results["meanpatch"].reason
    assert results["maxsim"].value == pytest.approx(1.0, abs=1e-12)


# --- properties -------------------------------------------------------------

matrices = st.integers(1, 12).flatmap(
    lambda n: st.integers(2, 16).flatmap(
        lambda d: st.lists(
            st.lists(
                st.floats(-10, 10, allow_nan=False, width=32),
                min_size=d,
                max_size=d,
            ),
            min_size=n,
            max_size=n,
        )
    )
)


def _nonzero_rows(m):
    return all(np.linalg.norm(row) > 1e-6 for row in m)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_property_identity_and_bounds(rows):
    m = np.asarray(rows, dtype=np.float32)
    if not _nonzero_rows(m) or np.linalg.norm(m.mean(axis=0)) < 1e-6:
        return
    if np.linalg.norm(m.max(axis=0)) < 1e-6:
        return
    v = make_set(m)
    for entry in score_all(v, v).values():
        assert entry.value == pytest.approx(1.0, abs=1e-9)
        assert -1.0 <= entry.value <= 1.0


@settings(max_examples=60, deadline=None)
@given(matrices, matrices, st.randoms(use_true_random=False))
def test_property_ordering_min_le_mean_le_maxsim(rows_a, rows_b, _):
    a = np.asarray(rows_a, dtype=np.float32)
    b = np.asarray(rows_b, dtype=np.float32)
    n = min(a.shape[0], b.shape[0])
    if a.shape[1] != b.shape[1]:
        return
    sa, sb = make_set(a[:n]), make_set(b[:n])
    lo = minpatch_score(sa, sb).value
    mid = meanpatch_score(sa, sb).value
    hi = maxsim_score(sa, sb, "a_to_b").value
    assert lo <= mid + 1e-9
    assert mid <= hi + 1e-9


@settings(max_examples=40, deadline=None)
@given(matrices, st.integers(0, 2**32 - 1))
def test_property_permutation_invariance(rows, seed):
    m = np.asarray(rows, dtype=np.float32)
    rng = np.random.default_rng(seed)
    a = make_set(m)
    b = make_set(rng.standard_normal(m.shape).astype(np.float32))
    pa = make_set(m[rng.permutation(m.shape[0])])
    pb = make_set(b.matrix[rng.permutation(m.shape[0])])
    try:
        assert mean_pool_score(pa, pb).value == pytest.approx(
            mean_pool_score(a, b).value, abs=1e-9
        )
        assert max_pool_score(pa, pb).value == pytest.approx(
            max_pool_score(a, b).value, abs=1e-9
        )
    except (DegenerateMean, DegenerateMax):
        return
    assert maxsim_score(pa, pb).value == pytest.approx(maxsim_score(a, b).value, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(matrices, st.integers(-20, 20))
def test_property_scale_invariance(rows, exponent):
    # power-of-two scales are exact in float32, so the 1e-9 tolerance is honest
    scale = np.float32(2.0**exponent)
    m = np.asarray(rows, dtype=np.float32)
    if not _nonzero_rows(m):
        return
    rng = np.random.default_rng(7)
    other = rng.standard_normal(m.shape).astype(np.float32) + 0.5
    a, b = make_set(m), make_set(other)
    sa, sb = make_set(m * scale), make_set(other * scale)
    try:
        base = score_all(a, b)
        scaled = score_all(sa, sb)
    except DegenerateMean:
        return
    for mech in MECHANISMS:
        if isinstance(base[mech], SkippedScore) or isinstance(scaled[mech], SkippedScore):
            continue
        assert scaled[mech].value == pytest.approx(base[mech].value, abs=1e-9)
