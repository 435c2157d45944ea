"""Acceptance suite: one test per exit criterion, each printing a PASS line."""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from patchprobe.attention import AttentionTriplet, attention_gap
from patchprobe.harness import load_bench_config, run_bench
from patchprobe.mitigation import (
    PatchWeights,
    score_mitigations,
    topk_removal_score,
    weighted_mean_score,
)
from patchprobe.perturb import (
    apply_occlusion,
    apply_text_replacement,
    make_noise_image,
    make_signal_image,
)
from patchprobe.similarity import (
    maxsim_score,
    mean_pool_score,
    meanpatch_score,
    minpatch_score,
    score_all,
)
from patchprobe.synth import generate_synthetic_pair

from probe_helpers import basis_rows, make_set
from oracles import maxsim_oracle

CONFIG = Path(__file__).parent.parent / "configs" / "synthetic_bench.toml"
GOLDEN = Path(__file__).parent / "golden"


def test_acceptance_identity_and_bounds():
    start = time.monotonic()
    rng = np.random.default_rng(2024)

    for _ in range(200):
        n = int(rng.integers(1, 32))
        d = int(rng.integers(2, 64))
        v = make_set(rng.standard_normal((n, d)).astype(np.float32) + 0.25)
        for entry in score_all(v, v).values():
            assert entry.value == pytest.approx(1.0, abs=1e-9)
            assert -1.0 <= entry.value <= 1.0

    for _ in range(1000):
        n = int(rng.integers(1, 24))
        d = int(rng.integers(2, 48))
        a = make_set(rng.standard_normal((n, d)).astype(np.float32))
        b = make_set(rng.standard_normal((n, d)).astype(np.float32))
        lo = minpatch_score(a, b).value
        mid = meanpatch_score(a, b).value
        hi = maxsim_score(a, b, "a_to_b").value
        assert lo <= mid + 1e-9 <= hi + 2e-9
        for value in (lo, mid, hi):
            assert -1.0 <= value <= 1.0

    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    print(f"\nPASS identity & bounds suite ({elapsed:.1f}s)")


def test_acceptance_maxsim_kernel_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(99)
    for _ in range(1000):
        n_a = int(rng.integers(1, 65))
        n_b = int(rng.integers(1, 65))
        d = int(rng.integers(2, 129))
        a = make_set(rng.standard_normal((n_a, d)).astype(np.float32))
        b = make_set(rng.standard_normal((n_b, d)).astype(np.float32))
        got = maxsim_score(a, b, "a_to_b").value
        want = maxsim_oracle(a.matrix, b.matrix)
        assert got == pytest.approx(want, abs=1e-6)
    elapsed = time.monotonic() - start
    assert elapsed < 60.0
    print(f"\nPASS maxsim kernel vs brute-force oracle, 1000 instances ({elapsed:.1f}s)")


def test_acceptance_collapse_reproduction():
    a, b = generate_synthetic_pair(100, 64, 1, math.pi / 2, seed=7)
    results = score_all(a, b)
    assert results["mean_pool"].value >= 0.9999
    assert results["max_pool"].value == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    assert results["maxsim"].value == pytest.approx(1.0, abs=1e-9)
    assert results["meanpatch"].value == pytest.approx(0.99, abs=1e-9)
    assert results["minpatch"].value == pytest.approx(0.0, abs=1e-9)
    print("\nPASS collapse reproduction (n=100, one orthogonal changed patch)")


def test_acceptance_mitigation_reductions():
    start = time.monotonic()
    rng = np.random.default_rng(5)

    for _ in range(20):
        n = int(rng.integers(2, 40))
        d = int(rng.integers(2, 32))
        a = make_set(rng.standard_normal((n, d)).astype(np.float32) + 0.5)
        b = make_set(rng.standard_normal((n, d)).astype(np.float32) + 0.5)
        mean = mean_pool_score(a, b).value
        assert topk_removal_score(a, b, 0) == pytest.approx(mean, abs=1e-12)
        uniform = PatchWeights(np.full(n, 1.0 / n), "uniform_fallback")
        assert weighted_mean_score(a, b, uniform, uniform) == pytest.approx(mean, abs=1e-9)

    a, b = generate_synthetic_pair(100, 64, 1, math.pi / 2, seed=7)
    scores = score_mitigations(a, b, k=50)
    for strat in ("varwgt", "attngd", "topkr"):
        assert scores[strat] >= 0.999, strat

    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    print(f"\nPASS mitigation reductions and collapse-family failure ({elapsed:.1f}s)")


def test_acceptance_perturbation_pixel_exactness():
    start = time.monotonic()
    rng = np.random.default_rng(17)
    digits = "0123456789"

    for i in range(50):
        h, w = 80, 120
        page = np.full((h, w, 3), 255, dtype=np.uint8)
        page[15, 5:115] = 0
        page[55, 5:115] = 0
        bbox = (10, 20, 60, 20)
        value = "".join(rng.choice(list(digits), size=4)) + "." + str(rng.integers(0, 10))
        original = apply_text_replacement(page, bbox, value, 7, color=(255, 255, 255))

        # occlusion locality
        occluded = apply_occlusion(original, bbox, (255, 255, 255))
        diff = np.any(occluded != original, axis=2)
        outside = np.ones_like(diff)
        outside[20:40, 10:70] = False
        assert not np.any(diff & outside)

        # render-twice oracle: edit of original render == direct counterfactual render
        counter_value = value[:-1] + str((int(value[-1]) + 3) % 10)
        edited = apply_text_replacement(original, bbox, counter_value, 7, color=(255, 255, 255))
        direct = apply_text_replacement(page, bbox, counter_value, 7, color=(255, 255, 255))
        assert np.array_equal(edited, direct)

    for _ in range(50):
        img = rng.integers(0, 256, size=(40, 50, 3), dtype=np.uint8)
        x = int(rng.integers(0, 45))
        y = int(rng.integers(0, 35))
        bw = int(rng.integers(1, 50 - x + 1))
        bh = int(rng.integers(1, 40 - y + 1))
        color = (255, 255, 255)
        signal = make_signal_image(img, (x, y, bw, bh), color)
        noise = make_noise_image(img, (x, y, bw, bh), color)
        sig_diff = np.any(signal != img, axis=2)
        noise_diff = np.any(noise != img, axis=2)
        assert not np.any(sig_diff & noise_diff)

    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    print(f"\nPASS perturbation pixel-exactness ({elapsed:.1f}s)")


def _layout_triplet(layout_count, table_count, dim=8):
    ref = basis_rows([0] * layout_count + [1] * table_count, dim)
    sig = basis_rows([2] * layout_count + [1] * table_count, dim)
    noi = basis_rows([0] * layout_count + [2] * table_count, dim)
    return AttentionTriplet(
        reference=make_set(ref, variant="reference"),
        signal=make_set(sig, variant="signal"),
        noise=make_set(noi, variant="noise"),
    )


def test_acceptance_attention_gap():
    t90 = _layout_triplet(90, 10)
    assert attention_gap(t90, "mean_pool").gap > 0

    gaps = []
    for p in (0.5, 0.7, 0.9, 0.95):
        layout_count = round(p * 100)
        t = _layout_triplet(layout_count, 100 - layout_count)
        gaps.append(attention_gap(t, "mean_pool").gap)
    assert all(b > a for a, b in zip(gaps, gaps[1:]))

    swapped = AttentionTriplet(
        reference=t90.reference,
        signal=make_set(t90.noise.matrix, variant="signal"),
        noise=make_set(t90.signal.matrix, variant="noise"),
    )
    assert attention_gap(swapped, "mean_pool").gap == pytest.approx(
        -attention_gap(t90, "mean_pool").gap, abs=1e-12
    )
    print("\nPASS attention gap: positive, monotone in layout fraction, antisymmetric")


def test_acceptance_determinism_and_golden_layout(tmp_path, monkeypatch):
    monkeypatch.delenv("PATCHPROBE_THREADS", raising=False)
    outputs = {}
    for workers in (1, 8):
        cfg = load_bench_config(CONFIG)
        cfg.out_dir = str(tmp_path / f"par{workers}")
        cfg.parallelism = workers
        result = run_bench(cfg)
        assert not result.failures
        outputs[workers] = {n: p.read_bytes() for n, p in result.outputs.items()}
    for name in outputs[1]:
        assert outputs[1][name] == outputs[8][name], name

    sens = (tmp_path / "par1" / "sensitivity.csv").read_text()
    header = sens.splitlines()[0]
    assert header.endswith("Mean,synthetic_Max,synthetic_MaxSim,synthetic_MeanP,synthetic_MinP")
    for cell in sens.splitlines()[1].split(",")[2:]:
        assert len(cell.split(".")[1]) == 4  # fixed 4-decimal formatting

    for name in ("sensitivity.csv", "sensitivity.md", "mitigation.csv", "mitigation.md"):
        assert (tmp_path / "par1" / name).read_bytes() == (GOLDEN / name).read_bytes(), name
    print("\nPASS determinism across parallelism + golden report layout")
