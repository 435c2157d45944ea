"""Encoder backends.

``StubEncoder`` is a weight-free, fully deterministic stand-in used for tests
and pipeline smoke runs: each patch's vector is seeded from a hash of that
patch's pixels and position, so unchanged regions of an edited image map to
identical vectors while edited regions diverge — the locality structure real
encoders exhibit, without any model download.

``TransformersEncoder`` runs the real models; torch/transformers are imported
lazily so the package works without them installed.
"""

from __future__ import annotations

import hashlib

import numpy as np
from PIL import Image

from .errors import InferenceFailure
from .registry import ModelSpec

_DYNAMIC_MAX_SIDE = 1024


def load_image_rgb(path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except (OSError, ValueError) as exc:
        raise InferenceFailure(f"cannot read image {path}: {exc}") from exc


def _canvas_shape(spec: ModelSpec, image: np.ndarray) -> tuple[int, int]:
    """Pixel size the encoder sees: the model's default resize policy."""
    if spec.fixed_resolution is not None:
        return spec.fixed_resolution, spec.fixed_resolution
    h, w = image.shape[:2]
    scale = min(1.0, _DYNAMIC_MAX_SIDE / max(h, w))
    patch = spec.patch_px or 1
    rows = max(1, round(h * scale / patch))
    cols = max(1, round(w * scale / patch))
    return rows * patch, cols * patch


def _seeded_vector(seed_bytes: bytes, dim: int) -> np.ndarray:
    digest = hashlib.sha256(seed_bytes).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    return rng.standard_normal(dim).astype(np.float32)


class StubEncoder:
    """Deterministic hash-based encoder; no weights, no network."""

    def __init__(self, spec: ModelSpec, device: str = "cpu"):
        self.spec = spec
        self.device = device

    def encode(self, image: np.ndarray) -> tuple[np.ndarray, tuple[int, int] | None]:
        spec = self.spec
        if spec.single_vector:
            vec = _seeded_vector(spec.model_id.encode() + image.tobytes(), spec.dim)
            return vec[None, :], None

        h, w = _canvas_shape(spec, image)
        canvas = np.asarray(
            Image.fromarray(image).resize((w, h), Image.NEAREST), dtype=np.uint8
        )
        patch = spec.patch_px
        rows, cols = h // patch, w // patch
        matrix = np.empty((rows * cols, spec.dim), dtype=np.float32)
        tag = spec.model_id.encode()
        for r in range(rows):
            for c in range(cols):
                block = canvas[r * patch : (r + 1) * patch, c * patch : (c + 1) * patch]
                seed = b"%s|%d,%d|" % (tag, r, c) + block.tobytes()
                matrix[r * cols + c] = _seeded_vector(seed, spec.dim)
        return matrix, (rows, cols)


class TransformersEncoder:
    """Runs the registered checkpoint with deterministic inference settings."""

    def __init__(self, spec: ModelSpec, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoModel, AutoProcessor
        except ImportError as exc:
            raise InferenceFailure(
                "torch/transformers not installed; install the 'models' extra "
                "or use the stub backend"
            ) from exc
        self.spec = spec
        self.device = device
        self._torch = torch
        self.processor = AutoProcessor.from_pretrained(spec.hf_repo, trust_remote_code=True)
        self.model = (
            AutoModel.from_pretrained(
                spec.hf_repo, torch_dtype=torch.float32, trust_remote_code=True
            )
            .to(device)
            .eval()
        )

    def encode(self, image: np.ndarray) -> tuple[np.ndarray, tuple[int, int] | None]:
        torch = self._torch
        pil = Image.fromarray(image)
        inputs = self.processor(images=pil, return_tensors="pt").to(self.device)
        with torch.no_grad():
            if self.spec.single_vector and hasattr(self.model, "get_image_features"):
                feats = self.model.get_image_features(**inputs)
                return feats.float().cpu().numpy().reshape(1, -1), None
            if hasattr(self.model, "visual"):
                seq = self.model.visual(
                    inputs["pixel_values"], grid_thw=inputs.get("image_grid_thw")
                )
            elif hasattr(self.model, "get_image_features"):
                seq = self.model.get_image_features(**inputs)
            else:
                raise InferenceFailure(
                    f"{self.spec.hf_repo}: no known patch-sequence hook "
                    f"({self.spec.hook})"
                )
        matrix = seq.float().cpu().numpy().reshape(-1, seq.shape[-1])
        grid = None
        thw = inputs.get("image_grid_thw")
        if thw is not None:
            _, gh, gw = (int(v) for v in thw[0])
            merge = max(1, round((gh * gw / matrix.shape[0]) ** 0.5))
            if (gh // merge) * (gw // merge) == matrix.shape[0]:
                grid = (gh // merge, gw // merge)
        return matrix, grid


BACKENDS = {"stub": StubEncoder, "transformers": TransformersEncoder}


def make_backend(name: str, spec: ModelSpec, device: str = "cpu"):
    try:
        cls = BACKENDS[name]
    except KeyError:
        raise InferenceFailure(
            f"unknown backend {name!r}; choose from {sorted(BACKENDS)}"
        ) from None
    return cls(spec, device)
