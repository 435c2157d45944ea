"""Supported vision-language encoders and where their patch sequences are tapped.

Each entry records the hook point used for extraction: the output of the
model's vision-to-language projection layer (the patch sequence the language
model actually consumes), except for the two retrieval-embedding models, which
natively emit a single pooled vector that is stored as a 1 x dim set so the
same scoring pipeline applies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnsupportedModel


@dataclass(frozen=True)
class ModelSpec:
    model_id: str
    hf_repo: str
    hook: str
    dim: int
    patch_px: int | None
    fixed_resolution: int | None
    single_vector: bool = False

    @property
    def exposes_grid(self) -> bool:
        return not self.single_vector


_SPECS = (
    ModelSpec(
        model_id="Qwen2.5-VL-7B",
        hf_repo="Qwen/Qwen2.5-VL-7B-Instruct",
        hook="visual.merger output (post-projection patch sequence)",
        dim=3584,
        patch_px=28,
        fixed_resolution=None,
    ),
    ModelSpec(
        model_id="Qwen2.5-VL-32B",
        hf_repo="Qwen/Qwen2.5-VL-32B-Instruct",
        hook="visual.merger output (post-projection patch sequence)",
        dim=5120,
        patch_px=28,
        fixed_resolution=None,
    ),
    ModelSpec(
        model_id="LLaVA-v1.5",
        hf_repo="llava-hf/llava-1.5-7b-hf",
        hook="multi_modal_projector output",
        dim=4096,
        patch_px=14,
        fixed_resolution=336,
    ),
    ModelSpec(
        model_id="Phi-3.5-Vision",
        hf_repo="microsoft/Phi-3.5-vision-instruct",
        hook="img_projection output (global crop)",
        dim=3072,
        patch_px=14,
        fixed_resolution=336,
    ),
    ModelSpec(
        model_id="DeepEncoder",
        hf_repo="deepseek-ai/DeepSeek-OCR",
        hook="projector output after SAM+CLIP serial encoder",
        dim=1280,
        patch_px=16,
        fixed_resolution=None,
    ),
    ModelSpec(
        model_id="Qwen3-VL-Embedding-8B",
        hf_repo="Qwen/Qwen3-VL-Embedding-8B",
        hook="final pooled retrieval embedding (stored as a 1 x dim set)",
        dim=4096,
        patch_px=None,
        fixed_resolution=None,
        single_vector=True,
    ),
    ModelSpec(
        model_id="GME-Qwen2-VL-7B",
        hf_repo="Alibaba-NLP/gme-Qwen2-VL-7B-Instruct",
        hook="final pooled retrieval embedding (stored as a 1 x dim set)",
        dim=3584,
        patch_px=None,
        fixed_resolution=None,
        single_vector=True,
    ),
)

REGISTRY: dict[str, ModelSpec] = {spec.model_id: spec for spec in _SPECS}


def get_model_spec(model_id: str) -> ModelSpec:
    try:
        return REGISTRY[model_id]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise UnsupportedModel(f"unknown model {model_id!r}; supported: {known}") from None
