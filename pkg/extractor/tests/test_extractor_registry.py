import pytest

from patchprobe_extractor import REGISTRY, UnsupportedModel, get_model_spec

PAPER_MODELS = (
    "Qwen2.5-VL-7B",
    "Qwen2.5-VL-32B",
    "LLaVA-v1.5",
    "Phi-3.5-Vision",
    "DeepEncoder",
    "Qwen3-VL-Embedding-8B",
    "GME-Qwen2-VL-7B",
)


def test_registry_covers_all_seven_models():
    assert set(REGISTRY) == set(PAPER_MODELS)


def test_unknown_model_rejected():
    with pytest.raises(UnsupportedModel):
        get_model_spec("CLIP-ViT-L")


def test_every_spec_documents_its_hook_and_dim():
    for spec in REGISTRY.values():
        assert spec.hook
        assert spec.hf_repo
        assert spec.dim > 0


def test_single_vector_models():
    for model_id in ("Qwen3-VL-Embedding-8B", "GME-Qwen2-VL-7B"):
        spec = get_model_spec(model_id)
        assert spec.single_vector
        assert spec.patch_px is None
        assert not spec.exposes_grid


def test_patch_models_expose_grid():
    spec = get_model_spec("Qwen2.5-VL-7B")
    assert not spec.single_vector
    assert spec.patch_px == 28
    assert spec.exposes_grid
