from .backends import BACKENDS, StubEncoder, TransformersEncoder, make_backend
from .emit import DATASETS, VARIANTS, write_patch_file
from .errors import ExtractorError, InferenceFailure, InvalidJob, UnsupportedModel
from .jobs import BatchSummary, ExtractionJob, JobResult, batch_extract, extract
from .registry import REGISTRY, ModelSpec, get_model_spec

__version__ = "0.1.0"

__all__ = [
    "BACKENDS",
    "BatchSummary",
    "DATASETS",
    "ExtractionJob",
    "ExtractorError",
    "InferenceFailure",
    "InvalidJob",
    "JobResult",
    "ModelSpec",
    "REGISTRY",
    "StubEncoder",
    "TransformersEncoder",
    "UnsupportedModel",
    "VARIANTS",
    "batch_extract",
    "extract",
    "get_model_spec",
    "make_backend",
    "write_patch_file",
]
