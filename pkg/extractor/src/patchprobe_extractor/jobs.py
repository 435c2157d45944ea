"""Extraction jobs: one (model, image, variant) -> one tensor file + sidecar."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .backends import load_image_rgb, make_backend
from .emit import VARIANTS, write_patch_file
from .errors import ExtractorError, InvalidJob
from .registry import get_model_spec


@dataclass
class ExtractionJob:
    model_id: str
    image_path: str
    variant: str
    output_path: str
    doc_id: str = ""
    dataset: str = "other"
    resize_policy: str = "model default"

    def __post_init__(self):
        get_model_spec(self.model_id)  # raises UnsupportedModel early
        if self.variant not in VARIANTS:
            raise InvalidJob(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.resize_policy != "model default":
            raise InvalidJob(f"unsupported resize_policy {self.resize_policy!r}")
        if not self.doc_id:
            self.doc_id = Path(self.image_path).stem


@dataclass
class JobResult:
    job: ExtractionJob
    status: str  # "ok" | "failed"
    error: str = ""


@dataclass
class BatchSummary:
    results: list[JobResult] = field(default_factory=list)

    @property
    def ok(self) -> int:
        return sum(1 for r in self.results if r.status == "ok")

    @property
    def failed(self) -> int:
        return sum(1 for r in self.results if r.status == "failed")


def extract(job: ExtractionJob, *, backend=None, backend_name: str = "stub",
            device: str = "cpu") -> Path:
    """Run one job; returns the written tensor path."""
    spec = get_model_spec(job.model_id)
    if backend is None:
        backend = make_backend(backend_name, spec, device)
    image = load_image_rgb(job.image_path)
    matrix, grid = backend.encode(image)
    return write_patch_file(
        matrix,
        job.output_path,
        doc_id=job.doc_id,
        model_id=job.model_id,
        variant=job.variant,
        grid=grid,
        source_image_path=str(job.image_path),
        dataset=job.dataset,
    )


def batch_extract(jobs, *, device: str = "cpu", batch_size: int = 8,
                  backend_name: str = "stub") -> BatchSummary:
    """Run jobs grouped by model (one model in memory at a time).

    Per-job failures are recorded in the summary and never abort the batch.
    """
    summary = BatchSummary()
    by_model: dict[str, list[ExtractionJob]] = {}
    for job in jobs:
        by_model.setdefault(job.model_id, []).append(job)

    results: dict[int, JobResult] = {}
    for model_id, group in by_model.items():
        try:
            backend = make_backend(backend_name, get_model_spec(model_id), device)
        except ExtractorError as exc:
            for job in group:
                results[id(job)] = JobResult(job, "failed", str(exc))
            continue
        for job in group:
            try:
                extract(job, backend=backend)
                results[id(job)] = JobResult(job, "ok")
            except ExtractorError as exc:
                results[id(job)] = JobResult(job, "failed", str(exc))

    summary.results = [results[id(job)] for job in jobs]
    return summary
