"""Writer for the patch-embedding file contract: NPY v1.0 tensor + JSON sidecar.

This mirrors the consumer's on-disk format exactly (little-endian float32,
C-order, 2-D shape, sidecar with matching n_patches/dim) without importing the
consumer package; the file formats are the only coupling between the two.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

VARIANTS = ("reference", "counterfactual", "signal", "noise")
DATASETS = ("finqa", "tatdqa", "other")


def write_patch_file(
    matrix: np.ndarray,
    path: str | Path,
    *,
    doc_id: str,
    model_id: str,
    variant: str,
    grid: tuple[int, int] | None = None,
    source_image_path: str = "",
    dataset: str = "other",
) -> Path:
    """Write the tensor and its sidecar; returns the tensor path."""
    path = Path(path)
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got ndim={matrix.ndim}")
    if grid is not None and grid[0] * grid[1] != matrix.shape[0]:
        raise ValueError(f"grid {grid} inconsistent with n_patches {matrix.shape[0]}")

    header = {"descr": "<f4", "fortran_order": False, "shape": matrix.shape}
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        np.lib.format.write_array_header_1_0(f, header)
        f.write(matrix.tobytes(order="C"))

    sidecar = {
        "doc_id": doc_id,
        "model_id": model_id,
        "variant": variant,
        "n_patches": matrix.shape[0],
        "dim": matrix.shape[1],
        "grid": list(grid) if grid is not None else None,
        "source_image_path": source_image_path,
        "dataset": dataset,
    }
    path.with_suffix(".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )
    return path
