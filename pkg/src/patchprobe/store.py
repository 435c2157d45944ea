"""Embedding tensor file format (NPY v1.0 + JSON sidecar) and validated in-memory sets.

Every other module consumes :class:`PatchEmbeddingSet`; this module owns the
on-disk contract: a strict little-endian float32 C-order NPY v1.0 tensor of
shape (n_patches, dim) with a mandatory sidecar carrying provenance.
"""

from __future__ import annotations

import ast
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InvariantViolation,
    IoFailure,
    MalformedHeader,
    NonFiniteValue,
    ShapeMismatch,
)

VARIANTS = ("reference", "counterfactual", "signal", "noise")
DATASETS = ("finqa", "tatdqa", "other")

_NPY_MAGIC = b"\x93NUMPY"


@dataclass
class PatchEmbeddingSet:
    """One document image variant's patch matrix plus provenance.

    Immutable by convention: the matrix is flagged read-only on construction
    so loaded sets are safe to share across concurrent readers.
    """

    doc_id: str
    model_id: str
    variant: str
    matrix: np.ndarray
    grid: tuple[int, int] | None = None
    source_image_path: str = ""
    dataset: str = "other"

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float32)
        if self.matrix.ndim != 2:
            raise InvariantViolation(f"matrix must be 2-D, got ndim={self.matrix.ndim}")
        self.matrix.flags.writeable = False

    @property
    def n_patches(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PatchEmbeddingSet):
            return NotImplemented
        return (
            self.doc_id == other.doc_id
            and self.model_id == other.model_id
            and self.variant == other.variant
            and self.grid == other.grid
            and self.source_image_path == other.source_image_path
            and self.dataset == other.dataset
            and self.matrix.shape == other.matrix.shape
            and np.array_equal(
                self.matrix.view(np.uint32), other.matrix.view(np.uint32)
            )
        )


def validate(s: PatchEmbeddingSet) -> list[str]:
    """Return all invariant violations; empty list iff the set is valid."""
    violations = []
    if s.variant not in VARIANTS:
        violations.append(f"UnknownVariant({s.variant!r})")
    if s.n_patches < 1:
        violations.append("EmptyPatchSet(n_patches=0)")
    if s.dim < 1:
        violations.append("EmptyDim(dim=0)")
    if s.grid is not None:
        rows, cols = s.grid
        if rows < 1 or cols < 1:
            violations.append(f"GridMismatch(non-positive grid {s.grid})")
        elif rows * cols != s.n_patches:
            violations.append(
                f"GridMismatch({rows}x{cols} != n_patches {s.n_patches})"
            )
    bad = ~np.isfinite(s.matrix)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        violations.append(f"NonFiniteValue({row},{col})")
    return violations


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json")


def _write_npy(matrix: np.ndarray, path: Path) -> None:
    header = {"descr": "<f4", "fortran_order": False, "shape": matrix.shape}
    with open(path, "wb") as f:
        np.lib.format.write_array_header_1_0(f, header)
        f.write(matrix.tobytes(order="C"))


def _read_npy_strict(path: Path) -> np.ndarray:
    """Read an NPY v1.0 float32 2-D tensor, rejecting any deviation or truncation."""
    with open(path, "rb") as f:
        magic = f.read(len(_NPY_MAGIC))
        if magic != _NPY_MAGIC:
            raise MalformedHeader(f"{path}: bad magic {magic!r}")
        version = f.read(2)
        if version != b"\x01\x00":
            raise MalformedHeader(f"{path}: unsupported NPY version {version!r}")
        hlen_bytes = f.read(2)
        if len(hlen_bytes) != 2:
            raise MalformedHeader(f"{path}: truncated header length")
        (hlen,) = struct.unpack("<H", hlen_bytes)
        header_bytes = f.read(hlen)
        if len(header_bytes) != hlen:
            raise MalformedHeader(f"{path}: truncated header")
        try:
            info = ast.literal_eval(header_bytes.decode("latin1").strip())
        except Exception as exc:
            raise MalformedHeader(f"{path}: unparseable header: {exc}") from exc
        if (
            not isinstance(info, dict)
            or info.get("descr") != "<f4"
            or info.get("fortran_order") is not False
        ):
            raise MalformedHeader(f"{path}: expected little-endian float32 C-order, got {info!r}")
        shape = info.get("shape")
        if (
            not isinstance(shape, tuple)
            or len(shape) != 2
            or not all(isinstance(v, int) and v >= 0 for v in shape)
        ):
            raise MalformedHeader(f"{path}: expected 2-D shape, got {shape!r}")
        expected = shape[0] * shape[1] * 4
        payload = f.read(expected + 1)
        if len(payload) < expected:
            raise MalformedHeader(
                f"{path}: truncated payload ({len(payload)} of {expected} bytes)"
            )
        if len(payload) > expected:
            raise MalformedHeader(f"{path}: trailing bytes after payload")
    return np.frombuffer(payload, dtype="<f4").reshape(shape)


def save_embeddings(s: PatchEmbeddingSet, path: str | Path) -> None:
    """Write the tensor file and sidecar; load_embeddings(path) reproduces s exactly."""
    violations = validate(s)
    if violations:
        raise InvariantViolation("; ".join(violations))
    path = Path(path)
    sidecar = {
        "doc_id": s.doc_id,
        "model_id": s.model_id,
        "variant": s.variant,
        "n_patches": s.n_patches,
        "dim": s.dim,
        "grid": list(s.grid) if s.grid is not None else None,
        "source_image_path": s.source_image_path,
        "dataset": s.dataset,
    }
    try:
        _write_npy(s.matrix, path)
        _sidecar_path(path).write_text(
            json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc


def load_embeddings(path: str | Path) -> PatchEmbeddingSet:
    """Load and validate a tensor file + sidecar pair."""
    path = Path(path)
    try:
        matrix = _read_npy_strict(path)
        sidecar_text = _sidecar_path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"reading {path}: {exc}") from exc
    try:
        meta = json.loads(sidecar_text)
    except json.JSONDecodeError as exc:
        raise MalformedHeader(f"{_sidecar_path(path)}: invalid JSON: {exc}") from exc

    if (meta.get("n_patches"), meta.get("dim")) != matrix.shape:
        raise ShapeMismatch(
            f"{path}: header shape {matrix.shape} != sidecar "
            f"({meta.get('n_patches')}, {meta.get('dim')})"
        )
    grid = meta.get("grid")
    s = PatchEmbeddingSet(
        doc_id=meta.get("doc_id", ""),
        model_id=meta.get("model_id", ""),
        variant=meta.get("variant", ""),
        matrix=matrix,
        grid=tuple(grid) if grid is not None else None,
        source_image_path=meta.get("source_image_path", ""),
        dataset=meta.get("dataset", "other"),
    )
    violations = validate(s)
    for v in violations:
        if v.startswith("NonFiniteValue"):
            bad = ~np.isfinite(matrix)
            row, col = np.argwhere(bad)[0]
            raise NonFiniteValue(int(row), int(col))
    if violations:
        raise InvariantViolation("; ".join(violations))
    return s
