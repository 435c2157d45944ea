"""Manifest-driven pixel edits producing counterfactual / occluded /
signal / noise document image variants.

All edits are pixel-exact: fills write the exact requested RGB, glyphs are
binary bitmaps, outputs are lossless PNG. Pixels outside the edited region
are never touched (for keep_only edits, never touched inside the region).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import font5x7
from .errors import (
    BboxOutOfBounds,
    InvalidInputError,
    IoFailure,
    TextDoesNotFit,
)

CONDITIONS = ("micro", "macro", "text_occlusion", "signal", "noise")
EDIT_KINDS = ("occlude", "replace_text", "keep_only")

DEFAULT_INK = (0, 0, 0)

# Width of the ring just outside a bbox probed for the local background color.
_PROBE_RING = 5


@dataclass(frozen=True)
class Edit:
    kind: str
    bbox: tuple[int, int, int, int]  # x, y, w, h
    color: tuple[int, int, int] | None = None
    text: str | None = None
    font_px: int | None = None


@dataclass(frozen=True)
class EditManifest:
    source_image: str
    edits: tuple[Edit, ...]
    output_image: str
    condition: str


@dataclass
class EditReport:
    output_image: str
    edits_applied: int
    pixels_changed: list[int] = field(default_factory=list)

    @property
    def total_pixels_changed(self) -> int:
        return sum(self.pixels_changed)


def load_image(path: str | Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except OSError as exc:
        raise IoFailure(f"reading image {path}: {exc}") from exc


def save_image_png(image: np.ndarray, path: str | Path) -> None:
    try:
        Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8), "RGB").save(
            path, format="PNG"
        )
    except OSError as exc:
        raise IoFailure(f"writing image {path}: {exc}") from exc


def _check_bbox(image: np.ndarray, bbox: tuple[int, int, int, int]) -> None:
    h, w = image.shape[:2]
    x, y, bw, bh = bbox
    if bw < 1 or bh < 1 or x < 0 or y < 0 or x + bw > w or y + bh > h:
        raise BboxOutOfBounds(f"bbox {bbox} outside {w}x{h} image")


def dominant_background_color(
    image: np.ndarray, probe_region: tuple[int, int, int, int] | None = None
) -> tuple[int, int, int]:
    """Most frequent exact RGB triple, ties broken toward the lighter color."""
    if probe_region is not None:
        _check_bbox(image, probe_region)
        x, y, w, h = probe_region
        pixels = image[y : y + h, x : x + w].reshape(-1, 3)
    else:
        pixels = image.reshape(-1, 3)
    codes = (
        pixels[:, 0].astype(np.int64) * 65536
        + pixels[:, 1].astype(np.int64) * 256
        + pixels[:, 2].astype(np.int64)
    )
    values, counts = np.unique(codes, return_counts=True)
    candidates = values[counts == counts.max()]
    sums = candidates // 65536 + (candidates // 256) % 256 + candidates % 256
    # lighter (higher R+G+B) wins; among equal sums, higher code for determinism
    best = candidates[np.lexsort((candidates, sums))][-1]
    return (int(best // 65536), int((best // 256) % 256), int(best % 256))


def _ring_fill_color(image: np.ndarray, bbox: tuple[int, int, int, int]) -> tuple[int, int, int]:
    """Background color probed from the ring just outside bbox; whole-image fallback."""
    h, w = image.shape[:2]
    x, y, bw, bh = bbox
    x0, y0 = max(0, x - _PROBE_RING), max(0, y - _PROBE_RING)
    x1, y1 = min(w, x + bw + _PROBE_RING), min(h, y + bh + _PROBE_RING)
    mask = np.zeros((h, w), dtype=bool)
    mask[y0:y1, x0:x1] = True
    mask[y : y + bh, x : x + bw] = False
    ring = image[mask]
    if ring.size == 0:
        return dominant_background_color(image)
    return dominant_background_color(ring.reshape(1, -1, 3))


def apply_occlusion(
    image: np.ndarray,
    bbox: tuple[int, int, int, int],
    color: tuple[int, int, int] | None = None,
) -> np.ndarray:
    """Fill bbox with a flat color (default: local background); rest untouched."""
    _check_bbox(image, bbox)
    if color is None:
        color = _ring_fill_color(image, bbox)
    x, y, w, h = bbox
    out = image.copy()
    out[y : y + h, x : x + w] = np.array(color, dtype=np.uint8)
    return out


def apply_text_replacement(
    image: np.ndarray,
    bbox: tuple[int, int, int, int],
    text: str,
    font_px: int,
    color: tuple[int, int, int] | None = None,
    ink: tuple[int, int, int] = DEFAULT_INK,
) -> np.ndarray:
    """Clear bbox to background, then render text left-aligned, vertically centered."""
    _check_bbox(image, bbox)
    if not text:
        raise InvalidInputError("replacement text must be non-empty")
    if font_px is None or font_px < 1:
        raise InvalidInputError(f"font_px must be a positive integer, got {font_px}")
    x, y, w, h = bbox
    text_w = font5x7.text_width(text, font_px)
    if text_w > w or font_px > h:
        raise TextDoesNotFit(
            f"{text!r} at {font_px}px needs {text_w}x{font_px}, bbox is {w}x{h}"
        )
    out = apply_occlusion(image, bbox, color)
    mask = font5x7.render_text_mask(text, font_px)
    y0 = y + (h - font_px) // 2
    region = out[y0 : y0 + font_px, x : x + text_w]
    region[mask] = np.array(ink, dtype=np.uint8)
    return out


def make_signal_image(
    image: np.ndarray,
    table_bbox: tuple[int, int, int, int],
    color: tuple[int, int, int] | None = None,
) -> np.ndarray:
    """Keep the table region, fill everything outside with the background color."""
    _check_bbox(image, table_bbox)
    if color is None:
        color = _ring_fill_color(image, table_bbox)
    x, y, w, h = table_bbox
    out = np.empty_like(image)
    out[:, :] = np.array(color, dtype=np.uint8)
    out[y : y + h, x : x + w] = image[y : y + h, x : x + w]
    return out


def make_noise_image(
    image: np.ndarray,
    table_bbox: tuple[int, int, int, int],
    color: tuple[int, int, int] | None = None,
) -> np.ndarray:
    """Erase the table region with the background color, keep everything else."""
    return apply_occlusion(image, table_bbox, color)


def _edit_from_dict(d: dict) -> Edit:
    kind = d.get("kind")
    if kind not in EDIT_KINDS:
        raise InvalidInputError(f"unknown edit kind {kind!r}")
    bbox = d.get("bbox")
    if (
        not isinstance(bbox, (list, tuple))
        or len(bbox) != 4
        or not all(isinstance(v, int) for v in bbox)
    ):
        raise InvalidInputError(f"bbox must be [x, y, w, h] integers, got {bbox!r}")
    if bbox[2] < 1 or bbox[3] < 1:
        raise InvalidInputError(f"bbox must have positive area, got {bbox!r}")
    color = d.get("color")
    if color is not None:
        if len(color) != 3 or not all(isinstance(v, int) and 0 <= v <= 255 for v in color):
            raise InvalidInputError(f"color must be [r, g, b] in 0-255, got {color!r}")
        color = tuple(color)
    edit = Edit(
        kind=kind,
        bbox=tuple(bbox),
        color=color,
        text=d.get("text"),
        font_px=d.get("font_px"),
    )
    if kind == "replace_text":
        if not edit.text or not edit.font_px or edit.font_px < 1:
            raise InvalidInputError("replace_text requires text and positive font_px")
    return edit


def manifest_from_dict(d: dict) -> EditManifest:
    condition = d.get("condition")
    if condition not in CONDITIONS:
        raise InvalidInputError(f"unknown condition {condition!r}")
    edits = tuple(_edit_from_dict(e) for e in d.get("edits", []))
    if not edits:
        raise InvalidInputError("manifest must contain at least one edit")
    kinds = [e.kind for e in edits]
    if condition == "signal" and kinds != ["keep_only"]:
        raise InvalidInputError("signal manifests need exactly one keep_only edit")
    if condition == "noise" and any(k != "occlude" for k in kinds):
        raise InvalidInputError("noise manifests allow occlude edits only")
    for key in ("source_image", "output_image"):
        if not d.get(key):
            raise InvalidInputError(f"manifest missing {key}")
    return EditManifest(
        source_image=d["source_image"],
        edits=edits,
        output_image=d["output_image"],
        condition=condition,
    )


def load_manifests(path: str | Path) -> list[EditManifest]:
    """Parse a JSON Lines manifest file (one EditManifest per line)."""
    manifests = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoFailure(f"reading manifest {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        try:
            manifests.append(manifest_from_dict(d))
        except InvalidInputError as exc:
            raise InvalidInputError(f"{path}:{lineno}: {exc}") from exc
    return manifests


def apply_edit(image: np.ndarray, edit: Edit) -> np.ndarray:
    if edit.kind == "occlude":
        return apply_occlusion(image, edit.bbox, edit.color)
    if edit.kind == "replace_text":
        return apply_text_replacement(image, edit.bbox, edit.text, edit.font_px, edit.color)
    return make_signal_image(image, edit.bbox, edit.color)


def run_manifest(manifest: EditManifest) -> EditReport:
    """Apply all edits in order and write the PNG output losslessly.

    Any edit failure aborts before the output file exists; the write is
    temp-file + rename so no partial output is ever visible.
    """
    image = load_image(manifest.source_image)
    report = EditReport(output_image=manifest.output_image, edits_applied=0)
    for edit in manifest.edits:
        edited = apply_edit(image, edit)
        report.pixels_changed.append(int(np.any(edited != image, axis=2).sum()))
        report.edits_applied += 1
        image = edited
    out_path = Path(manifest.output_image)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = out_path.with_name(out_path.name + ".tmp")
    save_image_png(image, tmp)
    os.replace(tmp, out_path)
    return report
