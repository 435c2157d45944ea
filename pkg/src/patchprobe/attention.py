"""Layout-vs-data bias from reference / signal / noise embedding triplets.

A positive gap (similarity to the layout-only variant minus similarity to
the table-only variant) means the scoring mechanism is dominated by page
layout rather than tabular content.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyInput, InvalidInputError, IoFailure
from .similarity import MECHANISMS, score_all
from .store import PatchEmbeddingSet, load_embeddings


@dataclass(frozen=True)
class AttentionTriplet:
    reference: PatchEmbeddingSet
    signal: PatchEmbeddingSet
    noise: PatchEmbeddingSet

    def __post_init__(self):
        dims = {self.reference.dim, self.signal.dim, self.noise.dim}
        if len(dims) != 1:
            raise InvalidInputError(f"triplet dims differ: {dims}")
        for s, expected in (
            (self.reference, "reference"),
            (self.signal, "signal"),
            (self.noise, "noise"),
        ):
            if s.variant != expected:
                raise InvalidInputError(
                    f"expected variant {expected!r}, got {s.variant!r} for {s.doc_id}"
                )


@dataclass(frozen=True)
class AttentionGap:
    mechanism: str
    sim_to_data: float  # reference vs signal
    sim_to_layout: float  # reference vs noise
    gap: float  # sim_to_layout - sim_to_data
    doc_id: str = ""
    model_id: str = ""
    dataset: str = "other"


def attention_gap(t: AttentionTriplet, mechanism: str) -> AttentionGap:
    """Score reference-vs-signal and reference-vs-noise under one mechanism."""
    if mechanism not in MECHANISMS:
        raise InvalidInputError(f"unknown mechanism {mechanism!r}")
    data_entry = score_all(t.reference, t.signal, (mechanism,))[mechanism]
    layout_entry = score_all(t.reference, t.noise, (mechanism,))[mechanism]
    for entry in (data_entry, layout_entry):
        if not hasattr(entry, "value"):
            raise InvalidInputError(f"{mechanism} skipped: {entry.reason}")
    return AttentionGap(
        mechanism=mechanism,
        sim_to_data=data_entry.value,
        sim_to_layout=layout_entry.value,
        gap=layout_entry.value - data_entry.value,
        doc_id=t.reference.doc_id,
        model_id=t.reference.model_id,
        dataset=t.reference.dataset,
    )


def summarize_gaps(gaps: list[AttentionGap]) -> list[dict]:
    """Mean sims and gap per (model, dataset, mechanism), deterministically ordered."""
    if not gaps:
        raise EmptyInput("no attention gaps to summarize")
    groups: dict[tuple[str, str, str], list[AttentionGap]] = {}
    for g in gaps:
        groups.setdefault((g.model_id, g.dataset, g.mechanism), []).append(g)
    rows = []
    for (model_id, dataset, mechanism) in sorted(groups):
        members = groups[(model_id, dataset, mechanism)]
        n = len(members)
        rows.append(
            {
                "model_id": model_id,
                "dataset": dataset,
                "mechanism": mechanism,
                "sim_to_data": sum(m.sim_to_data for m in members) / n,
                "sim_to_layout": sum(m.sim_to_layout for m in members) / n,
                "gap": sum(m.gap for m in members) / n,
                "count": n,
            }
        )
    return rows


def load_triplet_manifest(path: str | Path) -> list[AttentionTriplet]:
    """JSON Lines: {doc_id, model_id, reference_path, signal_path, noise_path, dataset}."""
    triplets = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoFailure(f"reading triplet manifest {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        try:
            triplets.append(
                AttentionTriplet(
                    reference=load_embeddings(d["reference_path"]),
                    signal=load_embeddings(d["signal_path"]),
                    noise=load_embeddings(d["noise_path"]),
                )
            )
        except KeyError as exc:
            raise InvalidInputError(f"{path}:{lineno}: missing field {exc}") from exc
    return triplets
