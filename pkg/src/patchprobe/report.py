"""Table emission: fixed-order CSV plus companion Markdown, 4-decimal values."""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import EmptyInput

LAYOUTS = ("sensitivity", "mitigation", "attention", "domain")

MECHANISM_LABELS = {
    "mean_pool": "Mean",
    "max_pool": "Max",
    "maxsim": "MaxSim",
    "meanpatch": "MeanP",
    "minpatch": "MinP",
}
MECHANISM_ORDER = ("mean_pool", "max_pool", "maxsim", "meanpatch", "minpatch")

MITIGATION_LABELS = {"varwgt": "VarWgt", "attngd": "AttnGd", "topkr": "TopK-R"}
MITIGATION_ORDER = ("varwgt", "attngd", "topkr")

ATTENTION_COLUMNS = (("sim_to_data", "SimData"), ("sim_to_layout", "SimLayout"), ("gap", "Gap"))


def fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.4f}"


def _aggregate(records, score_keys):
    """Mean score per (condition, model, dataset, key); skipped entries excluded."""
    sums: dict[tuple, float] = {}
    counts: dict[tuple, int] = {}
    skipped = 0
    for rec in records:
        for key in score_keys:
            cell = (rec.condition, rec.model_id, rec.dataset, key)
            value = rec.scores.get(key)
            if value is None:
                if key in rec.skipped:
                    skipped += 1
                continue
            sums[cell] = sums.get(cell, 0.0) + value
            counts[cell] = counts.get(cell, 0) + 1
    means = {cell: sums[cell] / counts[cell] for cell in sums}
    return means, skipped


def _block_table(records, score_keys, labels):
    """Rows (condition, model) x columns (dataset x score key), sorted."""
    means, skipped = _aggregate(records, score_keys)
    conditions = sorted({r.condition for r in records})
    models = sorted({r.model_id for r in records})
    datasets = sorted({r.dataset for r in records})
    header = ["condition", "model"]
    for ds in datasets:
        header.extend(f"{ds}_{labels[key]}" for key in score_keys)
    rows = []
    for cond in conditions:
        for model in models:
            cells = [cond, model]
            any_value = False
            for ds in datasets:
                for key in score_keys:
                    value = means.get((cond, model, ds, key))
                    any_value = any_value or value is not None
                    cells.append(fmt(value))
            if any_value:
                rows.append(cells)
    return header, rows, skipped


def _attention_table(rows):
    datasets = sorted({r["dataset"] for r in rows})
    header = ["mechanism", "model"]
    for ds in datasets:
        header.extend(f"{ds}_{label}" for _, label in ATTENTION_COLUMNS)
    by_key = {(r["mechanism"], r["model_id"], r["dataset"]): r for r in rows}
    out = []
    for mech in MECHANISM_ORDER:
        for model in sorted({r["model_id"] for r in rows}):
            cells = [MECHANISM_LABELS[mech], model]
            any_value = False
            for ds in datasets:
                r = by_key.get((mech, model, ds))
                for field, _ in ATTENTION_COLUMNS:
                    cells.append(fmt(r[field]) if r else "")
                any_value = any_value or r is not None
            if any_value:
                out.append(cells)
    return header, out


def _domain_table(rows):
    header = ["model", "natural", "financial", "gap"]
    out = [
        [r["model_id"], fmt(r["natural"]), fmt(r["financial"]), fmt(r["gap"])]
        for r in sorted(rows, key=lambda r: r["model_id"])
    ]
    return header, out


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_markdown(path: Path, header, rows, footer_lines):
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    lines.extend("| " + " | ".join(str(c) for c in row) + " |" for row in rows)
    if footer_lines:
        lines.append("")
        lines.extend(footer_lines)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_report(records, layout: str, out_dir: str | Path, rows=None) -> dict[str, Path]:
    """Write <layout>.csv and <layout>.md under out_dir; returns the paths.

    `records` feeds the sensitivity / mitigation layouts; precomputed `rows`
    (dicts) feed the attention / domain layouts.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    footer = []
    if layout == "sensitivity":
        if not records:
            raise EmptyInput("no records for sensitivity layout")
        header, table, skipped = _block_table(records, MECHANISM_ORDER, MECHANISM_LABELS)
        degenerate = sum(1 for r in records if r.degenerate_flags)
        footer = [f"skipped entries: {skipped}", f"records with degenerate patches: {degenerate}"]
    elif layout == "mitigation":
        if not records:
            raise EmptyInput("no records for mitigation layout")
        header, table, skipped = _block_table(records, MITIGATION_ORDER, MITIGATION_LABELS)
        footer = [f"skipped entries: {skipped}"]
    elif layout == "attention":
        if not rows:
            raise EmptyInput("no rows for attention layout")
        header, table = _attention_table(rows)
    elif layout == "domain":
        if not rows:
            raise EmptyInput("no rows for domain layout")
        header, table = _domain_table(rows)
    else:
        raise ValueError(f"unknown layout {layout!r}")
    if not table:
        raise EmptyInput(f"nothing to report for layout {layout!r}")
    csv_path = out_dir / f"{layout}.csv"
    md_path = out_dir / f"{layout}.md"
    _write_csv(csv_path, header, table)
    _write_markdown(md_path, header, table, footer)
    return {"csv": csv_path, "markdown": md_path}
