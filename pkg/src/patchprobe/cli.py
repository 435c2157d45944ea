"""Command-line surface.

Exit codes: 0 success, 1 invalid input, 2 partial failures recorded,
3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import attention as attention_mod
from . import harness, mitigation, perturb, report, similarity
from .errors import InvalidInputError, PatchProbeError
from .store import save_embeddings
from .synth import generate_synthetic_pair

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARTIAL = 2
EXIT_INTERNAL = 3

_MECH_ALIASES = {
    "mean": "mean_pool",
    "max": "max_pool",
    "maxsim": "maxsim",
    "meanpatch": "meanpatch",
    "minpatch": "minpatch",
    "mean_pool": "mean_pool",
    "max_pool": "max_pool",
}


def _parse_mechanisms(spec: str) -> tuple[str, ...]:
    mechs = []
    for token in spec.split(","):
        token = token.strip().lower()
        if token not in _MECH_ALIASES:
            raise InvalidInputError(f"unknown mechanism {token!r}")
        mechs.append(_MECH_ALIASES[token])
    return tuple(mechs)


def _parse_strategies(spec: str) -> tuple[str, ...]:
    strats = []
    for token in spec.split(","):
        token = token.strip().lower()
        if token not in mitigation.STRATEGIES:
            raise InvalidInputError(f"unknown strategy {token!r}")
        strats.append(token)
    return tuple(strats)


def _cmd_perturb(args) -> int:
    manifests = perturb.load_manifests(args.manifest)
    out_dir = Path(args.out_dir)
    status = EXIT_OK
    for m in manifests:
        out_path = Path(m.output_image)
        if not out_path.is_absolute():
            m = perturb.EditManifest(
                source_image=m.source_image,
                edits=m.edits,
                output_image=str(out_dir / out_path),
                condition=m.condition,
            )
        try:
            rep = perturb.run_manifest(m)
        except PatchProbeError as exc:
            print(f"FAIL {m.output_image}: {exc}", file=sys.stderr)
            status = EXIT_PARTIAL
            continue
        print(
            f"OK {rep.output_image}: {rep.edits_applied} edits, "
            f"{rep.total_pixels_changed} pixels changed"
        )
    return status


def _cmd_score(args) -> int:
    pairs = harness.load_pair_manifest(args.pairs)
    mechanisms = _parse_mechanisms(args.mechanisms)
    records = [
        harness.score_pair(p, mechanisms, (), maxsim_direction=args.direction)
        for p in pairs
    ]
    records.sort(key=lambda r: (r.model_id, r.dataset, r.condition, r.pair_id))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    harness.write_records(records, out_dir / "records.jsonl")
    report.emit_report(records, "sensitivity", out_dir)
    if any(r.skipped for r in records):
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_mitigate(args) -> int:
    pairs = harness.load_pair_manifest(args.pairs)
    strategies = _parse_strategies(args.strategies)
    records = [harness.score_pair(p, (), strategies, k=args.k) for p in pairs]
    records.sort(key=lambda r: (r.model_id, r.dataset, r.condition, r.pair_id))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    harness.write_records(records, out_dir / "records.jsonl")
    report.emit_report(records, "mitigation", out_dir)
    if any(r.skipped for r in records):
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_attention(args) -> int:
    triplets = attention_mod.load_triplet_manifest(args.triplets)
    if not triplets:
        raise InvalidInputError(f"{args.triplets}: no triplets")
    gaps = []
    skipped = 0
    for t in triplets:
        for mech in similarity.MECHANISMS:
            try:
                gaps.append(attention_mod.attention_gap(t, mech))
            except PatchProbeError:
                skipped += 1
    rows = attention_mod.summarize_gaps(gaps)
    report.emit_report(None, "attention", args.out, rows=rows)
    return EXIT_PARTIAL if skipped else EXIT_OK


def _cmd_bench(args) -> int:
    config = harness.load_bench_config(args.config)
    result = harness.run_bench(config)
    for name, path in sorted(result.outputs.items()):
        print(f"{name}: {path}")
    return EXIT_PARTIAL if result.failures else EXIT_OK


def _cmd_synth(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    original, counterfactual = generate_synthetic_pair(
        n=args.n,
        d=args.d,
        change_count=args.changes,
        change_angle=args.angle,
        seed=args.seed,
        jitter=args.jitter,
    )
    orig_path = out_dir / "original.npy"
    cf_path = out_dir / "counterfactual.npy"
    save_embeddings(original, orig_path)
    save_embeddings(counterfactual, cf_path)
    manifest_path = out_dir / "pairs.jsonl"
    import json

    manifest_path.write_text(
        json.dumps(
            {
                "pair_id": "synth-000",
                "original_path": str(orig_path),
                "counterfactual_path": str(cf_path),
                "condition": "micro",
                "dataset": "other",
                "model_id": "synthetic",
            }
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {orig_path}, {cf_path}, {manifest_path}")
    return EXIT_OK


def _cmd_report(args) -> int:
    records_dir = Path(args.records)
    records = harness.read_records(records_dir / "records.jsonl")
    if args.layout in ("sensitivity", "mitigation"):
        report.emit_report(records, args.layout, records_dir)
    else:
        raise InvalidInputError(
            f"layout {args.layout!r} needs its dedicated subcommand output"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchprobe",
        description="Diagnostics for information loss in single-vector "
        "aggregation of visual patch embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("perturb", help="apply edit manifests to document images")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("score", help="score embedding pairs under the five mechanisms")
    p.add_argument("--pairs", required=True)
    p.add_argument("--mechanisms", default="mean,max,maxsim,meanpatch,minpatch")
    p.add_argument("--direction", default="a_to_b", choices=["a_to_b", "symmetric"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("mitigate", help="score embedding pairs under mitigation strategies")
    p.add_argument("--pairs", required=True)
    p.add_argument("--strategies", default="varwgt,attngd,topkr")
    p.add_argument("--k", type=int, default=mitigation.DEFAULT_TOPK)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mitigate)

    p = sub.add_parser("attention", help="layout-vs-data bias from image triplets")
    p.add_argument("--triplets", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_attention)

    p = sub.add_parser("bench", help="run the full benchmark from a TOML config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("synth", help="generate a synthetic collapse-family pair")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--d", type=int, default=256)
    p.add_argument("--changes", type=int, default=1)
    p.add_argument("--angle", type=float, default=1.5707963267948966)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("report", help="re-emit tables from persisted records")
    p.add_argument("--records", required=True)
    p.add_argument("--layout", required=True, choices=list(report.LAYOUTS))
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PatchProbeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
