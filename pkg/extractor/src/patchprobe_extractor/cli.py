"""Command line entry: extract patch embeddings for a list of images.

    patchprobe-extract --model Qwen2.5-VL-7B --images images.txt \
        --variants variants.txt --out-dir out/ --device cpu

``images.txt`` holds one image path per line; ``variants.txt`` holds the
matching variant per line (reference / counterfactual / signal / noise).
Outputs are named ``<image stem>__<variant>.npy`` plus the JSON sidecar.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backends import BACKENDS
from .errors import ExtractorError
from .jobs import ExtractionJob, batch_extract
from .registry import REGISTRY

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARTIAL = 2


def _read_lines(path: Path) -> list[str]:
    return [line.strip() for line in path.read_text().splitlines() if line.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="patchprobe-extract", description=__doc__)
    p.add_argument("--model", required=True, choices=sorted(REGISTRY))
    p.add_argument("--images", required=True, type=Path,
                   help="file listing one image path per line")
    p.add_argument("--variants", required=True, type=Path,
                   help="file listing one variant per line, aligned with --images")
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--device", default="cpu")
    p.add_argument("--backend", default="transformers", choices=sorted(BACKENDS))
    p.add_argument("--dataset", default="other")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        images = _read_lines(args.images)
        variants = _read_lines(args.variants)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if len(images) != len(variants):
        print(
            f"error: {len(images)} images but {len(variants)} variants",
            file=sys.stderr,
        )
        return EXIT_INVALID

    try:
        jobs = [
            ExtractionJob(
                model_id=args.model,
                image_path=img,
                variant=var,
                output_path=str(args.out_dir / f"{Path(img).stem}__{var}.npy"),
                dataset=args.dataset,
            )
            for img, var in zip(images, variants)
        ]
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    summary = batch_extract(jobs, device=args.device, backend_name=args.backend)
    for result in summary.results:
        line = f"{result.status}: {result.job.output_path}"
        if result.error:
            line += f" ({result.error})"
        print(line)
    print(f"{summary.ok} ok, {summary.failed} failed")
    if summary.ok == 0 and summary.failed > 0:
        return EXIT_INVALID
    return EXIT_PARTIAL if summary.failed else EXIT_OK


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
