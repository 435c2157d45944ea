"""Benchmark orchestration: manifest ingestion, parallel pair scoring,
deterministic aggregation into the report tables.

Output bytes depend only on the config and inputs, never on the
parallelism degree: workers are pure, results are sorted before emission.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import mitigation, report, similarity
from .errors import EmptyInput, InvalidInputError, IoFailure, PatchProbeError
from .store import PatchEmbeddingSet, load_embeddings
from .synth import generate_synthetic_pair

PAIR_CONDITIONS = ("micro", "macro", "text_occlusion")
ENV_THREADS = "PATCHPROBE_THREADS"


@dataclass(frozen=True)
class DocumentPair:
    pair_id: str
    original: PatchEmbeddingSet
    counterfactual: PatchEmbeddingSet
    condition: str
    dataset: str = "other"
    model_id: str = ""


@dataclass
class ScoreRecord:
    pair_id: str
    condition: str
    dataset: str
    model_id: str
    scores: dict[str, float] = field(default_factory=dict)
    skipped: dict[str, str] = field(default_factory=dict)
    degenerate_flags: list[str] = field(default_factory=list)
    argmin_patch: int | None = None

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "condition": self.condition,
            "dataset": self.dataset,
            "model_id": self.model_id,
            "scores": self.scores,
            "skipped": self.skipped,
            "degenerate_flags": self.degenerate_flags,
            "argmin_patch": self.argmin_patch,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreRecord":
        return cls(
            pair_id=d["pair_id"],
            condition=d["condition"],
            dataset=d["dataset"],
            model_id=d["model_id"],
            scores=dict(d.get("scores", {})),
            skipped=dict(d.get("skipped", {})),
            degenerate_flags=list(d.get("degenerate_flags", [])),
            argmin_patch=d.get("argmin_patch"),
        )


@dataclass
class SyntheticSpec:
    condition: str
    n: int
    d: int
    change_count: int
    change_angle: float
    pairs: int = 1
    jitter: float = 0.0


@dataclass
class BenchConfig:
    out_dir: str
    pair_manifests: list[str] = field(default_factory=list)
    mechanisms: tuple[str, ...] = similarity.MECHANISMS
    mitigations: tuple[str, ...] = mitigation.STRATEGIES
    k: int = mitigation.DEFAULT_TOPK
    parallelism: int = 1
    seed: int = 0
    maxsim_direction: str = "a_to_b"
    synthetic: list[SyntheticSpec] = field(default_factory=list)

    def __post_init__(self):
        if self.parallelism < 1:
            raise InvalidInputError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.k < 0:
            raise InvalidInputError(f"k must be >= 0, got {self.k}")


def load_bench_config(path: str | Path) -> BenchConfig:
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except OSError as exc:
        raise IoFailure(f"reading config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid TOML: {exc}") from exc
    synthetic = [SyntheticSpec(**block) for block in raw.pop("synthetic", [])]
    try:
        cfg = BenchConfig(
            out_dir=raw["out_dir"],
            pair_manifests=list(raw.get("pair_manifests", [])),
            mechanisms=tuple(raw.get("mechanisms", similarity.MECHANISMS)),
            mitigations=tuple(raw.get("mitigations", mitigation.STRATEGIES)),
            k=int(raw.get("k", mitigation.DEFAULT_TOPK)),
            parallelism=int(raw.get("parallelism", 1)),
            seed=int(raw.get("seed", 0)),
            maxsim_direction=raw.get("maxsim_direction", "a_to_b"),
            synthetic=synthetic,
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"{path}: bad config: {exc}") from exc
    return cfg


def effective_parallelism(config: BenchConfig) -> int:
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise InvalidInputError(f"{ENV_THREADS}={env!r} is not an integer") from exc
        if value < 1:
            raise InvalidInputError(f"{ENV_THREADS} must be >= 1, got {value}")
        return value
    return config.parallelism


def load_pair_manifest(path: str | Path) -> list[DocumentPair]:
    """JSON Lines: {pair_id, original_path, counterfactual_path, condition, dataset, model_id}."""
    pairs = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoFailure(f"reading pair manifest {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        try:
            original = load_embeddings(d["original_path"])
            counterfactual = load_embeddings(d["counterfactual_path"])
            condition = d["condition"]
        except KeyError as exc:
            raise InvalidInputError(f"{path}:{lineno}: missing field {exc}") from exc
        if condition not in PAIR_CONDITIONS:
            raise InvalidInputError(f"{path}:{lineno}: unknown condition {condition!r}")
        if original.model_id != counterfactual.model_id or original.dim != counterfactual.dim:
            raise InvalidInputError(
                f"{path}:{lineno}: incompatible embedding sets "
                f"({original.model_id}/{original.dim} vs "
                f"{counterfactual.model_id}/{counterfactual.dim})"
            )
        pairs.append(
            DocumentPair(
                pair_id=d.get("pair_id", f"pair-{lineno}"),
                original=original,
                counterfactual=counterfactual,
                condition=condition,
                dataset=d.get("dataset", original.dataset),
                model_id=d.get("model_id", original.model_id),
            )
        )
    return pairs


def synthetic_pairs(specs: list[SyntheticSpec], seed: int) -> list[DocumentPair]:
    pairs = []
    for spec in specs:
        for i in range(spec.pairs):
            doc_id = f"synth-{spec.condition}-{i:03d}"
            original, counterfactual = generate_synthetic_pair(
                n=spec.n,
                d=spec.d,
                change_count=spec.change_count,
                change_angle=spec.change_angle,
                seed=seed + i,
                jitter=spec.jitter,
                doc_id=doc_id,
            )
            pairs.append(
                DocumentPair(
                    pair_id=doc_id,
                    original=original,
                    counterfactual=counterfactual,
                    condition=spec.condition,
                    dataset="synthetic",
                    model_id="synthetic",
                )
            )
    return pairs


def score_pair(
    pair: DocumentPair,
    mechanisms: tuple[str, ...] = similarity.MECHANISMS,
    mitigations: tuple[str, ...] = (),
    k: int = mitigation.DEFAULT_TOPK,
    maxsim_direction: str = "a_to_b",
) -> ScoreRecord:
    """Score one pair under all requested mechanisms and mitigation strategies."""
    record = ScoreRecord(
        pair_id=pair.pair_id,
        condition=pair.condition,
        dataset=pair.dataset,
        model_id=pair.model_id,
    )
    entries = similarity.score_all(
        pair.original, pair.counterfactual, mechanisms, maxsim_direction=maxsim_direction
    )
    for name, entry in entries.items():
        if isinstance(entry, similarity.SkippedScore):
            record.skipped[name] = entry.reason
            continue
        record.scores[name] = entry.value
        if entry.degenerate:
            record.degenerate_flags.append(name)
        if entry.argmin_patch is not None:
            record.argmin_patch = entry.argmin_patch
    for strat in mitigations:
        try:
            record.scores[strat] = mitigation.score_mitigations(
                pair.original, pair.counterfactual, (strat,), k
            )[strat]
        except PatchProbeError as exc:
            record.skipped[strat] = f"{type(exc).__name__}: {exc}"
    return record


def _score_pairs_parallel(pairs, config: BenchConfig, workers: int) -> tuple[list[ScoreRecord], list[str]]:
    failures: list[str] = []

    def work(pair):
        return score_pair(
            pair, config.mechanisms, config.mitigations, config.k, config.maxsim_direction
        )

    records = []
    if workers == 1:
        for pair in pairs:
            try:
                records.append(work(pair))
            except PatchProbeError as exc:
                failures.append(f"{pair.pair_id}: {exc}")
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(pair, pool.submit(work, pair)) for pair in pairs]
            for pair, fut in futures:
                try:
                    records.append(fut.result())
                except PatchProbeError as exc:
                    failures.append(f"{pair.pair_id}: {exc}")
    records.sort(key=lambda r: (r.model_id, r.dataset, r.condition, r.pair_id))
    failures.sort()
    return records, failures


def write_records(records: list[ScoreRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")


def read_records(path: str | Path) -> list[ScoreRecord]:
    records = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoFailure(f"reading records {path}: {exc}") from exc
    for line in lines:
        if line.strip():
            records.append(ScoreRecord.from_dict(json.loads(line)))
    return records


@dataclass
class BenchResult:
    records: list[ScoreRecord]
    failures: list[str]
    outputs: dict[str, Path]


def run_bench(config: BenchConfig) -> BenchResult:
    """Score every pair, persist per-pair records, emit aggregate tables."""
    pairs = []
    for manifest in config.pair_manifests:
        pairs.extend(load_pair_manifest(manifest))
    pairs.extend(synthetic_pairs(config.synthetic, config.seed))
    if not pairs:
        raise EmptyInput("bench config yields no pairs")

    workers = effective_parallelism(config)
    records, failures = _score_pairs_parallel(pairs, config, workers)

    scored_conditions = {r.condition for r in records}
    for cond in {p.condition for p in pairs}:
        if cond not in scored_conditions:
            raise InvalidInputError(f"every pair in condition {cond!r} failed")

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: dict[str, Path] = {}

    records_path = out_dir / "records.jsonl"
    write_records(records, records_path)
    outputs["records"] = records_path

    paths = report.emit_report(records, "sensitivity", out_dir)
    outputs["sensitivity_csv"] = paths["csv"]
    outputs["sensitivity_md"] = paths["markdown"]
    if config.mitigations:
        paths = report.emit_report(records, "mitigation", out_dir)
        outputs["mitigation_csv"] = paths["csv"]
        outputs["mitigation_md"] = paths["markdown"]

    if failures:
        failures_path = out_dir / "failures.txt"
        failures_path.write_text("\n".join(failures) + "\n", encoding="utf-8")
        outputs["failures"] = failures_path
    return BenchResult(records=records, failures=failures, outputs=outputs)


def compare_domains(pair_nat: DocumentPair, pair_fin: DocumentPair) -> dict:
    """Mean-pool similarity of a natural-image pair vs a financial-document
    pair, and their difference (the domain gap, financial minus natural)."""
    nat = similarity.mean_pool_score(pair_nat.original, pair_nat.counterfactual).value
    fin = similarity.mean_pool_score(pair_fin.original, pair_fin.counterfactual).value
    return {
        "model_id": pair_fin.model_id or pair_nat.model_id,
        "natural": nat,
        "financial": fin,
        "gap": fin - nat,
    }
