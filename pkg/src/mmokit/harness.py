"""Experiment orchestration and ranking tables.

A config names algorithms and datasets; every (algorithm, dataset, run) cell
executes independently under a child seed derived by stable hashing, so
results do not depend on scheduling or insertion order. Records persist one
JSON file per run and aggregate into dense-ranked tables whose cells read
"mean(rank)", with ranking applied to the displayed (rounded) means.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algorithms import AlgorithmConfig, get_algorithm
from .classifier import FoldPlan
from .core import Population, _stable_hash64
from .data import load_location_json, load_tabular_csv, train_test_split
from .metrics import (
    MetricReport,
    ReferenceSet,
    build_location_reference,
    build_synthetic_reference,
    equivalent_subset_count,
    inv_hv,
    inverted_generational_distance,
    load_reference_json,
)
from .problems import FeatureSelectionProblem, LocationSelectionProblem, TwoBranchSynthetic

__all__ = [
    "DatasetEntry",
    "ExperimentConfig",
    "RunRecord",
    "RankTable",
    "METRICS",
    "run_experiment",
    "save_record",
    "load_records",
    "rank_dense",
    "round_sig",
    "average_ranking",
    "aggregate_rank_table",
    "render_table",
]

TEST_FRACTION = 0.30
CV_FOLDS = 5
KNN_K = 5
REFERENCE_GRID = 300


@dataclass(frozen=True)
class DatasetEntry:
    """One dataset reference in a config: its kind, name and file locations."""

    kind: str
    name: str
    path: str | None = None
    reference: str | None = None

    def __post_init__(self):
        if self.kind not in ("feature_selection", "location_selection", "synthetic", "synthetic_two_ps"):
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if self.kind in ("feature_selection", "location_selection") and not self.path:
            raise ValueError(f"dataset {self.name!r} needs a path")


@dataclass(frozen=True)
class ExperimentConfig:
    algorithms: tuple
    datasets: tuple
    runs: int = 21
    population_size: int = 200
    max_evaluations: int = 20000
    master_seed: int = 0

    def __post_init__(self):
        if not self.algorithms or not self.datasets:
            raise ValueError("need at least one algorithm and one dataset")
        if self.runs < 1:
            raise ValueError("runs must be positive")
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "datasets", tuple(self.datasets))
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ValueError("dataset names must be unique")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        datasets = []
        for entry in doc["datasets"]:
            name = entry.get("name") or (Path(entry["path"]).stem if entry.get("path") else entry["kind"])
            datasets.append(DatasetEntry(entry["kind"], name, entry.get("path"), entry.get("reference")))
        return cls(
            algorithms=tuple(doc["algorithms"]),
            datasets=tuple(datasets),
            runs=doc.get("runs", 21),
            population_size=doc.get("population_size", 200),
            max_evaluations=doc.get("max_evaluations", 20000),
            master_seed=doc.get("master_seed", 0),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class RunRecord:
    algorithm: str
    dataset: str
    run: int
    seed: int
    evaluations_used: int
    metrics: MetricReport
    archive: Population

    def to_dict(self) -> dict:
        rows = []
        for s in self.archive:
            entry = {"x": s.decision.tolist(), "f": s.objectives.tolist()}
            if s.aux is not None:
                entry["aux"] = s.aux.tolist()
            rows.append(entry)
        return {
            "algorithm": self.algorithm,
            "dataset": self.dataset,
            "run": self.run,
            "seed": self.seed,
            "evaluations_used": self.evaluations_used,
            "metrics": self.metrics.to_dict(),
            "archive": rows,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunRecord":
        from .core import Solution

        members = [
            Solution(np.asarray(e["x"], dtype=float), np.asarray(e["f"], dtype=float), np.asarray(e["aux"], dtype=float) if "aux" in e else None)
            for e in doc["archive"]
        ]
        return cls(
            algorithm=doc["algorithm"],
            dataset=doc["dataset"],
            run=doc["run"],
            seed=doc["seed"],
            evaluations_used=doc["evaluations_used"],
            metrics=MetricReport.from_dict(doc["metrics"]),
            archive=Population(members),
        )


@dataclass
class _ResolvedDataset:
    name: str
    kind: str
    problem: object
    reference: ReferenceSet | None


def _resolve_dataset(entry: DatasetEntry, master_seed: int) -> _ResolvedDataset:
    if entry.kind == "feature_selection":
        ds = load_tabular_csv(entry.path)
        split = train_test_split(ds, TEST_FRACTION, _stable_hash64(master_seed, "split", entry.name))
        plan = FoldPlan.build(split.train.n_samples, CV_FOLDS, _stable_hash64(master_seed, "folds", entry.name))
        return _ResolvedDataset(entry.name, entry.kind, FeatureSelectionProblem(split.train, plan, KNN_K, entry.name), None)
    if entry.kind == "location_selection":
        inst = load_location_json(entry.path)
        ref = load_reference_json(entry.reference) if entry.reference else build_location_reference(inst, REFERENCE_GRID)
        return _ResolvedDataset(entry.name, entry.kind, LocationSelectionProblem(inst, entry.name), ref)
    # synthetic
    return _ResolvedDataset(entry.name, "synthetic", TwoBranchSynthetic(entry.name), build_synthetic_reference())


def _compute_metrics(ds: _ResolvedDataset, archive: Population) -> MetricReport:
    if ds.kind == "feature_selection":
        return MetricReport(
            inv_hv=inv_hv(archive.objectives()),
            equivalent_count=equivalent_subset_count(archive),
        )
    if ds.kind == "location_selection":
        # objective-space distances use the floating-point aux values on
        # both sides, matching how the reference front is stored
        return MetricReport(
            igdx=inverted_generational_distance(archive.decisions(), ds.reference.s_dec),
            igd=inverted_generational_distance(archive.aux(), ds.reference.s_obj),
        )
    return MetricReport(
        igdx=inverted_generational_distance(archive.decisions(), ds.reference.s_dec),
        igd=inverted_generational_distance(archive.objectives(), ds.reference.s_obj),
    )


def record_filename(algorithm: str, dataset: str, run: int) -> str:
    return f"{dataset}__{algorithm}__run{run:03d}.json"


def save_record(record: RunRecord, directory) -> Path:
    """Write one record atomically (temp file + rename)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    final = directory / record_filename(record.algorithm, record.dataset, record.run)
    tmp = final.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(record.to_dict()))
    os.replace(tmp, final)
    return final


def load_records(directory) -> list[RunRecord]:
    directory = Path(directory)
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise ValueError(f"no record files found in {directory}")
    return [RunRecord.from_dict(json.loads(p.read_text())) for p in paths]


def run_experiment(config: ExperimentConfig, output_dir=None, workers: int = 1) -> list[RunRecord]:
    """Execute every (dataset, algorithm, run) cell and return its records.

    Child seeds depend only on (master_seed, algorithm, dataset, run index).
    Unknown algorithm names fail before any run starts; dataset resolution
    failures abort with the dataset named.
    """
    runners = {name: get_algorithm(name) for name in config.algorithms}
    resolved = []
    for entry in config.datasets:
        try:
            resolved.append(_resolve_dataset(entry, config.master_seed))
        except Exception as err:
            raise RuntimeError(f"failed to resolve dataset {entry.name!r}: {err}") from err
    acfg = AlgorithmConfig(population_size=config.population_size, max_evaluations=config.max_evaluations)
    tasks = [(ds, alg, idx) for ds in resolved for alg in config.algorithms for idx in range(config.runs)]

    def execute(task):
        ds, alg, idx = task
        seed = _stable_hash64(config.master_seed, alg, ds.name, idx)
        result = runners[alg](ds.problem, acfg, seed)
        record = RunRecord(
            algorithm=alg,
            dataset=ds.name,
            run=idx,
            seed=seed,
            evaluations_used=result.evaluations_used,
            metrics=_compute_metrics(ds, result.final_archive),
            archive=result.final_archive,
        )
        if output_dir is not None:
            save_record(record, output_dir)
        return record

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(execute, tasks))
    return [execute(t) for t in tasks]


# ------------------------------------------------------------------- ranking


def round_sig(x: float, sig: int) -> float:
    """Round to a number of significant digits; zero and infinities pass through."""
    if x == 0 or not math.isfinite(x):
        return x
    return round(x, sig - 1 - math.floor(math.log10(abs(x))))


def _round_value(x: float, rounding) -> float:
    kind, digits = rounding
    if kind == "dec":
        return round(x, digits) if math.isfinite(x) else x
    if kind == "sig":
        return round_sig(x, digits)
    raise ValueError(f"unknown rounding {rounding!r}")


@dataclass(frozen=True)
class MetricSpec:
    field: str
    direction: str
    rounding: tuple
    cell: object  # formatter for mean values


METRICS = {
    "inv_hv": MetricSpec("inv_hv", "minimize", ("dec", 2), lambda m: f"{m:.2f}"),
    "igdx": MetricSpec("igdx", "minimize", ("sig", 3), lambda m: f"{m:.2E}"),
    "igd": MetricSpec("igd", "minimize", ("sig", 3), lambda m: f"{m:.2E}"),
    "equiv_count": MetricSpec("equivalent_count", "maximize", ("dec", 0), lambda m: f"{m:.0f}"),
}


def rank_dense(values, direction: str = "minimize", rounding=("dec", 12)) -> list[int]:
    """Dense 1-based ranks of rounded values; ties share a rank and the next
    distinct value takes the following integer."""
    if len(values) == 0:
        raise ValueError("cannot rank an empty value list")
    if direction not in ("minimize", "maximize"):
        raise ValueError(f"unknown direction {direction!r}")
    rounded = [_round_value(float(v), rounding) for v in values]
    distinct = sorted(set(rounded), reverse=(direction == "maximize"))
    rank_of = {v: r for r, v in enumerate(distinct, start=1)}
    return [rank_of[v] for v in rounded]


def average_ranking(ranks: np.ndarray):
    """Column means of a per-dataset rank matrix plus their dense ranks."""
    ranks = np.asarray(ranks, dtype=float)
    avg = ranks.mean(axis=0)
    return avg, rank_dense(avg, "minimize", ("dec", 6))


@dataclass
class RankTable:
    metric: str
    algorithms: list[str]
    datasets: list[str]
    means: np.ndarray  # (n_datasets, n_algorithms)
    ranks: np.ndarray
    average: np.ndarray  # (n_algorithms,)
    average_ranks: list[int] = field(default_factory=list)


def aggregate_rank_table(records, metric: str, direction: str | None = None, rounding=None) -> RankTable:
    """Mean-over-runs table with per-dataset dense ranks and the average row.

    Rows and columns are sorted by name so re-aggregating persisted records
    reproduces the in-memory table exactly.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {sorted(METRICS)}")
    spec = METRICS[metric]
    direction = direction or spec.direction
    rounding = rounding or spec.rounding
    # datasets of another problem kind never carry this metric; they are
    # other tables' rows, so drop them here rather than erroring
    relevant = [r for r in records if getattr(r.metrics, spec.field) is not None]
    if not relevant:
        raise ValueError(f"no records carry metric {metric!r}")
    algorithms = sorted({r.algorithm for r in relevant})
    datasets = sorted({r.dataset for r in relevant})
    cells: dict[tuple, list[float]] = {}
    for r in relevant:
        cells.setdefault((r.dataset, r.algorithm), []).append(float(getattr(r.metrics, spec.field)))
    means = np.empty((len(datasets), len(algorithms)))
    for i, ds in enumerate(datasets):
        for j, alg in enumerate(algorithms):
            got = cells.get((ds, alg))
            if not got:
                raise ValueError(f"no records for dataset {ds!r} and algorithm {alg!r}")
            means[i, j] = float(np.mean(got))
    ranks = np.array([rank_dense(row, direction, rounding) for row in means], dtype=int)
    avg, avg_ranks = average_ranking(ranks)
    return RankTable(metric, algorithms, datasets, means, ranks, avg, avg_ranks)


def render_table(table: RankTable, format: str = "markdown") -> str:
    """Text table with "mean(rank)" cells; the best cell per row is flagged
    (bold in markdown, a trailing * in csv)."""
    spec = METRICS[table.metric]
    rows = []
    for i, ds in enumerate(table.datasets):
        cells = []
        for j in range(len(table.algorithms)):
            text = f"{spec.cell(table.means[i, j])}({table.ranks[i, j]})"
            cells.append((text, table.ranks[i, j] == 1))
        rows.append((ds, cells))
    avg_cells = [
        (f"{table.average[j]:.4g}({table.average_ranks[j]})", table.average_ranks[j] == 1)
        for j in range(len(table.algorithms))
    ]
    rows.append(("Average ranking", avg_cells))
    if format == "markdown":
        lines = ["| Dataset | " + " | ".join(table.algorithms) + " |"]
        lines.append("|" + " --- |" * (len(table.algorithms) + 1))
        for name, cells in rows:
            rendered = [f"**{t}**" if best else t for t, best in cells]
            lines.append(f"| {name} | " + " | ".join(rendered) + " |")
        return "\n".join(lines) + "\n"
    if format == "csv":
        lines = ["dataset," + ",".join(table.algorithms)]
        for name, cells in rows:
            rendered = [t + "*" if best else t for t, best in cells]
            lines.append(name + "," + ",".join(rendered))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}; expected 'markdown' or 'csv'")
