"""Dataset ingestion and generation.

Tabular CSVs load with a header row and the class label in the last column
(overridable); labels re-encode to 0..C-1 by first appearance. Location
instances round-trip through a small JSON schema, accepting either planar
meters or lat/lon (converted by a local equirectangular projection about the
center). A seeded generator produces instances with prescribed facility
counts placed uniformly in the disk.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import TabularDataset
from .core import RandomStream
from .problems import FACILITY_TYPES, LocationInstance

__all__ = [
    "TabularLoadError",
    "LocationSchemaError",
    "LocationDatasetSpec",
    "SplitResult",
    "load_tabular_csv",
    "train_test_split",
    "generate_location_dataset",
    "save_location_json",
    "load_location_json",
]

EARTH_RADIUS_M = 6371000.0


class TabularLoadError(ValueError):
    """A CSV violated the tabular schema (ragged row, bad value, one class)."""


class LocationSchemaError(ValueError):
    """A location JSON document violated the instance schema."""


@dataclass(frozen=True)
class LocationDatasetSpec:
    """Recipe for a generated location instance: counts per facility type."""

    name: str
    counts: tuple[int, int, int, int]
    radius: float = 3000.0
    seed: int = 0

    def __post_init__(self):
        if len(self.counts) != len(FACILITY_TYPES):
            raise ValueError("counts must give one value per facility type")
        if any(c < 1 for c in self.counts):
            raise ValueError("every facility type needs at least one point")


@dataclass(frozen=True)
class SplitResult:
    train: TabularDataset
    test: TabularDataset
    test_fraction: float
    seed: int


def load_tabular_csv(path, label_column: int = -1) -> TabularDataset:
    """Load a CSV with a header row into a TabularDataset.

    The label column (default: last) may hold arbitrary strings; they encode
    to 0..C-1 in order of first appearance. Every other column must parse as
    a float; offending rows are reported by their 1-based file line number.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TabularLoadError(f"{path}: empty file, expected a header row") from None
        width = len(header)
        if width < 2:
            raise TabularLoadError(f"{path}: need at least one feature column and one label column")
        label_idx = label_column % width
        feature_idx = [i for i in range(width) if i != label_idx]
        rows: list[list[float]] = []
        raw_labels: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise TabularLoadError(f"{path}: row {lineno} has {len(row)} cells, expected {width}")
            try:
                rows.append([float(row[i]) for i in feature_idx])
            except ValueError:
                raise TabularLoadError(f"{path}: row {lineno} has a non-numeric feature value") from None
            raw_labels.append(row[label_idx])
    if len(rows) < 2:
        raise TabularLoadError(f"{path}: need at least two data rows")
    encoding: dict[str, int] = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, lab in enumerate(raw_labels):
        labels[i] = encoding.setdefault(lab, len(encoding))
    if len(encoding) < 2:
        raise TabularLoadError(f"{path}: found a single class, need at least two")
    return TabularDataset(np.asarray(rows, dtype=float), labels, len(encoding))


def train_test_split(ds: TabularDataset, test_fraction: float = 0.30, seed: int = 0) -> SplitResult:
    """Seeded shuffle split; the first round(test_fraction * n) rows go to test."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    n = ds.n_samples
    if n < 4:
        raise ValueError("need at least 4 samples to split")
    n_test = int(round(test_fraction * n))
    n_test = min(max(n_test, 1), n - 1)
    perm = RandomStream(seed).rng.permutation(n)
    test_ix = np.sort(perm[:n_test])
    train_ix = np.sort(perm[n_test:])
    return SplitResult(
        train=TabularDataset(ds.samples[train_ix], ds.labels[train_ix], ds.class_count),
        test=TabularDataset(ds.samples[test_ix], ds.labels[test_ix], ds.class_count),
        test_fraction=test_fraction,
        seed=seed,
    )


def generate_location_dataset(spec: LocationDatasetSpec) -> LocationInstance:
    """Place the prescribed facility counts uniformly in the disk
    (rejection sampling in the bounding square), deterministically per seed."""
    rng = RandomStream(spec.seed).rng
    r = spec.radius
    facilities = {}
    for ftype, count in zip(FACILITY_TYPES, spec.counts):
        pts = np.empty((count, 2))
        placed = 0
        while placed < count:
            p = rng.uniform(-r, r, size=2)
            if p[0] * p[0] + p[1] * p[1] <= r * r:
                pts[placed] = p
                placed += 1
        facilities[ftype] = pts
    return LocationInstance(spec.name, np.zeros(2), r, facilities)


def save_location_json(inst: LocationInstance, path) -> None:
    entries = []
    for ftype in FACILITY_TYPES:
        for x, y in inst.facilities[ftype]:
            entries.append({"type": ftype, "x": x, "y": y})
    doc = {
        "name": inst.name,
        "center": {"x": float(inst.center[0]), "y": float(inst.center[1])},
        "radius_m": inst.radius,
        "facilities": entries,
    }
    Path(path).write_text(json.dumps(doc))


def _project_point(entry: dict, center: dict, what: str):
    """Planar meters from an {x, y} or {lat, lon} mapping; lat/lon projects
    equirectangularly about the center's latitude."""
    if "x" in entry and "y" in entry:
        return float(entry["x"]), float(entry["y"])
    if "lat" in entry and "lon" in entry:
        if "lat" not in center or "lon" not in center:
            raise LocationSchemaError(f"{what}: lat/lon coordinates require a lat/lon center")
        lat0 = math.radians(float(center["lat"]))
        x = EARTH_RADIUS_M * math.radians(float(entry["lon"]) - float(center["lon"])) * math.cos(lat0)
        y = EARTH_RADIUS_M * math.radians(float(entry["lat"]) - float(center["lat"]))
        return x, y
    raise LocationSchemaError(f"{what}: expected x/y or lat/lon keys, got {sorted(entry)}")


def load_location_json(path) -> LocationInstance:
    path = Path(path)
    doc = json.loads(path.read_text())
    try:
        name = doc["name"]
        center_doc = doc["center"]
        radius = float(doc["radius_m"])
        entries = doc["facilities"]
    except KeyError as missing:
        raise LocationSchemaError(f"{path}: missing required key {missing}") from None
    if "lat" in center_doc:
        center = np.zeros(2)  # planar origin sits at the central place
    else:
        center = np.array([float(center_doc["x"]), float(center_doc["y"])])
    grouped: dict[str, list] = {t: [] for t in FACILITY_TYPES}
    for i, entry in enumerate(entries):
        ftype = entry.get("type")
        if ftype not in grouped:
            raise LocationSchemaError(f"{path}: facilities[{i}] has unknown type {ftype!r}")
        x, y = _project_point(entry, center_doc, f"{path}: facilities[{i}]")
        grouped[ftype].append((x, y))
    for ftype, pts in grouped.items():
        if not pts:
            raise LocationSchemaError(f"{path}: no facilities of type {ftype!r}")
    facilities = {t: np.asarray(pts, dtype=float) for t, pts in grouped.items()}
    try:
        return LocationInstance(name, center, radius, facilities)
    except ValueError as bad:
        raise LocationSchemaError(f"{path}: {bad}") from None
