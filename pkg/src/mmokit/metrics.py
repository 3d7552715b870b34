"""Quality indicators and reference sets.

Indicators: 2-D hypervolume (reference point (1, 1)) and its reciprocal,
inverted generational distance in either space (IGDX over decisions, IGD over
objectives, same formula), and the equivalent-feature-subset count.

Reference sets pair decision-space points with their floating-point objective
values. For location problems they come from a dense lattice scan whose
non-domination is decided on the integer interval objectives, while the stored
objective vectors keep the raw distances; IGD distances are normalized by the
reference set's own coordinate ranges.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Population, non_dominated_mask
from .problems import LocationInstance, _nearest_distances, decode_feature_mask, distance_to_interval_value, evaluate_synthetic

__all__ = [
    "ReferenceSet",
    "MetricReport",
    "hypervolume_2d",
    "inv_hv",
    "inverted_generational_distance",
    "equivalent_subset_count",
    "build_location_reference",
    "build_synthetic_reference",
    "save_reference_json",
    "load_reference_json",
]


@dataclass(frozen=True)
class ReferenceSet:
    """Ground-truth sample of a Pareto set (s_dec) and front (s_obj)."""

    s_dec: np.ndarray
    s_obj: np.ndarray
    dataset: str = ""
    grid_n: int | None = None

    def __post_init__(self):
        s_dec = np.atleast_2d(np.asarray(self.s_dec, dtype=float))
        s_obj = np.atleast_2d(np.asarray(self.s_obj, dtype=float))
        if len(s_dec) == 0 or len(s_dec) != len(s_obj):
            raise ValueError("reference set must pair each decision point with an objective vector")
        if not (np.all(np.isfinite(s_dec)) and np.all(np.isfinite(s_obj))):
            raise ValueError("reference points must be finite")
        s_dec.flags.writeable = False
        s_obj.flags.writeable = False
        object.__setattr__(self, "s_dec", s_dec)
        object.__setattr__(self, "s_obj", s_obj)

    def __len__(self) -> int:
        return len(self.s_dec)

    @property
    def dec_ranges(self) -> np.ndarray:
        return self.s_dec.max(axis=0) - self.s_dec.min(axis=0)

    @property
    def obj_ranges(self) -> np.ndarray:
        return self.s_obj.max(axis=0) - self.s_obj.min(axis=0)


@dataclass
class MetricReport:
    """Per-run indicator values; fields irrelevant to a problem kind stay None."""

    inv_hv: float | None = None
    igdx: float | None = None
    igd: float | None = None
    equivalent_count: int | None = None

    def __post_init__(self):
        if self.inv_hv is not None and not self.inv_hv > 0:
            raise ValueError("inv_hv must be positive (possibly inf)")
        for name in ("igdx", "igd"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.equivalent_count is not None and (self.equivalent_count < 0 or self.equivalent_count != int(self.equivalent_count)):
            raise ValueError("equivalent_count must be a nonnegative integer")

    def to_dict(self) -> dict:
        out = {}
        for name in ("inv_hv", "igdx", "igd", "equivalent_count"):
            v = getattr(self, name)
            if v is None:
                continue
            out[name] = "inf" if v == float("inf") else v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        kw = {}
        for name in ("inv_hv", "igdx", "igd", "equivalent_count"):
            if name in d:
                v = d[name]
                kw[name] = float("inf") if v == "inf" else v
        return cls(**kw)


def hypervolume_2d(points, ref=(1.0, 1.0)) -> float:
    """Area dominated by a 2-D point set relative to ref, by sort-and-sweep.

    Points not componentwise <= ref contribute nothing; dominated points and
    duplicates fall out of the sweep naturally.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.asarray(ref, dtype=float)
    if pts.size == 0:
        return 0.0
    if pts.shape[1] != 2 or ref.shape != (2,):
        raise ValueError("hypervolume_2d handles exactly two objectives")
    pts = pts[np.all(pts <= ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    area = 0.0
    best_f2 = ref[1]
    for f1, f2 in pts:
        if f2 < best_f2:
            area += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return float(area)


def inv_hv(points, ref=(1.0, 1.0)) -> float:
    """Reciprocal hypervolume; zero area maps to the +inf sentinel."""
    hv = hypervolume_2d(points, ref)
    return float("inf") if hv <= 0.0 else 1.0 / hv


def inverted_generational_distance(solutions, reference) -> float:
    """Mean over reference points of the distance to the nearest solution.

    Both sets are normalized per coordinate by the reference set's ranges
    (a degenerate range leaves that coordinate unscaled). Served in decision
    space this is IGDX, in objective space IGD.
    """
    S = np.atleast_2d(np.asarray(solutions, dtype=float))
    R = np.atleast_2d(np.asarray(reference, dtype=float))
    if S.size == 0 or R.size == 0:
        raise ValueError("both point sets must be non-empty")
    if S.shape[1] != R.shape[1]:
        raise ValueError("solution and reference dimensionality differ")
    lo = R.min(axis=0)
    ranges = R.max(axis=0) - lo
    ranges = np.where(ranges > 0, ranges, 1.0)
    Sn = (S - lo) / ranges
    Rn = (R - lo) / ranges
    # differences formed directly (not via the a^2+b^2-2ab expansion), so
    # near-zero distances keep full precision
    total = 0.0
    chunk = max(1, (1 << 21) // max(1, len(Sn)))
    for start in range(0, len(Rn), chunk):
        block = Rn[start : start + chunk]
        d2 = ((block[:, None, :] - Sn[None, :, :]) ** 2).sum(axis=2)
        total += np.sqrt(d2.min(axis=1)).sum()
    return total / len(Rn)


def equivalent_subset_count(archive: Population) -> int:
    """Number of extra feature subsets per identical-objective group.

    Decision vectors decode to masks; exact-duplicate masks collapse first,
    then distinct masks group by objective vector (f1 within 1e-12, f2 exact)
    and each group of size k contributes k - 1.
    """
    if len(archive) == 0:
        return 0
    masks = decode_feature_mask(archive.decisions())
    F = archive.objectives()
    _, first = np.unique(masks, axis=0, return_index=True)
    groups: dict[tuple, int] = {}
    for i in first:
        key = (int(round(F[i, 0] * 1e12)), float(F[i, 1]))
        groups[key] = groups.get(key, 0) + 1
    return sum(size - 1 for size in groups.values())


def build_location_reference(inst: LocationInstance, grid_n: int = 300) -> ReferenceSet:
    """Reference set from a grid_n x grid_n lattice over the bounding square.

    Lattice points outside the disk are dropped; non-domination is decided on
    the integer interval objectives while s_obj keeps the floating-point
    distances. No evaluation budget is involved.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    axis = np.linspace(-inst.radius, inst.radius, grid_n)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    pts = inst.center + np.column_stack([gx.ravel(), gy.ravel()])
    inside = np.linalg.norm(pts - inst.center, axis=1) <= inst.radius
    pts = pts[inside]
    aux = _nearest_distances(inst, pts)
    ints = distance_to_interval_value(aux, inst.interval_width, inst.interval_count)
    nd = non_dominated_mask(ints.astype(float))
    return ReferenceSet(pts[nd], aux[nd], dataset=inst.name, grid_n=grid_n)


def build_synthetic_reference(n: int = 1001) -> ReferenceSet:
    """Analytic Pareto-set sample of the two-branch synthetic problem.

    Both optimal strips lie at x2 = 0.5, so an even x1 sweep over [0, 2]
    covers the two branches; objective vectors repeat across branches by
    construction.
    """
    if n < 3:
        raise ValueError("need at least 3 sample points")
    x1 = np.linspace(0.0, 2.0, n)
    s_dec = np.column_stack([x1, np.full(n, 0.5)])
    s_obj = np.array([evaluate_synthetic(row) for row in s_dec])
    return ReferenceSet(s_dec, s_obj, dataset="synthetic")


def save_reference_json(ref: ReferenceSet, path) -> None:
    doc = {
        "dataset": ref.dataset,
        "grid_n": ref.grid_n,
        "s_dec": ref.s_dec.tolist(),
        "s_obj": ref.s_obj.tolist(),
    }
    Path(path).write_text(json.dumps(doc))


def load_reference_json(path) -> ReferenceSet:
    doc = json.loads(Path(path).read_text())
    return ReferenceSet(
        np.asarray(doc["s_dec"], dtype=float),
        np.asarray(doc["s_obj"], dtype=float),
        dataset=doc.get("dataset", ""),
        grid_n=doc.get("grid_n"),
    )
