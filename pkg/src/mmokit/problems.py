"""Concrete multimodal multiobjective problems.

Three problem kinds share one evaluation interface:

* wrapper feature selection: minimize (cross-validated KNN error rate,
  selected-feature fraction) over a continuous [0, 1]^D mask encoding;
* location selection: minimize the four interval-coded distances from a
  planar point to the nearest facility of each type inside a 3 km disk;
* a synthetic two-branch problem whose two Pareto subsets map onto one
  front, used for sanity checks and calibration.

Evaluation counting is explicit: callers pass an EvaluationBudget and every
objective evaluation consumes one unit, whatever the outcome.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import CrossValKNN, FoldPlan, TabularDataset
from .core import Bounds, Solution

__all__ = [
    "BudgetExhausted",
    "EvaluationBudget",
    "ProblemSpec",
    "FACILITY_TYPES",
    "LocationInstance",
    "FeatureSelectionProblem",
    "LocationSelectionProblem",
    "TwoBranchSynthetic",
    "decode_feature_mask",
    "evaluate_feature_subset",
    "distance_to_interval_value",
    "evaluate_location",
    "repair_to_region",
    "evaluate_synthetic",
]

FACILITY_TYPES = ("primary_school", "middle_school", "shopping_center", "subway_station")


class BudgetExhausted(RuntimeError):
    """Raised when an evaluation would exceed the run's evaluation budget."""


class EvaluationBudget:
    """Counter of objective evaluations; a run owns exactly one and must stop
    when it is spent."""

    def __init__(self, max_evaluations: int):
        if max_evaluations < 1:
            raise ValueError("budget must allow at least one evaluation")
        self.max = int(max_evaluations)
        self.used = 0

    @property
    def remaining(self) -> int:
        return self.max - self.used

    def consume(self, n: int = 1) -> None:
        if self.used + n > self.max:
            raise BudgetExhausted(f"budget of {self.max} evaluations exhausted ({self.used} used, {n} requested)")
        self.used += n


@dataclass(frozen=True)
class ProblemSpec:
    """Shape descriptor of a problem: dimensions, objectives, bounds, kind."""

    D: int
    M: int
    bounds: Bounds
    kind: str

    def __post_init__(self):
        if self.bounds.dimension != self.D:
            raise ValueError("bounds dimension does not match D")
        if self.kind == "feature_selection":
            if self.M != 2 or not (np.all(self.bounds.lower == 0) and np.all(self.bounds.upper == 1)):
                raise ValueError("feature selection requires M=2 and [0,1]^D bounds")
        elif self.kind == "location_selection":
            if self.D != 2 or self.M != 4:
                raise ValueError("location selection requires D=2 and M=4")
        elif self.kind == "synthetic_two_ps":
            if self.D != 2 or self.M != 2:
                raise ValueError("the synthetic problem requires D=2 and M=2")
        else:
            raise ValueError(f"unknown problem kind {self.kind!r}")


class Problem:
    """Common evaluation interface; subclasses fill in the actual objectives."""

    kind: str
    name: str
    D: int
    M: int
    bounds: Bounds
    has_aux: bool = False

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(self.D, self.M, self.bounds, self.kind)

    def repair(self, x: np.ndarray) -> np.ndarray:
        """Map arbitrary points into the feasible region (default: clip to box)."""
        return self.bounds.clip(np.asarray(x, dtype=float))

    def evaluate_batch(self, X: np.ndarray, budget: EvaluationBudget | None = None):
        """Objectives (and aux values) for a batch of decision rows.

        Consumes one budget unit per row before computing; raises
        BudgetExhausted without evaluating if the batch does not fit.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if budget is not None:
            budget.consume(len(X))
        return self._evaluate_rows(X)

    def evaluate(self, x: np.ndarray, budget: EvaluationBudget | None = None) -> Solution:
        x = np.asarray(x, dtype=float)
        F, AUX = self.evaluate_batch(x[None, :], budget)
        return Solution(x, F[0], None if AUX is None else AUX[0])

    def _evaluate_rows(self, X: np.ndarray):
        raise NotImplementedError


def decode_feature_mask(x) -> np.ndarray:
    """Decode a continuous [0,1]^D vector to a feature mask: selected iff > 0.5."""
    return np.asarray(x, dtype=float) > 0.5


class FeatureSelectionProblem(Problem):
    """Wrapper feature selection over a continuous mask encoding.

    Objectives are (cross-validated KNN error rate, selected fraction), both
    minimized and both in [0, 1]. The all-unselected mask is kept in the search
    space with the pinned worst-error value (1.0, 0.0) rather than repaired.
    """

    kind = "feature_selection"

    def __init__(self, dataset: TabularDataset, plan: FoldPlan, k: int = 5, name: str = "feature_selection"):
        self.dataset = dataset
        self.name = name
        self.k = k
        self.plan = plan
        self.D = dataset.n_features
        self.M = 2
        self.bounds = Bounds(np.zeros(self.D), np.ones(self.D))
        self._cv = CrossValKNN(dataset, k, plan)
        self._cache: dict[bytes, float] = {}
        self._cache_cap = 1 << 18

    def error_rate(self, mask) -> float:
        mask = np.asarray(mask, dtype=bool)
        key = mask.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        value = self._cv.error_rate(mask)
        if len(self._cache) < self._cache_cap:
            self._cache[key] = value
        return value

    def _evaluate_rows(self, X: np.ndarray):
        F = np.empty((len(X), 2))
        for i, row in enumerate(X):
            mask = decode_feature_mask(row)
            picked = int(mask.sum())
            if picked == 0:
                F[i] = (1.0, 0.0)
            else:
                F[i] = (self.error_rate(mask), picked / self.D)
        return F, None


def evaluate_feature_subset(problem: FeatureSelectionProblem, x, budget: EvaluationBudget | None = None):
    """Objective pair (error rate, selected fraction) for one decision vector."""
    F, _ = problem.evaluate_batch(np.asarray(x, dtype=float)[None, :], budget)
    return float(F[0, 0]), float(F[0, 1])


@dataclass(frozen=True)
class LocationInstance:
    """A central place, its 3 km disk, and the four typed facility point sets.

    Coordinates are planar meters with the origin at the central place.
    The interval table maps a raw distance to an integer objective in
    1..interval_count with interval_width-meter steps.
    """

    name: str
    center: np.ndarray
    radius: float
    facilities: dict
    interval_width: float = 500.0
    interval_count: int = 12

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.shape != (2,):
            raise ValueError("center must be a planar point")
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        cleaned = {}
        for ftype in FACILITY_TYPES:
            if ftype not in self.facilities:
                raise ValueError(f"missing facility type {ftype!r}")
            pts = np.asarray(self.facilities[ftype], dtype=float)
            if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] != 2:
                raise ValueError(f"facility type {ftype!r} needs at least one planar point")
            dist = np.linalg.norm(pts - center, axis=1)
            if np.any(dist > self.radius + 1e-6):
                raise ValueError(f"facility of type {ftype!r} lies outside the {self.radius} m radius")
            pts.flags.writeable = False
            cleaned[ftype] = pts
        unknown = set(self.facilities) - set(FACILITY_TYPES)
        if unknown:
            raise ValueError(f"unknown facility types: {sorted(unknown)}")
        object.__setattr__(self, "facilities", cleaned)

    def __eq__(self, other):
        if not isinstance(other, LocationInstance):
            return NotImplemented
        return (
            self.name == other.name
            and np.array_equal(self.center, other.center)
            and self.radius == other.radius
            and self.interval_width == other.interval_width
            and self.interval_count == other.interval_count
            and all(np.array_equal(self.facilities[t], other.facilities[t]) for t in FACILITY_TYPES)
        )


def distance_to_interval_value(d, width: float = 500.0, count: int = 12):
    """Map nonnegative distances (meters) to integer interval objectives 1..count.

    Bins are [0, w), [w, 2w), ...; everything from (count-1)*w up, including the
    closed top end of the last interval, maps to count.
    """
    arr = np.asarray(d, dtype=float)
    if np.any(arr < 0):
        raise ValueError("distances must be nonnegative")
    vals = np.minimum(np.floor(arr / width).astype(np.int64) + 1, count)
    return int(vals) if np.isscalar(d) or arr.ndim == 0 else vals


def _nearest_distances(inst: LocationInstance, X: np.ndarray) -> np.ndarray:
    """(n, 4) matrix of distances from each row of X to the nearest facility
    of each type, in the fixed FACILITY_TYPES order."""
    out = np.empty((len(X), len(FACILITY_TYPES)))
    for j, ftype in enumerate(FACILITY_TYPES):
        pts = inst.facilities[ftype]
        d2 = ((X[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        out[:, j] = np.sqrt(d2.min(axis=1))
    return out


def evaluate_location(inst: LocationInstance, x) -> tuple[np.ndarray, np.ndarray]:
    """Interval objectives and raw nearest distances for one planar point."""
    X = np.asarray(x, dtype=float)[None, :]
    aux = _nearest_distances(inst, X)[0]
    objectives = distance_to_interval_value(aux, inst.interval_width, inst.interval_count)
    return objectives.astype(float), aux


def repair_to_region(inst: LocationInstance, x) -> np.ndarray:
    """Radially project points outside the instance disk back onto its circle."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X).copy()
    offset = X - inst.center
    dist = np.linalg.norm(offset, axis=1)
    outside = dist > inst.radius
    if np.any(outside):
        scale = inst.radius / dist[outside]
        X[outside] = inst.center + offset[outside] * scale[:, None]
    return X[0] if single else X


class LocationSelectionProblem(Problem):
    """Planar location selection inside a facility instance's disk.

    The optimization box is the circumscribing square; candidate points are
    radially repaired onto the disk, honoring the radius constraint while
    keeping the shared real-coded operator suite.
    """

    kind = "location_selection"
    has_aux = True

    def __init__(self, instance: LocationInstance, name: str | None = None):
        self.instance = instance
        self.name = name or instance.name
        self.D = 2
        self.M = len(FACILITY_TYPES)
        self.bounds = Bounds(instance.center - instance.radius, instance.center + instance.radius)

    def repair(self, x: np.ndarray) -> np.ndarray:
        clipped = self.bounds.clip(np.asarray(x, dtype=float))
        return repair_to_region(self.instance, clipped)

    def _evaluate_rows(self, X: np.ndarray):
        aux = _nearest_distances(self.instance, X)
        F = distance_to_interval_value(aux, self.instance.interval_width, self.instance.interval_count)
        return F.astype(float), aux


def evaluate_synthetic(x) -> tuple[float, float]:
    """Two-branch synthetic objectives on [0, 2] x [0, 2].

    Folding x1 across 1 gives t, so the two strips x1 in [0,1] and x1 in (1,2]
    at x2 = 0.5 are equivalent optima: both map onto f2 = 1 - sqrt(f1).
    """
    x1, x2 = float(x[0]), float(x[1])
    t = x1 if x1 <= 1.0 else x1 - 1.0
    f1 = t
    f2 = 1.0 - np.sqrt(t) + 2.0 * (x2 - 0.5) ** 2
    return f1, float(f2)


class TwoBranchSynthetic(Problem):
    """Synthetic check problem with two equivalent Pareto subsets."""

    kind = "synthetic_two_ps"

    def __init__(self, name: str = "synthetic"):
        self.name = name
        self.D = 2
        self.M = 2
        self.bounds = Bounds(np.zeros(2), np.full(2, 2.0))

    def _evaluate_rows(self, X: np.ndarray):
        x1 = X[:, 0]
        x2 = X[:, 1]
        t = np.where(x1 <= 1.0, x1, x1 - 1.0)
        F = np.column_stack([t, 1.0 - np.sqrt(t) + 2.0 * (x2 - 0.5) ** 2])
        return F, None
