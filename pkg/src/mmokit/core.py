"""Shared primitives: solutions, dominance, non-dominated sorting, crowding measures.

Everything here is a pure function of its inputs; populations are treated as
immutable once built, so all of it is safe to call from concurrent runs.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Solution",
    "Bounds",
    "Population",
    "RandomStream",
    "dominates",
    "non_dominated_mask",
    "non_dominated_filter",
    "non_dominated_sort",
    "crowding_distance",
    "crowding_distance_matrix",
    "special_crowding_distance",
    "scd_from_matrices",
]


@dataclass(frozen=True)
class Bounds:
    """Box constraints for the decision space: lower[i] < upper[i] for all i."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("bounds must be two equal-length 1-D vectors")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be strictly below its upper bound")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    def contains(self, x: np.ndarray, atol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class Solution:
    """One candidate: a decision vector and its (minimization) objective vector.

    ``aux`` optionally carries raw floating-point objective values for problems
    whose reported objectives are coarser than the underlying measurements
    (location selection keeps nearest-facility distances in meters there).
    """

    decision: np.ndarray
    objectives: np.ndarray
    aux: np.ndarray | None = None

    def __post_init__(self):
        dec = np.asarray(self.decision, dtype=float)
        obj = np.asarray(self.objectives, dtype=float)
        if dec.ndim != 1 or obj.ndim != 1:
            raise ValueError("decision and objectives must be 1-D vectors")
        if not np.all(np.isfinite(obj)):
            raise ValueError("objective values must be finite")
        dec.flags.writeable = False
        obj.flags.writeable = False
        object.__setattr__(self, "decision", dec)
        object.__setattr__(self, "objectives", obj)
        if self.aux is not None:
            aux = np.asarray(self.aux, dtype=float)
            aux.flags.writeable = False
            object.__setattr__(self, "aux", aux)


class Population:
    """Ordered, immutable collection of solutions sharing one problem shape."""

    def __init__(self, members):
        members = list(members)
        if members:
            d = members[0].decision.shape[0]
            m = members[0].objectives.shape[0]
            for s in members:
                if s.decision.shape[0] != d or s.objectives.shape[0] != m:
                    raise ValueError("population members must share decision and objective dimensions")
        self._members = tuple(members)

    @classmethod
    def from_arrays(cls, decisions, objectives, aux=None) -> "Population":
        decisions = np.asarray(decisions, dtype=float)
        objectives = np.asarray(objectives, dtype=float)
        members = []
        for i in range(len(decisions)):
            members.append(
                Solution(decisions[i], objectives[i], None if aux is None else aux[i])
            )
        return cls(members)

    @property
    def members(self) -> tuple:
        return self._members

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self):
        return iter(self._members)

    def __getitem__(self, i):
        return self._members[i]

    def decisions(self) -> np.ndarray:
        return np.array([s.decision for s in self._members], dtype=float)

    def objectives(self) -> np.ndarray:
        return np.array([s.objectives for s in self._members], dtype=float)

    def aux(self) -> np.ndarray | None:
        if not self._members or self._members[0].aux is None:
            return None
        return np.array([s.aux for s in self._members], dtype=float)


def _stable_hash64(*parts) -> int:
    """Platform-independent 64-bit hash of a label tuple (ints and strings)."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, (int, np.integer)):
            h.update(b"i")
            h.update(int(p).to_bytes(16, "little", signed=True))
        else:
            b = str(p).encode("utf-8")
            h.update(b"s")
            h.update(len(b).to_bytes(4, "little"))
            h.update(b)
    return int.from_bytes(h.digest(), "little")


class RandomStream:
    """Deterministic random source, splittable into independent child streams.

    Identical seeds yield identical draw sequences. ``child(*labels)`` derives a
    new stream from a stable 64-bit hash of (seed, labels), so derived seeds do
    not depend on construction order.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & (2**64 - 1)
        self.rng = np.random.Generator(np.random.PCG64(self.seed))

    def child(self, *labels) -> "RandomStream":
        return RandomStream(_stable_hash64(self.seed, *labels))

    def __repr__(self):
        return f"RandomStream(seed={self.seed})"


def _objective_rows(pop) -> np.ndarray:
    if isinstance(pop, Population):
        return pop.objectives()
    return np.asarray(pop, dtype=float)


def dominates(a, b) -> bool:
    """Pareto dominance for minimization: a is nowhere worse and somewhere better.

    Accepts Solution objects or plain objective vectors.
    """
    fa = np.asarray(getattr(a, "objectives", a), dtype=float)
    fb = np.asarray(getattr(b, "objectives", b), dtype=float)
    if fa.shape != fb.shape:
        raise ValueError(f"objective vectors differ in length: {fa.shape} vs {fb.shape}")
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def non_dominated_mask(objectives: np.ndarray) -> np.ndarray:
    """Boolean mask of rows not dominated by any other row (minimization).

    Duplicate objective vectors never dominate each other, so all copies of a
    non-dominated vector are kept; multimodal archives rely on that.

    Uses a sort-and-sweep for two objectives and a unique-vector reduction with
    chunked pairwise checks otherwise; both are exact.
    """
    objs = np.asarray(objectives, dtype=float)
    n = len(objs)
    if n == 0:
        return np.zeros(0, dtype=bool)
    if objs.ndim != 2:
        raise ValueError("expected an (n, M) objective matrix")
    if objs.shape[1] == 2:
        return _nd_mask_2d(objs)
    return _nd_mask_general(objs)


def _nd_mask_2d(objs: np.ndarray) -> np.ndarray:
    # Sweep in f1 order; a point survives iff its f2 is strictly below every
    # earlier f1-class minimum and equals the minimum within its own class.
    order = np.lexsort((objs[:, 1], objs[:, 0]))
    keep = np.zeros(len(objs), dtype=bool)
    best_prev = np.inf
    i = 0
    while i < len(order):
        j = i
        f1 = objs[order[i], 0]
        group_min = objs[order[i], 1]  # sorted within group, first is minimal
        while j < len(order) and objs[order[j], 0] == f1:
            j += 1
        if group_min < best_prev:
            for k in range(i, j):
                if objs[order[k], 1] == group_min:
                    keep[order[k]] = True
                else:
                    break
            best_prev = group_min
        i = j
    return keep


def _nd_mask_general(objs: np.ndarray) -> np.ndarray:
    uniq, inverse = np.unique(objs, axis=0, return_inverse=True)
    m = len(uniq)
    nd_uniq = np.ones(m, dtype=bool)
    # chunked pairwise dominance over the distinct vectors only
    chunk = max(1, min(m, 2**22 // max(1, m)))
    for start in range(0, m, chunk):
        block = uniq[start : start + chunk]  # (b, M)
        le = np.all(uniq[None, :, :] <= block[:, None, :], axis=2)  # (b, m)
        lt = np.any(uniq[None, :, :] < block[:, None, :], axis=2)
        dominated = np.any(le & lt, axis=1)
        nd_uniq[start : start + chunk] &= ~dominated
    return nd_uniq[inverse]


def non_dominated_filter(pop: Population) -> Population:
    """Members dominated by no other member, in input order, duplicates kept."""
    if len(pop) == 0:
        return Population([])
    mask = non_dominated_mask(pop.objectives())
    return Population([s for s, keep in zip(pop, mask) if keep])


def non_dominated_sort(pop) -> list[list[int]]:
    """Partition a population into Pareto fronts (lists of member indices).

    Front 0 is the non-dominated set; front k is non-dominated once fronts
    below k are removed. Accepts a Population or an (n, M) objective matrix.
    """
    objs = _objective_rows(pop)
    n = len(objs)
    if n == 0:
        raise ValueError("cannot sort an empty population")
    # Deb-style bookkeeping on a chunked dominance matrix.
    dominated_by_count = np.zeros(n, dtype=np.int64)
    dominates_lists: list[np.ndarray] = []
    chunk = max(1, min(n, 2**22 // max(1, n)))
    for start in range(0, n, chunk):
        block = objs[start : start + chunk]
        le = np.all(block[:, None, :] <= objs[None, :, :], axis=2)
        lt = np.any(block[:, None, :] < objs[None, :, :], axis=2)
        dom = le & lt  # dom[i, j]: row (start+i) dominates j
        dominated_by_count += dom.sum(axis=0)
        for i in range(dom.shape[0]):
            dominates_lists.append(np.flatnonzero(dom[i]))
    fronts: list[list[int]] = []
    current = np.flatnonzero(dominated_by_count == 0)
    counts = dominated_by_count.copy()
    while len(current):
        fronts.append([int(i) for i in current])
        nxt = []
        for i in current:
            for j in dominates_lists[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        current = np.array(sorted(nxt), dtype=int)
    return fronts


def crowding_distance_matrix(values: np.ndarray) -> np.ndarray:
    """Boundary-infinite crowding distance over the rows of a coordinate matrix.

    Per coordinate the points are sorted, boundary points get +inf and interior
    points accumulate (next - prev) / (max - min); a degenerate coordinate
    (max == min) contributes nothing. Sets of size <= 2 are all-infinite.
    """
    vals = np.asarray(values, dtype=float)
    n = len(vals)
    if n == 0:
        return np.zeros(0)
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for c in range(vals.shape[1]):
        col = vals[:, c]
        order = np.argsort(col, kind="stable")
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = col[order[-1]] - col[order[0]]
        if span <= 0:
            continue
        interior = order[1:-1]
        gaps = (col[order[2:]] - col[order[:-2]]) / span
        finite = ~np.isinf(dist[interior])
        dist[interior[finite]] += gaps[finite]
    return dist


def crowding_distance(pop, space: str = "objective") -> np.ndarray:
    """Crowding distance of each member in the chosen space.

    ``space`` selects the coordinates: "objective" uses objective vectors,
    "decision" uses decision vectors.
    """
    if space not in ("objective", "decision"):
        raise ValueError(f"unknown space {space!r}; expected 'objective' or 'decision'")
    if isinstance(pop, Population):
        vals = pop.objectives() if space == "objective" else pop.decisions()
    else:
        vals = np.asarray(pop, dtype=float)
    return crowding_distance_matrix(vals)


def _finite_mean(v: np.ndarray) -> float:
    finite = v[np.isfinite(v)]
    return float(finite.mean()) if len(finite) else 0.0


def scd_from_matrices(decisions: np.ndarray, objectives: np.ndarray) -> np.ndarray:
    """Special crowding distance from decision and objective coordinate matrices.

    With Cx the decision-space and Cf the objective-space crowding distance:
    a member above either finite mean takes max(Cx, Cf), everyone else takes
    min(Cx, Cf). Infinite values are excluded from the means (an empty finite
    set means 0), which keeps the rule well defined for boundary members.
    """
    cx = crowding_distance_matrix(np.asarray(decisions, dtype=float))
    cf = crowding_distance_matrix(np.asarray(objectives, dtype=float))
    mean_cx = _finite_mean(cx)
    mean_cf = _finite_mean(cf)
    take_max = (cx > mean_cx) | (cf > mean_cf)
    return np.where(take_max, np.maximum(cx, cf), np.minimum(cx, cf))


def special_crowding_distance(pop: Population) -> np.ndarray:
    """Special crowding distance of each member (decision + objective spaces)."""
    if len(pop) == 0:
        return np.zeros(0)
    return scd_from_matrices(pop.decisions(), pop.objectives())
