"""Four multimodal multiobjective optimizers behind one runner interface.

Each runner is a deliberately minimal mechanism built from its one-paragraph
description: an Omni-optimizer-style NSGA-II variant ranking by special
crowding distance, a ring-topology PSO with personal-best archives, a
convergence-penalized density selection (CPDEA style), and a
weighted-indicator selection with a convergence archive (MMEA-WI style).
No fidelity to the original publications is claimed.

A best-of-budget uniform random sampler is registered as "random" and serves
as the calibration baseline. "hrea", "mmoea_dc" and "trimoea_tar" are
recognized names without implementations.

All randomness flows through one RandomStream per run; ties break toward the
lower index everywhere. A generation never issues more evaluations than the
budget has left; offspring batches are truncated to fit.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Bounds,
    Population,
    RandomStream,
    Solution,
    crowding_distance_matrix,
    non_dominated_mask,
    non_dominated_sort,
    scd_from_matrices,
)
from .operators import polynomial_mutation, sbx_crossover
from .problems import EvaluationBudget

__all__ = [
    "AlgorithmConfig",
    "Particle",
    "RunResult",
    "run_omni_optimizer",
    "run_mo_ring_pso_scd",
    "run_cpdea",
    "run_mmea_wi",
    "run_random_search",
    "REGISTRY",
    "OUT_OF_SCOPE",
    "get_algorithm",
]


@dataclass(frozen=True)
class AlgorithmConfig:
    population_size: int = 200
    max_evaluations: int = 20000
    sbx_eta: float = 20.0
    mutation_eta: float = 20.0
    crossover_prob: float = 1.0
    mutation_prob: float | None = None  # None means 1/D at use time
    pso_inertia: float = 0.7298
    pso_accel: float = 1.49618
    pba_capacity: int = 5
    cpdea_k: int = 3
    mmea_archive_capacity: int | None = None  # None means population_size

    def __post_init__(self):
        if self.population_size < 4 or self.population_size % 2:
            raise ValueError("population_size must be even and at least 4")
        if self.max_evaluations < self.population_size:
            raise ValueError("max_evaluations must cover at least the initial population")
        if self.pba_capacity < 1 or self.cpdea_k < 1:
            raise ValueError("pba_capacity and cpdea_k must be positive")

    @property
    def archive_capacity(self) -> int:
        return self.mmea_archive_capacity or self.population_size


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    archive: list = field(default_factory=list)  # non-dominated Solutions, capped


@dataclass
class RunResult:
    final_archive: Population
    evaluations_used: int
    seed: int
    wall_time: float


# ---------------------------------------------------------------- shared bits


def _mutation_prob(config: AlgorithmConfig, D: int) -> float:
    return config.mutation_prob if config.mutation_prob is not None else 1.0 / D


def _take(A, idx):
    return None if A is None else A[idx]


def _stack(a, b):
    return None if a is None else np.vstack([a, b])


def _init_arrays(problem, config, rng, budget):
    X = rng.uniform(problem.bounds.lower, problem.bounds.upper, size=(config.population_size, problem.D))
    X = problem.repair(X)
    F, AUX = problem.evaluate_batch(X, budget)
    return X, F, AUX


def _ga_offspring(problem, config, rng, parents: np.ndarray, n_off: int) -> np.ndarray:
    """SBX + polynomial mutation over consecutive parent pairs, truncated to n_off."""
    pm = _mutation_prob(config, problem.D)
    kids = []
    for t in range(0, len(parents) - 1, 2):
        c1, c2 = sbx_crossover(parents[t], parents[t + 1], problem.bounds, config.sbx_eta, config.crossover_prob, rng)
        kids.append(polynomial_mutation(c1, problem.bounds, config.mutation_eta, pm, rng))
        kids.append(polynomial_mutation(c2, problem.bounds, config.mutation_eta, pm, rng))
    return problem.repair(np.array(kids[:n_off]))


def _tournament(rng, n: int, key):
    """Binary tournament; key(i) sorts ascending, lower is better."""
    a, b = (int(v) for v in rng.integers(0, n, size=2))
    return a if a == b or key(a) <= key(b) else b


def _rank_of(F: np.ndarray):
    fronts = non_dominated_sort(F)
    rank = np.empty(len(F), dtype=int)
    for r, front in enumerate(fronts):
        rank[front] = r
    return rank, fronts


def _scd_per_front(X: np.ndarray, F: np.ndarray, fronts) -> np.ndarray:
    scd = np.empty(len(F))
    for front in fronts:
        idx = np.asarray(front)
        scd[idx] = scd_from_matrices(X[idx], F[idx])
    return scd


def _normalize(X: np.ndarray, bounds: Bounds) -> np.ndarray:
    return (X - bounds.lower) / (bounds.upper - bounds.lower)


def _dist_matrix(Xn: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances accumulated coordinate by coordinate.

    Entry values are bitwise independent of which other rows are present,
    so subset recomputation (the naive truncation oracles) reproduces the
    full-matrix entries exactly.
    """
    n = len(Xn)
    d2 = np.zeros((n, n))
    for c in range(Xn.shape[1]):
        diff = Xn[:, c, None] - Xn[None, :, c]
        d2 += diff * diff
    return np.sqrt(d2)


def _dominance_matrix(F: np.ndarray) -> np.ndarray:
    """DOM[a, b] means row a dominates row b (minimization)."""
    n = len(F)
    DOM = np.empty((n, n), dtype=bool)
    chunk = max(1, min(n, 2**22 // max(1, n)))
    for start in range(0, n, chunk):
        block = F[start : start + chunk]
        le = np.all(block[:, None, :] <= F[None, :, :], axis=2)
        lt = np.any(block[:, None, :] < F[None, :, :], axis=2)
        DOM[start : start + chunk] = le & lt
    return DOM


def _finish(problem, X, F, AUX, budget, seed, t0) -> RunResult:
    keep = non_dominated_mask(F)
    archive = Population.from_arrays(X[keep], F[keep], _take(AUX, keep))
    return RunResult(archive, budget.used, seed, time.perf_counter() - t0)


# ------------------------------------------------------------ omni-optimizer


def _nsga_scd_select(X, F, AUX, n_keep: int):
    """Environmental selection: fill by front, cut front by descending SCD."""
    fronts = non_dominated_sort(F)
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= n_keep:
            chosen.extend(front)
            continue
        idx = np.asarray(front)
        scd = scd_from_matrices(X[idx], F[idx])
        order = np.argsort(-scd, kind="stable")
        chosen.extend(int(idx[o]) for o in order[: n_keep - len(chosen)])
        break
    sel = np.asarray(chosen)
    return X[sel], F[sel], _take(AUX, sel)


def run_omni_optimizer(problem, config: AlgorithmConfig, seed: int) -> RunResult:
    """NSGA-II-style loop ranking by front, then special crowding distance."""
    t0 = time.perf_counter()
    rng = RandomStream(seed).rng
    budget = EvaluationBudget(config.max_evaluations)
    N = config.population_size
    X, F, AUX = _init_arrays(problem, config, rng, budget)
    while budget.remaining > 0:
        n_off = min(N, budget.remaining)
        rank, fronts = _rank_of(F)
        scd = _scd_per_front(X, F, fronts)
        key = lambda i: (rank[i], -scd[i], i)
        n_parents = 2 * ((n_off + 1) // 2)
        parents = np.array([_tournament(rng, N, key) for _ in range(n_parents)])
        C = _ga_offspring(problem, config, rng, X[parents], n_off)
        FC, AUXC = problem.evaluate_batch(C, budget)
        X, F, AUX = _nsga_scd_select(np.vstack([X, C]), np.vstack([F, FC]), _stack(AUX, AUXC), N)
    return _finish(problem, X, F, AUX, budget, seed, t0)


# --------------------------------------------------------- ring-topology PSO


def _solution_matrices(solutions):
    X = np.array([s.decision for s in solutions])
    F = np.array([s.objectives for s in solutions])
    return X, F


def _nd_solutions(solutions):
    _, F = _solution_matrices(solutions)
    mask = non_dominated_mask(F)
    return [s for s, keep in zip(solutions, mask) if keep]


def _scd_of(solutions) -> np.ndarray:
    X, F = _solution_matrices(solutions)
    return scd_from_matrices(X, F)


def _truncate_by_scd(solutions, cap: int):
    if len(solutions) <= cap:
        return solutions
    order = np.argsort(-_scd_of(solutions), kind="stable")[:cap]
    return [solutions[i] for i in sorted(int(o) for o in order)]


def _update_personal_archive(archive, new: Solution, cap: int):
    # exact re-visits of a stored decision vector add nothing and are skipped
    for s in archive:
        if np.array_equal(s.decision, new.decision):
            return archive
    return _truncate_by_scd(_nd_solutions(archive + [new]), cap)


def run_mo_ring_pso_scd(problem, config: AlgorithmConfig, seed: int) -> RunResult:
    """PSO on a ring: neighborhood bests and archive truncation use SCD."""
    t0 = time.perf_counter()
    rng = RandomStream(seed).rng
    budget = EvaluationBudget(config.max_evaluations)
    N = config.population_size
    w, c = config.pso_inertia, config.pso_accel
    X = problem.repair(rng.uniform(problem.bounds.lower, problem.bounds.upper, size=(N, problem.D)))
    F, AUX = problem.evaluate_batch(X, budget)
    swarm = [
        Particle(X[i].copy(), np.zeros(problem.D), [Solution(X[i], F[i], _take(AUX, i))])
        for i in range(N)
    ]
    while budget.remaining > 0:
        moving = min(N, budget.remaining)
        # synchronous update: guides come from the pre-move archives
        new_positions = np.empty((moving, problem.D))
        for i in range(moving):
            p = swarm[i]
            pbest = p.archive[int(np.argmax(_scd_of(p.archive)))]
            hood = swarm[(i - 1) % N].archive + p.archive + swarm[(i + 1) % N].archive
            cand = _nd_solutions(hood)
            nbest = cand[int(np.argmax(_scd_of(cand)))]
            r1 = rng.random(problem.D)
            r2 = rng.random(problem.D)
            v = w * p.velocity + c * r1 * (pbest.decision - p.position) + c * r2 * (nbest.decision - p.position)
            raw = p.position + v
            clipped = problem.bounds.clip(raw)
            v[clipped != raw] = 0.0
            p.velocity = v
            p.position = problem.repair(clipped)
            new_positions[i] = p.position
        FN, AUXN = problem.evaluate_batch(new_positions, budget)
        for i in range(moving):
            sol = Solution(new_positions[i], FN[i], _take(AUXN, i))
            swarm[i].archive = _update_personal_archive(swarm[i].archive, sol, config.pba_capacity)
    pool: list[Solution] = []
    for p in swarm:
        pool.extend(p.archive)
    final = _truncate_by_scd(_nd_solutions(pool), N)
    archive = Population(final)
    return RunResult(archive, budget.used, seed, time.perf_counter() - t0)


# -------------------------------------------------------------------- CPDEA


def _k_smallest_mean(row: np.ndarray, k: int) -> float:
    # sort the k selected values so the float summation order is canonical
    vals = np.sort(np.partition(row, k - 1)[:k])
    return float(vals.sum() / k)


def _cpdea_density(D: np.ndarray, DOM: np.ndarray, k: int) -> np.ndarray:
    """Density of each point given a distance matrix with an inf diagonal.

    k nearest (stable, lower index on ties) define the convergence quality
    q = 1/(1 + dominating neighbors); distances transform as
    d * (q_i + q_j) / 2 and the density is 1/(1 + mean of the k smallest).
    """
    n = len(D)
    k_eff = min(k, n - 1)
    if k_eff == 0:
        return np.ones(n)
    order = np.argsort(D, axis=1, kind="stable")
    nbrs = order[:, :k_eff]
    dom_counts = DOM[nbrs, np.arange(n)[:, None]].sum(axis=1)
    q = 1.0 / (1.0 + dom_counts)
    W = D * (0.5 * (q[:, None] + q[None, :]))
    dens = np.empty(n)
    for i in range(n):
        dens[i] = 1.0 / (1.0 + _k_smallest_mean(W[i], k_eff))
    return dens


def cpdea_truncate_naive(D: np.ndarray, DOM: np.ndarray, target: int, k: int) -> list[int]:
    """Reference selection: recompute densities from scratch after each removal
    of the densest member. Quadratic; kept as the oracle and small-set path."""
    alive = list(range(len(D)))
    while len(alive) > target:
        sub = np.ix_(alive, alive)
        dens = _cpdea_density(D[sub], DOM[sub], k)
        alive.pop(int(np.argmax(dens)))
    return alive


def cpdea_truncate(D: np.ndarray, DOM: np.ndarray, target: int, k: int) -> list[int]:
    """Same selection as cpdea_truncate_naive, maintained incrementally.

    Invariants preserved per removal: each survivor's k nearest survivors
    (stable order), its q, the transformed-distance row, and its density.
    Only rows whose neighbor set or candidate pool actually changed are
    recomputed, so a removal costs O(n) instead of O(n^2).
    """
    n = len(D)
    if n <= target:
        return list(range(n))
    if n < 64 or n - 1 <= k or target <= k:
        return cpdea_truncate_naive(D, DOM, target, k)

    ORD = np.argsort(D, axis=1, kind="stable")
    alive = np.ones(n, dtype=bool)
    Dm = D.copy()  # rows/cols of removed points become inf
    nbrs = [list(map(int, ORD[i, :k])) for i in range(n)]
    ptr = np.full(n, k)
    rev: list[set] = [set() for _ in range(n)]
    for i in range(n):
        for j in nbrs[i]:
            rev[j].add(i)
    counts = np.array([int(DOM[nbrs[i], i].sum()) for i in range(n)])
    q = 1.0 / (1.0 + counts)
    W = Dm * (0.5 * (q[:, None] + q[None, :]))
    dens = np.empty(n)
    kth = np.empty(n)
    for i in range(n):
        vals = np.sort(np.partition(W[i], k - 1)[:k])
        kth[i] = vals[-1]
        dens[i] = 1.0 / (1.0 + float(vals.sum() / k))

    def refresh(rows):
        for i in rows:
            vals = np.sort(np.partition(W[i], k - 1)[:k])
            kth[i] = vals[-1]
            dens[i] = 1.0 / (1.0 + float(vals.sum() / k))

    remaining = n
    while remaining > target:
        r = int(np.argmax(np.where(alive, dens, -np.inf)))
        alive[r] = False
        remaining -= 1
        stale = set(np.flatnonzero(W[:, r] <= kth).tolist())  # r may sit in these k-sets
        Dm[r, :] = np.inf
        Dm[:, r] = np.inf
        W[r, :] = np.inf
        W[:, r] = np.inf
        q_changed = []
        for i in sorted(rev[r]):
            if not alive[i]:
                continue
            nbrs[i].remove(r)
            p = int(ptr[i])
            while not alive[ORD[i, p]] or ORD[i, p] == i:
                p += 1
            ptr[i] = p + 1
            j = int(ORD[i, p])
            nbrs[i].append(j)
            rev[j].add(i)
            new_count = int(DOM[nbrs[i], i].sum())
            if new_count != counts[i]:
                counts[i] = new_count
                q_changed.append(i)
        rev[r].clear()
        for i in q_changed:
            q[i] = 1.0 / (1.0 + counts[i])
            old_col = W[:, i].copy()
            scale = 0.5 * (q[i] + q)
            W[i, :] = Dm[i, :] * scale
            W[:, i] = Dm[:, i] * scale
            stale.add(i)
            stale.update(np.flatnonzero((old_col <= kth) | (W[:, i] < kth)).tolist())
        refresh(i for i in sorted(stale) if alive[i])
    return [int(i) for i in np.flatnonzero(alive)]


def run_cpdea(problem, config: AlgorithmConfig, seed: int) -> RunResult:
    """Density-driven selection where local convergence quality discounts
    distances, so dominated neighborhoods look crowded and get pruned."""
    t0 = time.perf_counter()
    rng = RandomStream(seed).rng
    budget = EvaluationBudget(config.max_evaluations)
    N = config.population_size
    k = config.cpdea_k
    X, F, AUX = _init_arrays(problem, config, rng, budget)
    while budget.remaining > 0:
        n_off = min(N, budget.remaining)
        Dpop = _dist_matrix(_normalize(X, problem.bounds))
        np.fill_diagonal(Dpop, np.inf)
        dens = _cpdea_density(Dpop, _dominance_matrix(F), k)
        key = lambda i: (dens[i], i)
        n_parents = 2 * ((n_off + 1) // 2)
        parents = np.array([_tournament(rng, N, key) for _ in range(n_parents)])
        C = _ga_offspring(problem, config, rng, X[parents], n_off)
        FC, AUXC = problem.evaluate_batch(C, budget)
        Xm, Fm, AUXm = np.vstack([X, C]), np.vstack([F, FC]), _stack(AUX, AUXC)
        Dm = _dist_matrix(_normalize(Xm, problem.bounds))
        np.fill_diagonal(Dm, np.inf)
        keep = cpdea_truncate(Dm, _dominance_matrix(Fm), N, k)
        X, F, AUX = Xm[keep], Fm[keep], _take(AUXm, keep)
    return _finish(problem, X, F, AUX, budget, seed, t0)


# ------------------------------------------------------------------- MMEA-WI


def _weight_matrix(Xn: np.ndarray):
    """exp(-d/sigma) affinity matrix with a zero diagonal; sigma is the mean
    pairwise distance of the set (1.0 when the set is fully coincident)."""
    n = len(Xn)
    D = _dist_matrix(Xn)
    sigma = float(D.sum() / (n * (n - 1))) if n > 1 else 1.0
    if sigma <= 0.0:
        sigma = 1.0
    E = np.exp(-D / sigma)
    np.fill_diagonal(E, 0.0)
    return E


def mmea_truncate(Xn: np.ndarray, target: int) -> list[int]:
    """Iteratively drop the member with the largest weighted indicator
    I_i = sum_j exp(-d_ij / sigma); sigma is fixed for the episode, so each
    removal is an exact column subtraction."""
    n = len(Xn)
    if n <= target:
        return list(range(n))
    E = _weight_matrix(Xn)
    I = E.sum(axis=1)
    alive = np.ones(n, dtype=bool)
    for _ in range(n - target):
        r = int(np.argmax(np.where(alive, I, -np.inf)))
        alive[r] = False
        I -= E[:, r]
    return [int(i) for i in np.flatnonzero(alive)]


def _mmea_env_select(Xn, X, F, AUX, n_keep: int):
    fronts = non_dominated_sort(F)
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= n_keep:
            chosen.extend(front)
            continue
        idx = np.asarray(front)
        keep = mmea_truncate(Xn[idx], n_keep - len(chosen))
        chosen.extend(int(idx[i]) for i in keep)
        break
    sel = np.asarray(chosen)
    return X[sel], F[sel], _take(AUX, sel)


def _dedupe_rows(X: np.ndarray) -> np.ndarray:
    """Indices of first occurrences of distinct rows, in original order."""
    _, first = np.unique(X, axis=0, return_index=True)
    return np.sort(first)


def _mmea_update_archive(arcX, arcF, arcAUX, X, F, AUX, capacity: int):
    Xm, Fm = np.vstack([arcX, X]), np.vstack([arcF, F])
    AUXm = _stack(arcAUX, AUX)
    first = _dedupe_rows(Xm)
    Xm, Fm, AUXm = Xm[first], Fm[first], _take(AUXm, first)
    nd = non_dominated_mask(Fm)
    Xm, Fm, AUXm = Xm[nd], Fm[nd], _take(AUXm, nd)
    if len(Xm) > capacity:
        crowd = crowding_distance_matrix(Fm)
        order = np.sort(np.argsort(-crowd, kind="stable")[:capacity])
        Xm, Fm, AUXm = Xm[order], Fm[order], _take(AUXm, order)
    return Xm, Fm, AUXm


def run_mmea_wi(problem, config: AlgorithmConfig, seed: int) -> RunResult:
    """Weighted-indicator selection plus a convergence archive that feeds
    half of every mating pool."""
    t0 = time.perf_counter()
    rng = RandomStream(seed).rng
    budget = EvaluationBudget(config.max_evaluations)
    N = config.population_size
    X, F, AUX = _init_arrays(problem, config, rng, budget)
    nd = non_dominated_mask(F)
    arcX, arcF, arcAUX = X[nd], F[nd], _take(AUX, nd)
    while budget.remaining > 0:
        n_off = min(N, budget.remaining)
        E = _weight_matrix(_normalize(X, problem.bounds))
        I = E.sum(axis=1)
        key = lambda i: (I[i], i)
        pairs = (n_off + 1) // 2
        parent_rows = []
        for _ in range(pairs):
            winner = _tournament(rng, N, key)
            mate = int(rng.integers(0, len(arcX)))
            parent_rows.append(X[winner])
            parent_rows.append(arcX[mate])
        C = _ga_offspring(problem, config, rng, np.array(parent_rows), n_off)
        FC, AUXC = problem.evaluate_batch(C, budget)
        Xm, Fm, AUXm = np.vstack([X, C]), np.vstack([F, FC]), _stack(AUX, AUXC)
        X, F, AUX = _mmea_env_select(_normalize(Xm, problem.bounds), Xm, Fm, AUXm, N)
        arcX, arcF, arcAUX = _mmea_update_archive(arcX, arcF, arcAUX, X, F, AUX, config.archive_capacity)
    Xm, Fm = np.vstack([arcX, X]), np.vstack([arcF, F])
    AUXm = _stack(arcAUX, AUX)
    first = _dedupe_rows(Xm)
    Xm, Fm, AUXm = Xm[first], Fm[first], _take(AUXm, first)
    nd = non_dominated_mask(Fm)
    Xm, Fm, AUXm = Xm[nd], Fm[nd], _take(AUXm, nd)
    keep = mmea_truncate(_normalize(Xm, problem.bounds), config.archive_capacity)
    archive = Population.from_arrays(Xm[keep], Fm[keep], _take(AUXm, keep))
    return RunResult(archive, budget.used, seed, time.perf_counter() - t0)


# ---------------------------------------------------------- random baseline


def run_random_search(problem, config: AlgorithmConfig, seed: int) -> RunResult:
    """Best-of-budget uniform sampling; the calibration baseline."""
    t0 = time.perf_counter()
    rng = RandomStream(seed).rng
    budget = EvaluationBudget(config.max_evaluations)
    X = problem.repair(rng.uniform(problem.bounds.lower, problem.bounds.upper, size=(config.max_evaluations, problem.D)))
    F, AUX = problem.evaluate_batch(X, budget)
    nd = np.flatnonzero(non_dominated_mask(F))
    if len(nd) > config.population_size:
        scd = scd_from_matrices(X[nd], F[nd])
        order = np.argsort(-scd, kind="stable")[: config.population_size]
        nd = nd[np.sort(order)]
    archive = Population.from_arrays(X[nd], F[nd], _take(AUX, nd))
    return RunResult(archive, budget.used, seed, time.perf_counter() - t0)


REGISTRY = {
    "omni": run_omni_optimizer,
    "mo_ring_pso_scd": run_mo_ring_pso_scd,
    "cpdea": run_cpdea,
    "mmea_wi": run_mmea_wi,
    "random": run_random_search,
}

OUT_OF_SCOPE = ("hrea", "mmoea_dc", "trimoea_tar")


def get_algorithm(name: str):
    """Resolve a registered runner; unknown names raise, naming the
    recognized-but-unimplemented set."""
    try:
        return REGISTRY[name]
    except KeyError:
        raise NotImplementedError(
            f"algorithm {name!r} is not implemented; available: {sorted(REGISTRY)}; "
            f"out of scope: {', '.join(OUT_OF_SCOPE)}"
        ) from None
