"""Real-coded variation operators: SBX crossover and polynomial mutation.

Both draw a fixed number of uniforms per call (masks decide which coordinates
change), so call sites stay reproducible regardless of which branches fire.
"""
from __future__ import annotations

import numpy as np

from .core import Bounds

__all__ = ["sbx_crossover", "polynomial_mutation"]


def sbx_crossover(p1, p2, bounds: Bounds, eta: float = 20.0, prob: float = 1.0, rng: np.random.Generator | None = None):
    """Simulated binary crossover; returns two children clamped to bounds.

    Each coordinate crosses with probability 0.5 and the resulting pair is
    swapped with probability 0.5, which keeps the per-child distribution
    symmetric about the parent midpoint.
    """
    if rng is None:
        raise ValueError("an explicit rng is required")
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    c1 = p1.copy()
    c2 = p2.copy()
    if rng.random() > prob:
        return c1, c2
    D = len(p1)
    cross = rng.random(D) <= 0.5
    u = rng.random(D)
    swap = rng.random(D) <= 0.5
    exponent = 1.0 / (eta + 1.0)
    beta = np.where(u <= 0.5, (2.0 * u) ** exponent, (0.5 / (1.0 - u)) ** exponent)
    a = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    b = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    lo, hi = np.where(swap, b, a), np.where(swap, a, b)
    c1[cross] = lo[cross]
    c2[cross] = hi[cross]
    return bounds.clip(c1), bounds.clip(c2)


def polynomial_mutation(x, bounds: Bounds, eta: float = 20.0, prob: float | None = None, rng: np.random.Generator | None = None):
    """Bounded polynomial mutation with per-coordinate probability prob
    (defaults to 1/D); the perturbation distribution respects the distance
    to each bound, so output needs no extra clamping beyond safety clipping."""
    if rng is None:
        raise ValueError("an explicit rng is required")
    x = np.asarray(x, dtype=float)
    D = len(x)
    if prob is None:
        prob = 1.0 / D
    picked = rng.random(D) < prob
    u = rng.random(D)
    span = bounds.upper - bounds.lower
    d1 = (x - bounds.lower) / span
    d2 = (bounds.upper - x) / span
    exponent = 1.0 / (eta + 1.0)
    low_side = u < 0.5
    dq = np.where(
        low_side,
        (2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)) ** exponent - 1.0,
        1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)) ** exponent,
    )
    out = x.copy()
    out[picked] = x[picked] + dq[picked] * span[picked]
    return bounds.clip(out)
