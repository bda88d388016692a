"""Deterministic sampling and interval geometry shared by all estimators.

State points are plain 1-D float64 numpy arrays; sample sets are (count, n)
arrays with one point per row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Box",
    "RngStream",
    "as_state",
    "interval_hull",
    "lhs_sample",
    "uniform_sample",
]


def as_state(coords) -> np.ndarray:
    """Validate and return a state point as a finite 1-D float64 array."""
    x = np.asarray(coords, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"state must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"state has non-finite coordinates: {x}")
    return x


@dataclass(frozen=True)
class Box:
    """Axis-aligned interval [lower, upper] in R^n, lower <= upper componentwise."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_state(self.lower)
        hi = as_state(self.upper)
        if lo.shape != hi.shape:
            raise ValueError("lower/upper dimension mismatch")
        if np.any(lo > hi):
            raise ValueError(f"box has lower > upper: {lo} vs {hi}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, points) -> np.ndarray:
        """Componentwise-inclusive membership test for one point or (m, n) rows."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        inside = np.all((pts >= self.lower) & (pts <= self.upper), axis=1)
        return inside if np.asarray(points).ndim > 1 else bool(inside[0])


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream addressed by (seed, path).

    Identical (seed, path) pairs yield identical draw sequences; distinct
    paths yield statistically independent streams.  ``child`` derives a
    subordinate stream, so each consumer (one Monte Carlo trial, one LHS
    pool, ...) owns a stream that no amount of reordering or parallelism
    can perturb.
    """

    seed: int
    path: tuple[int, ...] = ()

    def child(self, *indices: int) -> "RngStream":
        return RngStream(self.seed, self.path + indices)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def uniform_sample(box: Box, count: int, rng: RngStream) -> np.ndarray:
    """Draw ``count`` points uniformly from ``box`` as a (count, n) array."""
    if count < 1:
        raise ValueError("count must be >= 1")
    gen = rng.generator()
    u = gen.random((count, box.dimension))
    return box.lower + u * box.widths


def lhs_sample(box: Box, count: int, rng: RngStream) -> np.ndarray:
    """Latin hypercube sample: one point per equal stratum on every axis.

    Within-stratum placement is a uniform random offset, with an independent
    random permutation of strata per axis.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    gen = rng.generator()
    n = box.dimension
    cells = np.empty((count, n))
    for j in range(n):
        perm = gen.permutation(count)
        cells[:, j] = (perm + gen.random(count)) / count
    return box.lower + cells * box.widths


def interval_hull(points) -> Box:
    """Smallest axis-aligned box containing all of ``points`` ((m, n) rows)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise ValueError("interval_hull of an empty point set is undefined")
    pts = np.atleast_2d(pts)
    return Box(pts.min(axis=0), pts.max(axis=0))
