"""Benchmark systems and the grid-scoring harness shared by the CLI and scripts."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .acc_oracle import is_safe
from .core import Box, RngStream
from .dynamics import AccSystem, DynamicalSystem, acc_system, augment_parameters
from .gpc import GpcReachEstimate, classify, run_adaptive_gpc, run_sampled_gpc

__all__ = [
    "ACC_REGION",
    "GPC_STRATEGIES",
    "acc_safe_label_fn",
    "default_initial_box",
    "default_horizon",
    "estimate_grid",
    "grid_accuracy",
    "grid_axes",
    "grid_points",
    "oracle_grid",
    "run_gpc_strategy",
    "state_names",
    "strategy_accuracy",
    "system_by_name",
]

# Analysis window from the braking example: gap in [0, 2], leader velocity in [0, 5].
ACC_REGION = Box([0.0, 0.0], [2.0, 5.0])

GPC_STRATEGIES = ("adaptive", "uniform", "lhs")


def system_by_name(name: str, acc_params: AccSystem = AccSystem()) -> DynamicalSystem:
    if name == "acc":
        return acc_system(acc_params)
    if name == "linear-demo":

        def decay(x, t):
            return -np.asarray(x, dtype=np.float64)

        return DynamicalSystem(1, decay, vectorized=True)
    if name == "rotation-demo":

        def rotate(x, t):
            x = np.asarray(x, dtype=np.float64)
            return np.stack([-x[..., 1], x[..., 0]], axis=-1)

        return DynamicalSystem(2, rotate, vectorized=True)
    if name == "param-linear-demo":

        def decay_rate_from_param(x, t):
            x = np.asarray(x, dtype=np.float64)
            return (-x[..., 1] * x[..., 0])[..., None]

        base = DynamicalSystem(1, decay_rate_from_param, vectorized=True)
        return augment_parameters(base, 1)
    raise ValueError(f"unknown system {name!r}")


def default_initial_box(name: str, vf: float = 5.0) -> Box:
    if name == "acc":
        return Box([0.0, 0.0, vf], [2.0, 5.0, vf])
    if name == "linear-demo":
        return Box([1.0], [2.0])
    if name == "rotation-demo":
        return Box([1.0, 1.0], [1.1, 1.1])
    if name == "param-linear-demo":
        return Box([0.9, 0.5], [1.1, 1.5])
    raise ValueError(f"unknown system {name!r}")


def default_horizon(name: str) -> tuple[float, float]:
    return (0.0, math.pi / 2) if name == "rotation-demo" else (0.0, 1.0)


def state_names(name: str, dimension: int) -> list[str]:
    if name == "acc":
        return ["h", "vL", "vF"]
    return [f"x{i + 1}" for i in range(dimension)]


def acc_safe_label_fn(vf: float, params: AccSystem = AccSystem()) -> Callable[[np.ndarray], float]:
    """Label a (gap, leader velocity) point: 1 = safe, 0 = collision."""

    def label(point: np.ndarray) -> float:
        return 1.0 if is_safe(point[0], point[1], vf, params.a, params.b) else 0.0

    return label


def grid_axes(region: Box, nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
    if region.dimension != 2:
        raise ValueError("grid scoring needs a 2-D region")
    xs = np.linspace(region.lower[0], region.upper[0], nx)
    ys = np.linspace(region.lower[1], region.upper[1], ny)
    return xs, ys


def grid_points(region: Box, nx: int, ny: int) -> np.ndarray:
    """Raster of the region as (nx * ny, 2) rows; first axis varies slowest."""
    xs, ys = grid_axes(region, nx, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def oracle_grid(
    region: Box, vf: float, params: AccSystem = AccSystem(), nx: int = 200, ny: int = 200
) -> np.ndarray:
    """True safe/unsafe verdict at every raster point (boolean array)."""
    pts = grid_points(region, nx, ny)
    return np.asarray(is_safe(pts[:, 0], pts[:, 1], vf, params.a, params.b))


def estimate_grid(
    estimate: GpcReachEstimate, region: Box, nx: int = 200, ny: int = 200
) -> np.ndarray:
    pts = grid_points(region, nx, ny)
    return np.asarray(classify(estimate, pts))


def grid_accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    return float(np.mean(predicted == truth))


def run_gpc_strategy(
    strategy: str,
    label_fn: Callable[[np.ndarray], float],
    region: Box,
    m: int,
    pool_size: int,
    threshold: float,
    regularization: float,
    rng: RngStream,
) -> GpcReachEstimate:
    if strategy == "adaptive":
        return run_adaptive_gpc(
            label_fn, region, m, pool_size, threshold, regularization, rng
        )
    if strategy in ("uniform", "lhs"):
        return run_sampled_gpc(
            label_fn, region, m, strategy, threshold, regularization, rng
        )
    raise ValueError(f"unknown strategy {strategy!r}")


def strategy_accuracy(
    strategy: str,
    m: int,
    seed: int,
    vf: float = 5.0,
    params: AccSystem = AccSystem(),
    region: Box = ACC_REGION,
    pool_size: int = 1000,
    threshold: float = 0.5,
    regularization: float = 1e-6,
    grid_n: int = 200,
) -> float:
    """Grid accuracy of one strategy at one budget on the braking benchmark."""
    estimate = run_gpc_strategy(
        strategy,
        acc_safe_label_fn(vf, params),
        region,
        m,
        pool_size,
        threshold,
        regularization,
        RngStream(seed),
    )
    predicted = estimate_grid(estimate, region, grid_n, grid_n)
    truth = oracle_grid(region, vf, params, grid_n, grid_n)
    return grid_accuracy(predicted, truth)
