"""Least-squares Gaussian process classifier with adaptive sample selection.

Binary reachability labels (1 = in-set, 0 = out) are fit by GP regression
under a squared-exponential kernel; the posterior mean thresholded at gamma
gives the set estimate, and the posterior uncertainty drives an adaptive
loop that labels whichever candidate is most likely to be misclassified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import ndtr

from .core import Box, RngStream, lhs_sample

__all__ = [
    "FitError",
    "GpcModel",
    "GpcReachEstimate",
    "LabeledSample",
    "SqExpKernel",
    "adaptive_select",
    "classify",
    "fit",
    "fit_hyperparameters",
    "kernel_eval",
    "log_marginal_likelihood",
    "p_misclass",
    "posterior",
    "run_adaptive_gpc",
    "run_sampled_gpc",
]


class FitError(RuntimeError):
    """Raised when the regularized Gram matrix is not positive definite."""


@dataclass(frozen=True)
class SqExpKernel:
    """Squared-exponential kernel k(x1, x2) = amplitude * exp(-sum_i l_i (x2_i - x1_i)^2).

    ``lengthscales`` holds the diagonal weights l_i of the quadratic form;
    they multiply squared distances directly, so they are inverse-squared
    length scales.
    """

    amplitude: float
    lengthscales: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lengthscales", tuple(float(l) for l in self.lengthscales))
        ok = self.amplitude > 0 and math.isfinite(self.amplitude)
        ok = ok and all(l > 0 and math.isfinite(l) for l in self.lengthscales)
        if not ok:
            raise ValueError("kernel parameters must be positive and finite")


@dataclass(frozen=True)
class LabeledSample:
    """A state point with its binary reachability label (exactly 0 or 1)."""

    point: np.ndarray
    label: float

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=np.float64))
        object.__setattr__(self, "label", float(self.label))
        if self.label not in (0.0, 1.0):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


def kernel_eval(kernel: SqExpKernel, x1, x2) -> float:
    """Evaluate the kernel at a single pair of points."""
    d = np.asarray(x2, dtype=np.float64) - np.asarray(x1, dtype=np.float64)
    if d.shape != (len(kernel.lengthscales),):
        raise ValueError("point dimension does not match kernel lengthscale count")
    return float(kernel.amplitude * np.exp(-np.dot(d * d, kernel.lengthscales)))


def _cross_covariance(kernel: SqExpKernel, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    w = np.asarray(kernel.lengthscales)
    d = xa[:, None, :] - xb[None, :, :]
    return kernel.amplitude * np.exp(-((d * d) @ w))


@dataclass(frozen=True)
class GpcModel:
    """A fitted least-squares GP: training data plus the factored Gram matrix."""

    kernel: SqExpKernel
    regularization: float
    points: np.ndarray
    labels: np.ndarray
    factor: tuple
    weights: np.ndarray

    @property
    def sample_count(self) -> int:
        return self.points.shape[0]


def fit(samples: Sequence[LabeledSample], kernel: SqExpKernel, regularization: float) -> GpcModel:
    """Fit the GP posterior to labeled samples by factoring K + lambda*I.

    With zero regularization the posterior mean interpolates the training
    labels exactly (requires distinct sample points).
    """
    if len(samples) == 0:
        raise ValueError("at least one labeled sample is required")
    if regularization < 0:
        raise ValueError("regularization must be nonnegative")
    X = np.asarray([s.point for s in samples])
    y = np.asarray([s.label for s in samples])
    K = _cross_covariance(kernel, X, X)
    A = K + regularization * np.eye(len(samples))
    try:
        factor = cho_factor(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise FitError(
            "Gram matrix is not positive definite; increase the regularization"
        ) from exc
    weights = cho_solve(factor, y)
    return GpcModel(
        kernel=kernel,
        regularization=regularization,
        points=X,
        labels=y,
        factor=factor,
        weights=weights,
    )


def posterior(model: GpcModel, x):
    """Posterior mean and variance at one point (n,) or a batch (q, n).

    mean = k(x, X) (K + lambda I)^-1 y
    var  = k(x, x) - k(x, X) (K + lambda I)^-1 k(X, x), clamped to [0, amplitude]
    against roundoff.
    """
    xq = np.asarray(x, dtype=np.float64)
    single = xq.ndim == 1
    xq = np.atleast_2d(xq)
    kx = _cross_covariance(model.kernel, xq, model.points)
    mean = kx @ model.weights
    solved = cho_solve(model.factor, kx.T)
    var = model.kernel.amplitude - np.einsum("qm,mq->q", kx, solved)
    var = np.clip(var, 0.0, model.kernel.amplitude)
    if single:
        return float(mean[0]), float(var[0])
    return mean, var


def _lml_of(model: GpcModel) -> float:
    m = model.sample_count
    log_det = 2.0 * np.sum(np.log(np.diag(model.factor[0])))
    quad = float(model.labels @ model.weights)
    return -0.5 * quad - 0.5 * log_det - 0.5 * m * math.log(2.0 * math.pi)


def log_marginal_likelihood(
    samples: Sequence[LabeledSample], kernel: SqExpKernel, regularization: float
) -> float:
    """Gaussian evidence: -1/2 y^T (K+lI)^-1 y - 1/2 log det(K+lI) - (m/2) log 2pi."""
    return _lml_of(fit(samples, kernel, regularization))


def _golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


_LOG_PARAM_LIMIT = math.log(1e12)


def fit_hyperparameters(
    samples: Sequence[LabeledSample],
    dimension: int,
    regularization: float,
    rng: Optional[RngStream] = None,
) -> SqExpKernel:
    """Maximum-likelihood kernel via deterministic multi-start search.

    Nine starts on a log-space lattice (length scales from 1/100 to 10x the
    data span per axis, amplitude 0.1 to 10) are scored; the best two are
    refined by coordinate-wise golden-section search in log-parameter space
    to a tolerance of 1e-3.  The search is fully deterministic; ``rng`` is
    accepted for interface symmetry with the sampling routines but unused.
    """
    del rng
    labels = {s.label for s in samples}
    if len(samples) < 2 or labels != {0.0, 1.0}:
        raise ValueError("need >= 2 samples with both labels present")
    X = np.asarray([s.point for s in samples])
    if X.shape[1] != dimension:
        raise ValueError("sample dimension mismatch")
    spans = X.max(axis=0) - X.min(axis=0)
    spans[spans == 0.0] = 1.0

    def objective(theta: np.ndarray) -> float:
        if np.any(np.abs(theta) > _LOG_PARAM_LIMIT):
            return -np.inf
        kernel = SqExpKernel(math.exp(theta[0]), tuple(np.exp(theta[1:])))
        try:
            return log_marginal_likelihood(samples, kernel, regularization)
        except FitError:
            return -np.inf

    starts = []
    for scale_factor in np.geomspace(0.01, 10.0, 3):
        weights = 1.0 / (scale_factor * spans) ** 2
        for amplitude in (0.1, 1.0, 10.0):
            theta = np.log(np.concatenate([[amplitude], weights]))
            starts.append((objective(theta), theta))
    if all(not np.isfinite(value) for value, _ in starts):
        raise FitError("all hyperparameter starts failed to factorize")
    order = sorted(range(len(starts)), key=lambda i: -starts[i][0])

    best_value, best_theta = starts[order[0]]
    for idx in order[:2]:
        value, theta = _refine_coordinatewise(objective, starts[idx][1], starts[idx][0])
        if value > best_value:
            best_value, best_theta = value, theta
    return SqExpKernel(math.exp(best_theta[0]), tuple(np.exp(best_theta[1:])))


def _refine_coordinatewise(
    objective, theta0: np.ndarray, f0: float, tol: float = 1e-3, max_cycles: int = 8
):
    window = math.log(100.0)
    theta = theta0.copy()
    best = f0
    for _ in range(max_cycles):
        moved = 0.0
        for i in range(len(theta)):

            def line(v, i=i):
                trial = theta.copy()
                trial[i] = v
                return objective(trial)

            v, fv = _golden_max(line, theta[i] - window, theta[i] + window, tol)
            if fv > best:
                moved = max(moved, abs(v - theta[i]))
                theta[i] = v
                best = fv
        if moved < tol:
            break
    return best, theta


def p_misclass(mean: float, std: float, threshold: float) -> float:
    """Probability of misclassification Phi(-|mean - threshold| / std).

    At zero standard deviation the classification is certain (0) unless the
    mean sits exactly on the threshold, where it is a coin flip (0.5).
    """
    if std < 0:
        raise ValueError("std must be nonnegative")
    dev = abs(mean - threshold)
    if std == 0.0:
        return 0.5 if dev == 0.0 else 0.0
    return float(ndtr(-dev / std))


def _p_misclass_batch(means: np.ndarray, stds: np.ndarray, threshold: float) -> np.ndarray:
    dev = np.abs(means - threshold)
    safe = np.where(stds > 0.0, stds, 1.0)
    z = np.where(stds > 0.0, dev / safe, np.where(dev > 0.0, np.inf, 0.0))
    return ndtr(-z)


def adaptive_select(model: GpcModel, candidates, threshold: float) -> int:
    """Index of the candidate with the highest misclassification probability.

    Ties break to the lowest index, so the reduction is order-independent.
    """
    cand = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    if cand.shape[0] == 0:
        raise ValueError("candidate list must be nonempty")
    means, variances = posterior(model, cand)
    scores = _p_misclass_batch(means, np.sqrt(variances), threshold)
    return int(np.argmax(scores))


@dataclass(frozen=True)
class GpcReachEstimate:
    """A fitted classifier with its decision threshold.

    ``constant_label`` is set when training never saw both classes; the
    estimate then classifies the whole region as that single class.
    """

    model: GpcModel
    threshold: float
    constant_label: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie strictly between the labels")

    @property
    def degenerate(self) -> bool:
        return self.constant_label is not None


def classify(estimate: GpcReachEstimate, x):
    """Predicted in-set membership: posterior mean >= threshold.

    Accepts a single point or a (q, n) batch; returns bool or a bool array.
    """
    if estimate.degenerate:
        verdict = estimate.constant_label >= estimate.threshold
        if np.asarray(x).ndim == 1:
            return verdict
        return np.full(np.atleast_2d(x).shape[0], verdict)
    mean, _ = posterior(estimate.model, x)
    if np.isscalar(mean):
        return mean >= estimate.threshold
    return mean >= estimate.threshold


def _checked_label(value) -> float:
    label = float(value)
    if label not in (0.0, 1.0):
        raise ValueError(f"label function must return 0 or 1, got {value!r}")
    return label


def _fallback_kernel(X: np.ndarray) -> SqExpKernel:
    spans = X.max(axis=0) - X.min(axis=0)
    spans[spans == 0.0] = 1.0
    return SqExpKernel(1.0, tuple(1.0 / spans**2))


MAX_BALANCE_DRAWS = 50


def run_adaptive_gpc(
    label_fn: Callable[[np.ndarray], float],
    region: Box,
    budget: int,
    pool_size: int,
    threshold: float = 0.5,
    regularization: float = 1e-6,
    rng: RngStream = RngStream(0),
    refit_every: int = 10,
) -> GpcReachEstimate:
    """Adaptive reachable-set estimation over a Latin hypercube candidate pool.

    Three pool members are labeled at random to seed the model (drawing up
    to MAX_BALANCE_DRAWS extras if one class is missing); the remaining
    budget is spent labeling, one at a time, the unlabeled candidate with
    the highest probability of misclassification.  Kernel hyperparameters
    are refit at loop start and after every ``refit_every`` new labels.
    """
    if budget < 4:
        raise ValueError("budget must be >= 4")
    if pool_size < budget:
        raise ValueError("pool_size must be >= budget")
    pool = lhs_sample(region, pool_size, rng.child(0))
    gen = rng.child(1).generator()

    labeled: dict[int, float] = {}
    for idx in gen.choice(pool_size, size=3, replace=False):
        labeled[int(idx)] = _checked_label(label_fn(pool[idx]))

    extras = 0
    while len(set(labeled.values())) < 2 and extras < MAX_BALANCE_DRAWS:
        remaining = [i for i in range(pool_size) if i not in labeled]
        if not remaining:
            break
        idx = int(gen.choice(len(remaining)))
        labeled[remaining[idx]] = _checked_label(label_fn(pool[remaining[idx]]))
        extras += 1

    def current_samples():
        return [LabeledSample(pool[i], lab) for i, lab in labeled.items()]

    if len(set(labeled.values())) < 2:
        model = fit(current_samples(), _fallback_kernel(pool), regularization)
        return GpcReachEstimate(
            model, threshold, constant_label=next(iter(labeled.values()))
        )

    kernel = fit_hyperparameters(current_samples(), region.dimension, regularization)
    last_refit = len(labeled)
    for _ in range(budget - 3):
        unlabeled = [i for i in range(pool_size) if i not in labeled]
        if not unlabeled:
            break
        if len(labeled) - last_refit >= refit_every:
            kernel = fit_hyperparameters(current_samples(), region.dimension, regularization)
            last_refit = len(labeled)
        model = fit(current_samples(), kernel, regularization)
        winner = unlabeled[adaptive_select(model, pool[unlabeled], threshold)]
        labeled[winner] = _checked_label(label_fn(pool[winner]))
    model = fit(current_samples(), kernel, regularization)
    return GpcReachEstimate(model, threshold)


def run_sampled_gpc(
    label_fn: Callable[[np.ndarray], float],
    region: Box,
    count: int,
    design: str = "uniform",
    threshold: float = 0.5,
    regularization: float = 1e-6,
    rng: RngStream = RngStream(0),
) -> GpcReachEstimate:
    """Non-adaptive baseline: label a fixed uniform or Latin hypercube design."""
    from .core import uniform_sample

    if count < 1:
        raise ValueError("count must be >= 1")
    if design == "uniform":
        points = uniform_sample(region, count, rng.child(0))
    elif design == "lhs":
        points = lhs_sample(region, count, rng.child(0))
    else:
        raise ValueError(f"unknown design {design!r}")
    samples = [LabeledSample(p, _checked_label(label_fn(p))) for p in points]
    labels = {s.label for s in samples}
    if len(labels) < 2:
        model = fit(samples, _fallback_kernel(points), regularization)
        return GpcReachEstimate(model, threshold, constant_label=labels.pop())
    kernel = fit_hyperparameters(samples, region.dimension, regularization)
    model = fit(samples, kernel, regularization)
    return GpcReachEstimate(model, threshold)
