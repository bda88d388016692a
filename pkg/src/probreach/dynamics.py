"""Fixed-step RK4 integration with event detection, plus benchmark systems.

The braking model used throughout is two point-mass cars decelerating under
brakes and quadratic drag; the gap between them is the event function whose
zero crossing marks a collision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import as_state

__all__ = [
    "AccSystem",
    "DynamicalSystem",
    "IntegrationError",
    "Trajectory",
    "acc_collides",
    "acc_collision_grid",
    "acc_rhs",
    "acc_system",
    "augment_parameters",
    "integrate",
    "integrate_batch",
    "simulate_acc_braking",
]

EVENT_TIME_TOL = 1e-10


class IntegrationError(RuntimeError):
    """Raised when a trajectory leaves the finite numeric range."""

    def __init__(self, time: float, initial_state=None):
        msg = f"trajectory became non-finite at t={time}"
        if initial_state is not None:
            msg += f" (initial state {np.asarray(initial_state)})"
        super().__init__(msg)
        self.time = time
        self.initial_state = initial_state


@dataclass(frozen=True)
class DynamicalSystem:
    """An ODE right-hand side with an optional scalar event function.

    ``rhs(state, t)`` returns the state derivative.  When ``vectorized`` is
    set, ``rhs`` must also accept an (m, n) batch of states and return the
    (m, n) batch of derivatives; all built-in systems support this.
    ``event_fn(state, t)`` is scalar; a zero crossing marks the event.
    """

    dimension: int
    rhs: Callable[[np.ndarray, float], np.ndarray]
    event_fn: Optional[Callable[[np.ndarray, float], float]] = None
    vectorized: bool = False


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    event_time: Optional[float] = None
    event_state: Optional[np.ndarray] = None


def _rk4_step(rhs, x, t, dt):
    k1 = rhs(x, t)
    k2 = rhs(x + (0.5 * dt) * k1, t + 0.5 * dt)
    k3 = rhs(x + (0.5 * dt) * k2, t + 0.5 * dt)
    k4 = rhs(x + dt * k3, t + dt)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _locate_event(rhs, event_fn, x_a, t_a, t_b, f_a):
    """Bisect the crossing time inside (t_a, t_b], re-integrating the sub-step."""

    def state_at(t):
        return _rk4_step(rhs, x_a, t_a, t - t_a)

    lo, hi = t_a, t_b
    sign_a = np.sign(f_a)
    while hi - lo > EVENT_TIME_TOL:
        mid = 0.5 * (lo + hi)
        if np.sign(event_fn(state_at(mid), mid)) == sign_a:
            lo = mid
        else:
            hi = mid
    x_e = state_at(hi)
    return hi, x_e


def integrate(
    system: DynamicalSystem,
    x0,
    t0: float,
    t1: float,
    step: float = 1e-3,
) -> Trajectory:
    """Integrate with classical RK4 at fixed ``step`` (final step shortened).

    If the system has an event function and its sign changes across a step
    (or a step lands exactly on zero), the crossing is localized by bisection
    to 1e-10 in time and the trajectory is truncated there.  An exact zero at
    the initial state is not an event; the trajectory must leave the surface.
    """
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    if step <= 0:
        raise ValueError("step must be positive")
    x = as_state(x0)
    if x.shape[0] != system.dimension:
        raise ValueError(
            f"initial state dimension {x.shape[0]} != system dimension {system.dimension}"
        )

    def rhs(state, t):
        return np.asarray(system.rhs(state, t), dtype=np.float64)

    d0 = rhs(x, t0)
    if d0.shape != x.shape:
        raise ValueError(f"rhs output shape {d0.shape} != state shape {x.shape}")

    times = [t0]
    states = [x]
    event_fn = system.event_fn
    f_prev = event_fn(x, t0) if event_fn is not None else None
    event_time = None
    event_state = None

    n_full = int(np.floor((t1 - t0) / step + 1e-12))
    grid = [t0 + i * step for i in range(1, n_full + 1)]
    if not grid or grid[-1] < t1:
        grid.append(t1)
    if grid and grid[-1] > t1:
        grid[-1] = t1

    t_prev = t0
    for t_next in grid:
        if t_next <= t_prev:
            continue
        x_prev = states[-1]
        x_next = _rk4_step(rhs, x_prev, t_prev, t_next - t_prev)
        if not np.all(np.isfinite(x_next)):
            raise IntegrationError(t_next)
        if event_fn is not None:
            f_next = event_fn(x_next, t_next)
            crossed = f_prev != 0.0 and (
                (f_prev > 0.0 > f_next) or (f_prev < 0.0 < f_next)
            )
            if crossed:
                event_time, event_state = _locate_event(
                    rhs, event_fn, x_prev, t_prev, t_next, f_prev
                )
                times.append(event_time)
                states.append(event_state)
                break
            if f_next == 0.0 and f_prev != 0.0:
                event_time, event_state = t_next, x_next
                times.append(t_next)
                states.append(x_next)
                break
            f_prev = f_next
        times.append(t_next)
        states.append(x_next)
        t_prev = t_next

    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        event_time=event_time,
        event_state=event_state,
    )


def integrate_batch(
    system: DynamicalSystem,
    x0s,
    t0: float,
    t1: float,
    step: float = 1e-3,
) -> np.ndarray:
    """Final states of many trajectories integrated side by side.

    Uses the vectorized RK4 fast path when the system supports it, otherwise
    falls back to one ``integrate`` call per row.  Event functions are
    ignored: this is the forward-flow map over the full horizon.
    """
    X0 = np.atleast_2d(np.asarray(x0s, dtype=np.float64))
    if X0.shape[1] != system.dimension:
        raise ValueError("initial state dimension mismatch")
    if not system.vectorized:
        flow = DynamicalSystem(system.dimension, system.rhs)
        finals = []
        for row in X0:
            try:
                finals.append(integrate(flow, row, t0, t1, step).states[-1])
            except IntegrationError as exc:
                raise IntegrationError(exc.time, initial_state=row) from None
        return np.asarray(finals)

    def rhs(state, t):
        return np.asarray(system.rhs(state, t), dtype=np.float64)

    X = X0
    n_full = int(np.floor((t1 - t0) / step + 1e-12))
    t_prev = t0
    for i in range(1, n_full + 1):
        t_next = t0 + i * step
        X = _rk4_step(rhs, X, t_prev, t_next - t_prev)
        t_prev = t_next
    if t_prev < t1:
        X = _rk4_step(rhs, X, t_prev, t1 - t_prev)
    bad = ~np.all(np.isfinite(X), axis=1)
    if np.any(bad):
        raise IntegrationError(t1, initial_state=X0[int(np.argmax(bad))])
    return X


def augment_parameters(system: DynamicalSystem, param_count: int) -> DynamicalSystem:
    """Append ``param_count`` constant-dynamics coordinates to the state.

    The base rhs reads the trailing ``param_count`` coordinates as parameters
    and returns derivatives for the leading coordinates only; the augmented
    system pins the parameter coordinates with a zero derivative, so they are
    bit-stable along any trajectory.
    """
    if param_count < 0:
        raise ValueError("param_count must be >= 0")
    if param_count == 0:
        return system
    base_rhs = system.rhs

    def rhs(state, t):
        dx = np.asarray(base_rhs(state, t), dtype=np.float64)
        pad = np.zeros(np.shape(state)[:-1] + (param_count,))
        return np.concatenate([dx, pad], axis=-1)

    return DynamicalSystem(
        dimension=system.dimension + param_count,
        rhs=rhs,
        event_fn=system.event_fn,
        vectorized=system.vectorized,
    )


@dataclass(frozen=True)
class AccSystem:
    """Braking-car parameters: deceleration ``a`` (m/s^2) and drag ``b`` (1/m)."""

    a: float = 4.9
    b: float = 1.0

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("a and b must be positive")


def acc_rhs(state, params: AccSystem) -> np.ndarray:
    """Derivative of (gap, leader velocity, follower velocity).

    A stopped car stays stopped: once a velocity is <= 0 its derivative is 0,
    and the gap rate uses velocities clamped at zero so a frozen car cannot
    leak drift into the gap.  Accepts a single state or an (m, 3) batch.
    """
    s = np.asarray(state, dtype=np.float64)
    vl_raw = s[..., 1]
    vf_raw = s[..., 2]
    vl = np.maximum(vl_raw, 0.0)
    vf = np.maximum(vf_raw, 0.0)
    dvl = np.where(vl_raw > 0.0, -params.a - params.b * vl * vl, 0.0)
    dvf = np.where(vf_raw > 0.0, -params.a - params.b * vf * vf, 0.0)
    return np.stack([vl - vf, dvl, dvf], axis=-1)


def acc_system(params: AccSystem = AccSystem()) -> DynamicalSystem:
    """The 3-state braking system with the gap as its event function."""
    return DynamicalSystem(
        dimension=3,
        rhs=lambda x, t: acc_rhs(x, params),
        event_fn=lambda x, t: float(x[0]),
        vectorized=True,
    )


def simulate_acc_braking(
    h0: float,
    vl0: float,
    vf0: float,
    params: AccSystem = AccSystem(),
    step: float = 1e-3,
    t_max: float = 100.0,
    v_stop: float = 1e-9,
) -> Trajectory:
    """Run the braking scenario until collision or until both cars stop.

    Integrates in short chunks, checking after each whether the collision
    event fired or both velocities dropped below ``v_stop``; capped at
    ``t_max`` as a safety net.
    """
    system = acc_system(params)
    x = as_state([h0, vl0, vf0])
    t = 0.0
    chunk = 0.5
    times = [np.asarray([0.0])]
    states = [x[None, :]]
    event_time = None
    event_state = None
    while t < t_max:
        seg = integrate(system, x, t, min(t + chunk, t_max), step)
        times.append(seg.times[1:])
        states.append(seg.states[1:])
        if seg.event_time is not None:
            event_time, event_state = seg.event_time, seg.event_state
            break
        x = seg.states[-1]
        t = float(seg.times[-1])
        if x[1] <= v_stop and x[2] <= v_stop:
            break
    return Trajectory(
        times=np.concatenate(times),
        states=np.concatenate(states),
        event_time=event_time,
        event_state=event_state,
    )


def acc_collides(
    h0: float,
    vl0: float,
    vf0: float,
    params: AccSystem = AccSystem(),
    step: float = 1e-3,
) -> bool:
    """Collision verdict from the event-detecting simulation.

    A run counts as a collision when the gap event fires or the gap is
    negative once both cars have stopped (covers a gap that starts at zero
    and immediately closes).
    """
    traj = simulate_acc_braking(h0, vl0, vf0, params, step=step)
    return traj.event_time is not None or traj.states[-1, 0] < 0.0


def acc_collision_grid(
    states,
    params: AccSystem = AccSystem(),
    step: float = 1e-3,
    t_max: float = 100.0,
    v_stop: float = 1e-9,
) -> np.ndarray:
    """Batch collision verdicts for (m, 3) initial states.

    Same clamped dynamics as ``acc_collides`` run side by side; a point
    collides when its sampled gap ever goes negative.
    """
    X = np.atleast_2d(np.asarray(states, dtype=np.float64)).copy()
    h_min = X[:, 0].copy()

    def rhs(x, t):
        return acc_rhs(x, params)

    t = 0.0
    while t < t_max:
        dt = min(step, t_max - t)
        X = _rk4_step(rhs, X, t, dt)
        t += dt
        np.minimum(h_min, X[:, 0], out=h_min)
        if np.all((X[:, 1] <= v_stop) & (X[:, 2] <= v_stop)):
            break
    return h_min < 0.0
