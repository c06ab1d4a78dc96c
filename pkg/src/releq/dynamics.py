"""Equations of motion, conserved-quantity diagnostics, and direct ODE
verification that a candidate configuration really rotates rigidly.

The force on body i is sum_{j!=i} m_j (q_j - q_i) |q_j - q_i|^(2a). The
integrator is an adaptive Dormand-Prince 5(4) pair with PI step control;
it aborts cleanly with a SingularityError when bodies approach collision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import SingularityError
from .model import (
    check_problem_config,
    collision_threshold,
    rotation_generator,
    rotation_matrix,
)

# Integrations abort when the minimum separation drops below this fraction
# of the configuration scale; r^(2a) overflows quickly past it.
GUARD_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Positions, velocities and time of the n bodies."""

    positions: np.ndarray
    velocities: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        vel = np.array(self.velocities, dtype=float)
        if pos.ndim != 2 or pos.shape != vel.shape:
            raise ValueError("positions and velocities must share an (n, k) shape")
        min_dist = _kernels.min_pair_distance(_kernels.as_input(pos))
        if not min_dist > collision_threshold(pos):
            raise ValueError(
                f"colliding state: min pairwise distance {min_dist:.3e}"
            )
        pos.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)
        object.__setattr__(self, "time", float(self.time))


@dataclass(frozen=True, eq=False)
class ConservedQuantities:
    """Energy, linear momentum and the antisymmetric angular momentum matrix."""

    energy: float
    linear_momentum: np.ndarray
    angular_momentum: np.ndarray


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution: times (s,), positions and velocities (s, n, k)."""

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray

    def __len__(self):
        return self.times.size

    def state(self, idx):
        return PhaseState(self.positions[idx], self.velocities[idx], self.times[idx])


def _guard_positions(positions, problem):
    pos = _kernels.as_input(positions)
    if pos.shape != (problem.n, problem.k):
        raise ValueError(
            f"positions shape {pos.shape} does not match problem "
            f"(n={problem.n}, k={problem.k})"
        )
    scale = max(1.0, float(np.sqrt(np.sum(pos ** 2, axis=1)).max()))
    if _kernels.min_pair_distance(pos) < GUARD_RTOL * scale:
        raise SingularityError("bodies too close: force evaluation aborted")
    return pos


def acceleration(positions, problem):
    """Acceleration of every body, shape (n, k)."""
    pos = _guard_positions(positions, problem)
    return _kernels.accel(pos, problem.masses, problem.a)


def potential_energy(positions, problem):
    """Scalar potential; its negative q_i-gradient is m_i * acceleration_i.

    For a != -1 this is sum_{i<j} m_i m_j r^(2a+2)/(2a+2); the 2a+2 = 0
    case (a = -1) degenerates to sum_{i<j} m_i m_j ln r.
    """
    pos = _guard_positions(positions, problem)
    return _kernels.potential(pos, problem.masses, problem.a)


def conserved_quantities(state, problem):
    """Energy, momentum and angular momentum of a phase state."""
    pos = np.asarray(state.positions, dtype=float)
    vel = np.asarray(state.velocities, dtype=float)
    m = problem.masses
    kinetic = 0.5 * float(np.sum(m * np.sum(vel ** 2, axis=1)))
    energy = kinetic + potential_energy(pos, problem)
    momentum = (m[:, None] * vel).sum(axis=0)
    moment = pos.T @ (m[:, None] * vel)
    return ConservedQuantities(energy, momentum, moment - moment.T)


# ----------------------------------------------------------------------
# Dormand-Prince 5(4) embedded pair, FSAL, PI step control
# ----------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0],
])
_DP_B = _DP_A[6]
_DP_E = np.array([
    71 / 57600, 0.0, -71 / 16695, 71 / 1920,
    -17253 / 339200, 22 / 525, -1 / 40,
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_PI_BETA = 0.04
_PI_EXPO = 0.2 - 0.75 * _PI_BETA


def _scaled_err(err_vec, y, y_new, tol):
    sc = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err_vec / sc) ** 2)))


def _initial_step(rhs, t0, y0, f0, tol):
    sc = tol + tol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    try:
        f1 = rhs(y0 + h0 * f0)
    except SingularityError:
        return h0
    d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1)


def integrate(initial, problem, t_end, tol, sample_times=None):
    """Integrate the equations of motion from ``initial`` up to ``t_end``.

    Parameters
    ----------
    initial : PhaseState
        Collision-free starting state.
    problem : Problem
        Masses and force exponent (frequencies are not used here).
    t_end : float
        Final time, strictly greater than ``initial.time``.
    tol : float
        Per-step local error tolerance, in [1e-13, 1e-3]; used for both
        the absolute and relative parts of the error norm.
    sample_times : array_like, optional
        Strictly increasing times in [initial.time, t_end] at which to
        record the state. Defaults to 65 uniform samples including both
        endpoints.

    Returns
    -------
    Trajectory

    Raises
    ------
    SingularityError
        On near-collision or step-size underflow; carries the failure time.
    """
    if not 1e-13 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-13, 1e-3], got {tol}")
    t0 = initial.time
    t_end = float(t_end)
    if not t_end > t0:
        raise ValueError("t_end must exceed the initial time")
    if sample_times is None:
        sample_times = np.linspace(t0, t_end, 65)
    samples = np.asarray(sample_times, dtype=float)
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("sample_times must be a nonempty 1-d array")
    if np.any(np.diff(samples) <= 0.0):
        raise ValueError("sample_times must be strictly increasing")
    if samples[0] < t0 or samples[-1] > t_end + 1e-12 * max(1.0, abs(t_end)):
        raise ValueError("sample_times must lie within [initial.time, t_end]")

    n, k = problem.n, problem.k
    if initial.positions.shape != (n, k):
        raise ValueError("initial state does not match the problem shape")
    m = problem.masses
    a = problem.a
    nk = n * k

    def rhs(y):
        pos = y[:nk].reshape(n, k)
        acc = _kernels.accel(_kernels.as_input(pos), m, a)
        out = np.empty(2 * nk)
        out[:nk] = y[nk:]
        out[nk:] = acc.ravel()
        return out

    def guard(y, t):
        pos = y[:nk].reshape(n, k)
        scale = max(1.0, float(np.sqrt(np.sum(pos ** 2, axis=1)).max()))
        if _kernels.min_pair_distance(_kernels.as_input(pos)) < GUARD_RTOL * scale:
            raise SingularityError(
                f"near-collision at t={t:.6g}: integration aborted", time=t
            )

    y = np.concatenate([initial.positions.ravel(), initial.velocities.ravel()])
    t = t0
    guard(y, t)
    f = rhs(y)
    h = min(_initial_step(rhs, t0, y, f, tol), t_end - t0)
    err_old = 1e-4

    out_pos = np.empty((samples.size, n, k))
    out_vel = np.empty((samples.size, n, k))
    stages = np.empty((7, 2 * nk))

    for s_idx, target in enumerate(samples):
        while t < target:
            guard(y, t)
            h_step = min(h, target - t)
            if h_step < 1e-14 * max(1.0, abs(t)):
                raise SingularityError(
                    f"step size underflow at t={t:.6g}", time=t
                )
            stages[0] = f
            try:
                for s in range(1, 7):
                    y_s = y + h_step * (stages[:s].T @ _DP_A[s, :s])
                    stages[s] = rhs(y_s)
                y_new = y + h_step * (stages.T @ _DP_B)
                err_vec = h_step * (stages.T @ _DP_E)
                err = _scaled_err(err_vec, y, y_new, tol)
            except (SingularityError, FloatingPointError):
                err = np.inf
            if not np.isfinite(err):
                h = 0.1 * h_step
                continue
            if err <= 1.0:
                t = t + h_step
                y = y_new
                f = stages[6]  # FSAL: last stage is rhs at the new state
                fac = _SAFETY * err ** -_PI_EXPO * err_old ** _PI_BETA \
                    if err > 0.0 else _MAX_FACTOR
                h = h_step * min(_MAX_FACTOR, max(_MIN_FACTOR, fac))
                err_old = max(err, 1e-4)
                if target - t < 1e-14 * max(1.0, abs(target)):
                    t = target
            else:
                h = h_step * max(_MIN_FACTOR, _SAFETY * err ** -_PI_EXPO)
        out_pos[s_idx] = y[:nk].reshape(n, k)
        out_vel[s_idx] = y[nk:].reshape(n, k)

    return Trajectory(samples.copy(), out_pos, out_vel)


def relative_equilibrium_deviation(config, problem, t_end, samples=32, tol=1e-10):
    """Max gap between the integrated motion and rigid rotation of ``config``.

    Starts from q_i(0) = Q_i with the rigid-rotation velocities G Q_i and
    returns max over sample times and bodies of |q_i(t) - T(t) Q_i|.
    """
    check_problem_config(problem, config)
    gen = rotation_generator(problem.frequencies, problem.k)
    velocities = config.points @ gen.T
    state = PhaseState(config.points, velocities, 0.0)
    times = np.linspace(0.0, float(t_end), int(samples) + 1)
    traj = integrate(state, problem, t_end, tol, sample_times=times)
    worst = 0.0
    for idx, t in enumerate(traj.times):
        rot = rotation_matrix(problem.frequencies, t, problem.k)
        gap = traj.positions[idx] - config.points @ rot.T
        worst = max(worst, float(np.sqrt(np.sum(gap ** 2, axis=1)).max()))
    return worst


def rigid_rotation_state(config, problem):
    """Initial phase state whose exact solution would be rigid rotation."""
    check_problem_config(problem, config)
    gen = rotation_generator(problem.frequencies, problem.k)
    return PhaseState(config.points, config.points @ gen.T, 0.0)


def trajectory_csv(trajectory):
    """CSV export: one row per (sample, body) with positions and velocities."""
    s, n, k = trajectory.positions.shape
    header = ["t", "body"] + [f"q{c}" for c in range(k)] + [f"v{c}" for c in range(k)]
    lines = [",".join(header)]
    for idx in range(s):
        t = trajectory.times[idx]
        for body in range(n):
            row = [repr(float(t)), str(body)]
            row += [repr(float(x)) for x in trajectory.positions[idx, body]]
            row += [repr(float(x)) for x in trajectory.velocities[idx, body]]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"
