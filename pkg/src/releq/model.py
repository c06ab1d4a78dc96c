"""Domain types and the block-rotation machinery of the rotating frame.

A configuration of n point masses in R^k rotates rigidly when it is spun by
a block-diagonal matrix of independent 2-plane rotations, one rate per
plane, with a fixed axis left over when k is odd. This module holds the
immutable problem description (dimension, masses, rates, force exponent),
candidate configurations, and the rotation/generator/rate-matrix
constructions everything else is built on. All operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

# Configurations are rejected as colliding below this relative separation.
COLLISION_RTOL = 1e-12


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def collision_threshold(points):
    """Minimum admissible pairwise separation for a set of points."""
    norms = np.sqrt(np.sum(np.asarray(points, dtype=float) ** 2, axis=1))
    return COLLISION_RTOL * (1.0 + float(norms.max(initial=0.0)))


@dataclass(frozen=True)
class Exponent:
    """Force-law exponent a: the pair force scales as r^(2a+1), a < -1/2.

    a = -3/2 gives the Newtonian force.
    """

    a: float

    def __post_init__(self):
        a = float(self.a)
        if not a < -0.5:
            raise ValueError(f"exponent must satisfy a < -0.5, got {a}")
        object.__setattr__(self, "a", a)


@dataclass(frozen=True, eq=False)
class Problem:
    """Immutable description of one rotating n-body problem.

    Parameters
    ----------
    k : int
        Ambient dimension, k >= 2.
    masses : array_like
        n strictly positive masses, n >= 2.
    frequencies : array_like
        floor(k/2) strictly positive rotation rates, one per 2-plane.
    exponent : Exponent or float
        Force-law exponent, a < -1/2.
    """

    k: int
    masses: np.ndarray
    frequencies: np.ndarray
    exponent: Exponent

    def __post_init__(self):
        k = int(self.k)
        if k < 2:
            raise ValueError(f"dimension k must be >= 2, got {k}")
        masses = _frozen_array(self.masses)
        if masses.ndim != 1 or masses.size < 2:
            raise ValueError("masses must be a vector of at least 2 entries")
        if not np.all(masses > 0.0):
            raise ValueError("all masses must be strictly positive")
        freqs = _frozen_array(self.frequencies)
        if freqs.ndim != 1 or freqs.size != k // 2:
            raise ValueError(
                f"expected floor(k/2) = {k // 2} frequencies, got {freqs.size}"
            )
        if not np.all(freqs > 0.0):
            raise ValueError("all frequencies must be strictly positive")
        exponent = self.exponent
        if not isinstance(exponent, Exponent):
            exponent = Exponent(float(exponent))
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "exponent", exponent)

    @property
    def n(self):
        return self.masses.size

    @property
    def p(self):
        return self.k // 2

    @property
    def a(self):
        return self.exponent.a

    def frequency_matrix(self):
        return frequency_matrix(self.frequencies, self.k)

    @property
    def asq(self):
        """Diagonal of the squared rate matrix, shape (k,)."""
        return self.frequency_matrix().diag ** 2

    def with_exponent(self, a):
        return Problem(self.k, self.masses, self.frequencies, Exponent(float(a)))

    def with_frequencies(self, frequencies):
        return Problem(self.k, self.masses, frequencies, self.exponent)


@dataclass(frozen=True, eq=False)
class Configuration:
    """n fixed points in R^k; the rotating shape of a candidate equilibrium.

    Construction rejects configurations with any pair closer than
    COLLISION_RTOL relative to the configuration size.
    """

    points: np.ndarray

    def __post_init__(self):
        points = _frozen_array(self.points)
        if points.ndim != 2 or points.shape[0] < 2:
            raise ValueError("points must be an (n, k) array with n >= 2")
        if not np.all(np.isfinite(points)):
            raise ValueError("points must be finite")
        min_dist = _kernels.min_pair_distance(_kernels.as_input(points))
        if not min_dist > collision_threshold(points):
            raise ValueError(
                f"colliding configuration: min pairwise distance {min_dist:.3e}"
            )
        object.__setattr__(self, "points", points)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def k(self):
        return self.points.shape[1]

    @property
    def min_distance(self):
        return float(_kernels.min_pair_distance(_kernels.as_input(self.points)))

    @property
    def max_norm(self):
        return float(np.sqrt(np.sum(self.points ** 2, axis=1)).max())


@dataclass(frozen=True, eq=False)
class FrequencyMatrix:
    """Diagonal rate matrix: each rate repeated twice, trailing 0 when k is odd."""

    diag: np.ndarray

    def __post_init__(self):
        diag = _frozen_array(self.diag)
        if diag.ndim != 1 or diag.size < 2:
            raise ValueError("diag must be a vector of length k >= 2")
        if not np.all(diag >= 0.0):
            raise ValueError("diagonal entries must be nonnegative")
        k = diag.size
        p = k // 2
        pairs = diag[: 2 * p].reshape(p, 2)
        if not np.all(pairs[:, 0] == pairs[:, 1]):
            raise ValueError("diagonal entries must come in equal consecutive pairs")
        if k % 2 == 1 and diag[-1] != 0.0:
            raise ValueError("odd dimension requires a trailing zero entry")
        if k % 2 == 0 and diag[-1] == 0.0:
            raise ValueError("even dimension admits no trailing zero rate")
        object.__setattr__(self, "diag", diag)

    @property
    def k(self):
        return self.diag.size

    def matrix(self):
        return np.diag(self.diag)


def _check_frequency_dims(frequencies, k):
    freqs = np.asarray(frequencies, dtype=float)
    if int(k) < 2:
        raise ValueError(f"dimension k must be >= 2, got {k}")
    if freqs.ndim != 1 or freqs.size != int(k) // 2:
        raise ValueError(
            f"expected floor(k/2) = {int(k) // 2} frequencies for k={k}, "
            f"got {freqs.size}"
        )
    return freqs, int(k)


def rotation_matrix(frequencies, t, k):
    """Block-diagonal rotation by angle A_l*t in each 2-plane.

    For odd k the trailing axis is fixed (scalar block 1). The result is
    orthogonal with determinant 1.
    """
    freqs, k = _check_frequency_dims(frequencies, k)
    out = np.eye(k)
    for l, w in enumerate(freqs):
        c = np.cos(w * t)
        s = np.sin(w * t)
        out[2 * l, 2 * l] = c
        out[2 * l, 2 * l + 1] = -s
        out[2 * l + 1, 2 * l] = s
        out[2 * l + 1, 2 * l + 1] = c
    return out


def rotation_generator(frequencies, k):
    """Time derivative of the rotation at t=0: blocks A_l*[[0,-1],[1,0]].

    Satisfies G @ G == -diag(asq) where asq is the squared rate diagonal.
    """
    freqs, k = _check_frequency_dims(frequencies, k)
    out = np.zeros((k, k))
    for l, w in enumerate(freqs):
        out[2 * l, 2 * l + 1] = -w
        out[2 * l + 1, 2 * l] = w
    return out


def frequency_matrix(frequencies, k):
    """Diagonal rate matrix (A_1, A_1, ..., A_p, A_p[, 0])."""
    freqs, k = _check_frequency_dims(frequencies, k)
    if not np.all(freqs > 0.0):
        raise ValueError("all frequencies must be strictly positive")
    diag = np.zeros(k)
    diag[: 2 * (k // 2)] = np.repeat(freqs, 2)
    return FrequencyMatrix(diag)


def pairwise_distances(config):
    """Symmetric n x n matrix of pairwise distances, zero diagonal."""
    points = getattr(config, "points", config)
    return _kernels.pair_distances(_kernels.as_input(points))


def check_problem_config(problem, config):
    """Raise if the configuration shape does not match the problem."""
    if config.points.shape != (problem.n, problem.k):
        raise ValueError(
            f"configuration shape {config.points.shape} does not match "
            f"problem (n={problem.n}, k={problem.k})"
        )
