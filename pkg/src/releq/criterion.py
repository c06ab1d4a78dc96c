"""Algebraic balance test for rigidly rotating configurations.

A configuration Q rotates rigidly at the problem's rates exactly when the
per-body defect

    F_i = Asq Q_i - sum_{j!=i} m_j (Q_i - Q_j) |Q_i - Q_j|^(2a)

vanishes (Asq is the squared diagonal rate matrix). This module evaluates
the defect, its exact dense derivative, the cluster-sum identity that the
lower-bound argument rests on, and the weighted-centroid consequence of
summing the defect over all bodies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import SingularityError
from .model import check_problem_config, collision_threshold


@dataclass(frozen=True, eq=False)
class ResidualReport:
    """Per-body defect vectors with aggregate norms.

    max_norm is the largest per-body Euclidean norm; rms is the root mean
    square over all n*k stacked entries.
    """

    per_body: np.ndarray
    max_norm: float
    rms: float

    def to_dict(self):
        return {
            "per_body": self.per_body.tolist(),
            "max_norm": self.max_norm,
            "rms": self.rms,
        }


@dataclass(frozen=True, eq=False)
class ClusterDiagnostics:
    """Both sides of the cluster identity for the first l bodies."""

    l: int
    lhs: np.ndarray
    rhs: np.ndarray
    gap: float

    def to_dict(self):
        return {
            "l": self.l,
            "lhs": self.lhs.tolist(),
            "rhs": self.rhs.tolist(),
            "gap": self.gap,
        }


def _checked_points(config, problem):
    check_problem_config(problem, config)
    pos = _kernels.as_input(config.points)
    if not _kernels.min_pair_distance(pos) > collision_threshold(pos):
        raise SingularityError("colliding configuration")
    return pos


def residual(config, problem):
    """Evaluate the balance defect; zero iff ``config`` is an equilibrium."""
    pos = _checked_points(config, problem)
    per_body = _kernels.residual_stack(pos, problem.masses, problem.asq, problem.a)
    norms = np.sqrt(np.sum(per_body ** 2, axis=1))
    rms = float(np.sqrt(np.mean(per_body ** 2)))
    return ResidualReport(per_body, float(norms.max()), rms)


def residual_scale(config, problem):
    """Magnitude reference for 'zero' tests on the defect.

    max(1, largest point norm, largest single term entering any F_i); the
    force terms span many orders of magnitude once a < -1/2.
    """
    pos = _checked_points(config, problem)
    norms = np.sqrt(np.sum(pos ** 2, axis=1))
    dist = _kernels.pair_distances(pos)
    iu = np.triu_indices(problem.n, 1)
    r = dist[iu]
    # per-pair force magnitude m_j * r^(2a+1), larger mass of each pair
    force_terms = np.maximum(problem.masses[iu[0]], problem.masses[iu[1]]) * r ** (
        2.0 * problem.a + 1.0
    )
    rot_terms = np.abs(pos * problem.asq[None, :]).sum(axis=1)
    return float(max(1.0, norms.max(), force_terms.max(), rot_terms.max()))


def jacobian(config, problem):
    """Dense derivative of the stacked defect, shape (n*k, n*k).

    Off-diagonal block (i, j) is m_j (r^(2a) I + 2a r^(2a-2) u u^T) with
    u = Q_i - Q_j; the diagonal block is Asq minus the sum of the other
    blocks in its row. Matches central finite differences of ``residual``.
    """
    pos = _checked_points(config, problem)
    return _kernels.jacobian_dense(pos, problem.masses, problem.asq, problem.a)


def cluster_sum(config, problem, body, cluster):
    """Force contribution on ``body`` from bodies outside the first ``cluster``.

    Bodies are numbered 1..n here to match the cluster being the first
    ``cluster`` of them; the empty sum (cluster = n) is the zero vector.
    The self term j == body is always excluded.
    """
    pos = _checked_points(config, problem)
    n = problem.n
    body = int(body)
    cluster = int(cluster)
    if not 1 <= body <= n:
        raise IndexError(f"body index must be in 1..{n}, got {body}")
    if not 2 <= cluster <= n:
        raise IndexError(f"cluster size must be in 2..{n}, got {cluster}")
    out = np.zeros(problem.k)
    qi = pos[body - 1]
    for j in range(cluster, n):
        if j == body - 1:
            continue
        u = qi - pos[j]
        out += problem.masses[j] * u * float(u @ u) ** problem.a
    return out


def lemma_identity_gap(config, problem, cluster):
    """Evaluate both sides of the cluster identity for the first ``cluster`` bodies.

    The identity is an exact consequence of the balance equations, so the
    gap vanishes at equilibria; away from them it equals the norm of
    sum_{i=2}^{l} m_i (F_1 - F_i).
    """
    pos = _checked_points(config, problem)
    n = problem.n
    cluster = int(cluster)
    if not 2 <= cluster <= n:
        raise IndexError(f"cluster size must be in 2..{n}, got {cluster}")
    m = problem.masses
    asq = problem.asq
    a = problem.a
    q1 = pos[0]

    lhs = asq * sum(m[i] * (q1 - pos[i]) for i in range(1, cluster))

    inner = np.zeros(problem.k)
    for j in range(1, cluster):
        u = q1 - pos[j]
        inner += m[j] * u * float(u @ u) ** a
    r_1l = cluster_sum(config, problem, 1, cluster)
    tail = np.zeros(problem.k)
    for i in range(1, cluster):
        r_il = cluster_sum(config, problem, i + 1, cluster)
        tail += m[i] * (r_1l - r_il)
    rhs = float(m[:cluster].sum()) * inner + tail

    return ClusterDiagnostics(cluster, lhs, rhs, float(np.linalg.norm(lhs - rhs)))


def weighted_centroid_residual(config, problem):
    """Asq applied to the mass-weighted centroid sum; zero at any equilibrium.

    Summing the balance equations over i cancels the pairwise forces, so
    Asq sum_i m_i Q_i must vanish; for even k this pins the mass-weighted
    centroid at the origin, while an odd k leaves the trailing axis free.
    """
    check_problem_config(problem, config)
    weighted = (problem.masses[:, None] * config.points).sum(axis=0)
    return problem.asq * weighted


def lemma_gap_bound(problem):
    """Linear-combination bound: gap <= C_L * max_norm at small residuals."""
    return problem.n * (1.0 + float(problem.masses.sum()))
