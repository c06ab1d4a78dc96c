import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from releq import (
    Configuration,
    Problem,
    acceleration,
    jacobian,
    pairwise_distances,
    potential_energy,
    residual,
)

import oracles


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Trigger jit compilation once so timed tests measure warm kernels.
    prob = Problem(2, [1.0, 1.0], [1.0], -1.5)
    cfg = Configuration([[0.7, 0.0], [-0.7, 0.0]])
    residual(cfg, prob)
    jacobian(cfg, prob)
    acceleration(cfg.points, prob)
    potential_energy(cfg.points, prob)
    pairwise_distances(cfg)


@pytest.fixture(scope="session")
def two_body():
    prob = Problem(2, [1.0, 1.0], [1.0], -1.5)
    cfg = Configuration(oracles.two_body_points(1.0, 1.0, 1.0, -1.5))
    return prob, cfg


@pytest.fixture(scope="session")
def trigon():
    prob = Problem(2, [1.0, 1.0, 1.0], [1.0], -1.5)
    rho = oracles.ngon_circumradius(3, 1.0, 1.0, -1.5)
    cfg = Configuration(oracles.ngon_points(3, rho))
    return prob, cfg


def random_config(rng, n, k, spread=1.5, min_sep=0.3):
    # rejection-sample a well-separated random configuration
    for _ in range(200):
        pts = rng.normal(size=(n, k)) * spread
        dists = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        np.fill_diagonal(dists, np.inf)
        if dists.min() > min_sep:
            return Configuration(pts)
    raise RuntimeError("could not sample a separated configuration")
