import math

import numpy as np
import pytest

from qdeletion import constraints, optimizer
from qdeletion.constraints import ConstraintProfile
from qdeletion.machine import MachineParams
from qdeletion.optimizer import OptimizerConfig

ACCEPTANCE_LINES = []


def random_params(rng, scale=1.0):
    """Valid params: Pauli block uniform in [-scale, scale], unit amplitude blocks."""
    x = np.empty(21)
    x[:5] = rng.uniform(-scale, scale, 5)
    for lo in (5, 9, 13, 17):
        g = rng.standard_normal(4)
        x[lo : lo + 4] = g / np.linalg.norm(g)
    return MachineParams.from_vector(x)


def interior_points(rng, n, margin=1e-3):
    """Random params kept at least ``margin`` away from every hinge and the s = 0 kink."""
    out = []
    while len(out) < n:
        p = random_params(rng, scale=0.999)
        lam = constraints.positivity_spectrum(p)
        s = math.sqrt((p.eta1 - p.eta2) ** 2 + 4 * (p.tzy**2 + p.tzz**2))
        if min(abs(v) for v in lam) > margin and s > margin:
            # leave the amplitude blocks slightly off the sphere so normalization is exercised
            x = p.to_vector()
            x[5:] *= rng.uniform(0.9, 1.0)
            out.append(MachineParams.from_vector(x))
    return out


def fd_gradient(params, config, mu, h=1e-6):
    x = params.to_vector()
    g = np.empty_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        hi = optimizer.penalty_objective(MachineParams.from_vector(x + e), config, mu)[0]
        lo = optimizer.penalty_objective(MachineParams.from_vector(x - e), config, mu)[0]
        g[k] = (hi - lo) / (2 * h)
    return g


def gradient_errors(seed=8, n=200, mu=10.0):
    rng = np.random.default_rng(seed)
    errors = []
    for k, params in enumerate(interior_points(rng, n)):
        cfg = OptimizerConfig(profile=(ConstraintProfile.STRICT, ConstraintProfile.RELAXED, ConstraintProfile.MATRIX)[k % 3])
        _, g = optimizer.penalty_objective(params, cfg, mu)
        fd = fd_gradient(params, cfg, mu)
        errors.append(np.max(np.abs(g - fd)) / max(np.max(np.abs(fd)), 1.0))
    return np.array(errors)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture
def optimum():
    return MachineParams.optimum()


@pytest.fixture
def corrupted_optimum():
    # phi' moved from |00> to |01>
    return MachineParams.optimum().replace(p=(1, 0, 0, 0, 0, 1, 0, 0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
