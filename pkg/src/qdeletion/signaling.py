"""
Operational no-signaling check.

Alice shares two maximally entangled pairs with Bob and measures both of
her halves in the z or the x basis. Bob's qubits collapse to one of four
product states with equal weight and are fed to the deletion machine. If
Bob's two averaged outputs differ, the Helstrom measurement reveals Alice's
basis with probability ``1/2 + D/2``, D being their trace distance.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import qop
from .errors import TrialsOverflow
from .machine import MachineParams, output_states

MAX_TRIALS = 2**63 - 1
CHUNK = 1 << 16
TIE_TOL = 1e-12  # eigenvalues this close to zero count as ties


@dataclass(frozen=True)
class EnsemblePair:
    rho_z: np.ndarray
    rho_x: np.ndarray

    @property
    def trace_distance(self) -> float:
        return qop.trace_distance(self.rho_z, self.rho_x)


@dataclass(frozen=True)
class GameStats:
    trials: int
    successes: int
    empirical_rate: float
    analytic_rate: float
    z_score: float

    @property
    def sigma(self) -> float:
        """Binomial standard error of the empirical rate at the analytic rate."""
        a = self.analytic_rate
        return math.sqrt(a * (1.0 - a) / self.trials)


def bob_ensembles(params: MachineParams) -> EnsemblePair:
    params.check()
    states = output_states(params)
    return EnsemblePair(sum(states["z"]) / 4.0, sum(states["x"]) / 4.0)


def helstrom_projector(pair: EnsemblePair) -> np.ndarray:
    """Projector onto the non-negative eigenspace of rho_z - rho_x (zero modes included)."""
    values, vectors = qop.eigh_hermitian(pair.rho_z - pair.rho_x)
    keep = vectors[:, values >= -TIE_TOL]
    return keep @ keep.conj().T


def helstrom_success(params: MachineParams) -> float:
    return 0.5 + 0.5 * bob_ensembles(params).trace_distance


def _plus_probabilities(params: MachineParams) -> np.ndarray:
    """Pr(outcome +) for each of Bob's eight conditional states, shape (2, 4)."""
    proj = helstrom_projector(bob_ensembles(params))
    states = output_states(params)
    probs = np.array([[np.trace(proj @ rho).real for rho in states[b]] for b in ("z", "x")])
    return np.clip(probs, 0.0, 1.0)


def _play_chunk(plus_probs: np.ndarray, seed: int, chunk: int, n: int) -> int:
    rng = np.random.Generator(np.random.PCG64(seed ^ chunk))
    basis = rng.integers(0, 2, n)  # 0 = z, 1 = x
    outcome = rng.integers(0, 4, n)
    plus = rng.random(n) < plus_probs[basis, outcome]
    # Bob guesses z on +
    return int(np.count_nonzero(plus == (basis == 0)))


def simulate_game(params: MachineParams, trials: int, seed: int, workers: int = 1) -> GameStats:
    """
    Monte Carlo of the signaling game.

    Trials are cut into fixed chunks of 65536, chunk ``k`` drawing from
    PCG64(seed ^ k), so the count does not depend on ``workers``.
    """
    if trials > MAX_TRIALS:
        raise TrialsOverflow(f"trials {trials} exceed the 64-bit counter")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    params.check()
    probs = _plus_probabilities(params)
    analytic = helstrom_success(params)

    sizes = [CHUNK] * (trials // CHUNK)
    if trials % CHUNK:
        sizes.append(trials % CHUNK)
    if workers > 1 and len(sizes) > 1:
        with ProcessPoolExecutor(workers) as pool:
            counts = list(pool.map(_play_chunk, [probs] * len(sizes), [seed] * len(sizes), range(len(sizes)), sizes))
    else:
        counts = [_play_chunk(probs, seed, k, n) for k, n in enumerate(sizes)]
    successes = sum(counts)

    rate = successes / trials
    var = analytic * (1.0 - analytic) / trials
    if var > 0:
        z = (rate - analytic) / math.sqrt(var)
    else:
        z = 0.0 if rate == analytic else math.copysign(math.inf, rate - analytic)
    return GameStats(trials, successes, rate, analytic, z)
