"""
Penalized multi-start maximization of F_p + F_d.

Each restart runs projected ascent with Armijo backtracking on

    1 + (eta1 + eta2)/2 - mu * (|r|^2 + |max(-lambda, 0)|^2 + |n|^2)

through an increasing penalty schedule. Steps follow the gradient scaled by
the Gauss-Newton curvature of the penalty, which keeps the search well
conditioned as mu grows. Here ``r`` are the active no-signaling residuals,
``lambda`` the closed-form output spectrum and ``n`` the amplitude
normalization residuals. A short Gauss-Newton restoration then
removes the O(1/mu) constraint violation a pure penalty leaves behind.

Restart ``i`` draws its start from PCG64 seeded with ``seed ^ i``, so restarts
are independent of execution order and can run in worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import (
    DEFAULT_OPTIMIZE_TOL,
    ETA1,
    ETA2,
    NORMALIZATION_SYSTEM,
    ConstraintProfile,
    ConstraintReport,
    feasibility_report,
    ns_system,
    spectrum_with_gradient,
)
from .errors import InvalidParams, NoFeasiblePoint
from .machine import N_PARAMS, FidelityPair, MachineParams, fidelities

AMPLITUDE_BLOCKS = ((5, 9), (9, 13), (13, 17), (17, 21))
ARMIJO = 1e-4
MIN_STEP = 1e-20


@dataclass(frozen=True)
class FixedFidelity:
    kind: str  # "deletion" or "preservation"
    value: float

    def __post_init__(self):
        if self.kind not in ("deletion", "preservation"):
            raise ValueError(f"fixed fidelity kind must be deletion or preservation, got {self.kind!r}")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"fixed fidelity value {self.value!r} outside [0, 1]")

    @property
    def index(self) -> int:
        return ETA2 if self.kind == "deletion" else ETA1

    @property
    def eta(self) -> float:
        return 2.0 * self.value - 1.0


@dataclass(frozen=True)
class OptimizerConfig:
    profile: ConstraintProfile = ConstraintProfile.STRICT
    restarts: int = 64
    seed: int = 0
    mu0: float = 10.0
    growth: float = 10.0
    stages: int = 5
    max_inner: int = 2000
    step_tol: float = 1e-10
    feas_tol: float = DEFAULT_OPTIMIZE_TOL
    fixed: FixedFidelity | None = None
    restore: bool = True
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "profile", ConstraintProfile.parse(self.profile))
        if self.growth <= 1.0:
            raise ValueError("penalty growth factor must exceed 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.stages < 1 or self.max_inner < 1:
            raise ValueError("stages and max_inner must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.mu0 <= 0 or self.feas_tol <= 0:
            raise ValueError("mu0 and feas_tol must be positive")


@dataclass(frozen=True)
class RestartSummary:
    index: int  # -1 marks a warm start
    objective: float
    feasible: bool
    ns_norm: float


@dataclass(frozen=True)
class OptimizationResult:
    params: MachineParams
    fidelities: FidelityPair
    objective: float
    report: ConstraintReport
    restarts: tuple = field(repr=False)
    converged: bool


@dataclass(frozen=True)
class SweepPoint:
    fixed_kind: str
    fixed_value: float
    max_other: float
    sum: float
    params: MachineParams
    ns_norm: float
    min_eigenvalue: float
    restarts_used: int
    converged: bool


# ---------------------------------------------------------------- objective

_OBJ_GRAD = np.zeros(N_PARAMS)
_OBJ_GRAD[ETA1] = _OBJ_GRAD[ETA2] = 0.5


class _Equalities:
    """NS residuals of one profile stacked with the normalization residuals."""

    def __init__(self, profile):
        parts = [ns_system(profile), NORMALIZATION_SYSTEM]
        self.b = np.concatenate([s.b for s in parts])
        self.A = np.vstack([s.A for s in parts])
        q = np.concatenate([s.Q for s in parts])
        self.m = len(self.b)
        self.Q2 = q.reshape(self.m * N_PARAMS, N_PARAMS)

    def penalty(self, x):
        """Sum of squared residuals and its gradient."""
        qx = (self.Q2 @ x).reshape(self.m, N_PARAMS)
        r = self.b + self.A @ x + qx @ x
        return r @ r, 2.0 * (r @ self.A) + 4.0 * (r @ qx)


_EQUALITIES = {}


def _equalities(profile) -> _Equalities:
    profile = ConstraintProfile.parse(profile)
    if profile not in _EQUALITIES:
        _EQUALITIES[profile] = _Equalities(profile)
    return _EQUALITIES[profile]


def _penalty(x: np.ndarray, eqs: _Equalities, mu: float):
    pen, dpen = eqs.penalty(x)
    eta1, eta2, txx, tzz, tzy = x[0], x[1], x[2], x[3], x[4]
    # hinge on the closed-form spectrum, evaluated with scalars for speed
    l1 = (1.0 + eta1 + eta2 + txx) / 4.0
    l2 = (1.0 - eta1 - eta2 + txx) / 4.0
    d = eta1 - eta2
    s = math.sqrt(d * d + 4.0 * (tzy * tzy + tzz * tzz))
    l3 = (1.0 - txx + s) / 4.0
    l4 = (1.0 - txx - s) / 4.0
    if l1 < 0.0:
        pen += l1 * l1
        dpen[0] += 0.5 * l1
        dpen[1] += 0.5 * l1
        dpen[2] += 0.5 * l1
    if l2 < 0.0:
        pen += l2 * l2
        dpen[0] -= 0.5 * l2
        dpen[1] -= 0.5 * l2
        dpen[2] += 0.5 * l2
    for lam, sign in ((l3, 1.0), (l4, -1.0)):
        if lam < 0.0:
            pen += lam * lam
            dpen[2] -= 0.5 * lam
            if s > 0.0:
                k = 0.5 * lam * sign / s
                dpen[0] += k * d
                dpen[1] -= k * d
                dpen[3] += k * 4.0 * tzz
                dpen[4] += k * 4.0 * tzy
    value = 1.0 + 0.5 * (eta1 + eta2) - mu * pen
    return value, _OBJ_GRAD - mu * dpen


def penalty_objective(params: MachineParams, config: OptimizerConfig, mu: float):
    """Penalized objective and its exact gradient (length 21) at ``params``."""
    x = params.to_vector()
    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > 1.0 + 1e-12):
        raise InvalidParams("parameters outside the box [-1, 1]")
    return _penalty(x, _equalities(config.profile), mu)


# --------------------------------------------------------------- projection


def _project(x: np.ndarray) -> np.ndarray:
    y = np.array(x, dtype=float)
    np.clip(y[:5], -1.0, 1.0, out=y[:5])
    blocks = y[5:].reshape(4, 4)
    norms = np.sqrt(np.einsum("ij,ij->i", blocks, blocks))
    small = norms < 1e-12
    if small.any():
        blocks[small] = 0.0
        blocks[small, 0] = 1.0
        norms[small] = 1.0
    blocks /= norms[:, None]
    return y


def project_params(raw) -> MachineParams:
    """Clamp the Pauli block to [-1, 1] and scale each amplitude block to unit norm."""
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (N_PARAMS,):
        raise ValueError(f"expected a vector of length {N_PARAMS}, got shape {raw.shape}")
    return MachineParams.from_vector(_project(raw))


# ------------------------------------------------------------------- search


def _random_start(rng: np.random.Generator) -> np.ndarray:
    x = np.empty(N_PARAMS)
    x[:5] = rng.uniform(-1.0, 1.0, 5)
    for lo, hi in AMPLITUDE_BLOCKS:
        g = rng.standard_normal(hi - lo)
        x[lo:hi] = g / np.linalg.norm(g)
    return x


def _ascend(x, free, eqs, system, mu, max_inner, step_tol):
    """
    Projected ascent along the gradient scaled by (2 mu J^T J + I)^-1.

    J stacks the Jacobians of the active penalty terms. Without the scaling
    the step shrinks like 1/mu and the iterate crawls along the narrow
    feasible valley near the optimum.
    """
    f, g = _penalty(x, eqs, mu)
    t = 1.0
    for _ in range(max_inner):
        _, jac = _violation_terms(x, system)
        cols = free.copy()
        # Pauli entries sitting on the box and pushed outward stay put
        cols[:5] &= ~((np.abs(x[:5]) >= 1.0) & (np.sign(g[:5]) == np.sign(x[:5])))
        jf = jac[:, cols]
        direction = np.zeros(N_PARAMS)
        direction[cols] = np.linalg.solve(2.0 * mu * (jf.T @ jf) + np.eye(jf.shape[1]), g[cols])
        t = min(2.0 * t, 1.0)
        while True:
            xn = _project(x + t * direction)
            fn, gn = _penalty(xn, eqs, mu)
            d = xn - x
            if fn >= f + ARMIJO * (g @ d):
                break
            t *= 0.5
            if t < MIN_STEP:
                return x
        x, f, g = xn, fn, gn
        if math.sqrt(d @ d) <= step_tol:
            break
    return x


def _violation_terms(x, system):
    parts = []
    jacs = []
    if len(system):
        r, jac = system.evaluate(x)
        parts.append(r)
        jacs.append(jac)
    n, jn = NORMALIZATION_SYSTEM.evaluate(x)
    parts.append(n)
    jacs.append(jn)
    lam, jl = spectrum_with_gradient(x)
    neg = lam < 0.0
    parts.append(lam[neg])
    jacs.append(jl[neg])
    return np.concatenate(parts), np.vstack(jacs)


def _restore(x, free, system, iters=30, target=1e-14):
    """Minimum-norm Gauss-Newton steps onto the constraint set."""
    best = x
    c, _ = _violation_terms(x, system)
    best_v = float(np.max(np.abs(c))) if c.size else 0.0
    for _ in range(iters):
        if best_v <= target:
            break
        c, jac = _violation_terms(x, system)
        cols = free.copy()
        for _ in range(6):
            dx = np.zeros(N_PARAMS)
            dx[cols] = np.linalg.lstsq(jac[:, cols], -c, rcond=None)[0]
            over = np.zeros(N_PARAMS, dtype=bool)
            over[:5] = np.abs(x[:5] + dx[:5]) > 1.0
            if not np.any(over & cols):
                break
            # pin box-active Pauli entries at their bound and resolve
            x = x.copy()
            x[:5][over[:5]] = np.sign(x[:5] + dx[:5])[over[:5]]
            cols &= ~over
            c, jac = _violation_terms(x, system)
        x = x + dx
        x[:5] = np.clip(x[:5], -1.0, 1.0)
        c, _ = _violation_terms(x, system)
        v = float(np.max(np.abs(c))) if c.size else 0.0
        if v < best_v:
            best, best_v = x, v
    return best


@dataclass(frozen=True)
class _Outcome:
    index: int
    x: np.ndarray
    objective: float
    report: ConstraintReport

    @property
    def violation(self) -> float:
        r = self.report
        return max(r.ns_norm, -r.min_eigenvalue, max(r.normalization_residuals))


def _run_restart(config: OptimizerConfig, index: int, x0=None) -> _Outcome:
    system = ns_system(config.profile)
    eqs = _equalities(config.profile)
    if x0 is None:
        rng = np.random.Generator(np.random.PCG64(config.seed ^ index))
        x = _random_start(rng)
    else:
        x = np.array(x0, dtype=float)
    free = np.ones(N_PARAMS, dtype=bool)
    if config.fixed is not None:
        x[config.fixed.index] = config.fixed.eta
        free[config.fixed.index] = False
    x = _project(x)
    for stage in range(config.stages):
        mu = config.mu0 * config.growth**stage
        x = _ascend(x, free, eqs, system, mu, config.max_inner, config.step_tol)
    if config.restore:
        x = _restore(x, free, system)
    params = MachineParams.from_vector(x)
    report = feasibility_report(params, config.profile, config.feas_tol)
    return _Outcome(index, x, 1.0 + 0.5 * (x[ETA1] + x[ETA2]), report)


def _run_all(config, tasks, executor=None):
    if executor is None:
        return [_run_restart(config, i, x0) for i, x0 in tasks]
    futures = [executor.submit(_run_restart, config, i, x0) for i, x0 in tasks]
    return [f.result() for f in futures]


def _summarize(config, outcomes) -> OptimizationResult:
    summaries = tuple(RestartSummary(o.index, o.objective, o.report.feasible, o.report.ns_norm) for o in outcomes)
    feasible = [(k, o) for k, o in enumerate(outcomes) if o.report.feasible]
    if feasible:
        _, best = min(feasible, key=lambda ko: (-ko[1].objective, ko[1].report.ns_norm, ko[0]))
    else:
        _, best = min(enumerate(outcomes), key=lambda ko: (ko[1].violation, -ko[1].objective, ko[0]))
    params = MachineParams.from_vector(best.x)
    result = OptimizationResult(
        params=params,
        fidelities=fidelities(params),
        objective=best.objective,
        report=best.report,
        restarts=summaries,
        converged=bool(feasible),
    )
    if not feasible:
        raise NoFeasiblePoint(
            f"no restart reached feasibility under {config.profile.value} "
            f"(best violation {best.violation:.3e})",
            result,
        )
    return result


def _optimize(config: OptimizerConfig, warm=None, executor=None) -> OptimizationResult:
    tasks = [] if warm is None else [(-1, warm)]
    tasks += [(i, None) for i in range(config.restarts)]
    if executor is None and config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return _summarize(config, _run_all(config, tasks, pool))
    return _summarize(config, _run_all(config, tasks, executor))


def maximize_sum(config: OptimizerConfig) -> OptimizationResult:
    """Maximize F_p + F_d; raises NoFeasiblePoint when no restart is feasible."""
    if config.fixed is not None:
        raise ValueError("maximize_sum takes no fixed fidelity; use maximize_with_fixed")
    return _optimize(config)


def maximize_with_fixed(config: OptimizerConfig) -> OptimizationResult:
    """Pin one fidelity and maximize the other."""
    fixed = config.fixed
    if fixed is None:
        raise ValueError("config.fixed must name the pinned fidelity")
    if not 0.5 <= fixed.value <= 1.0:
        raise ValueError(f"fixed fidelity {fixed.value!r} outside [0.5, 1]")
    return _optimize(config)


def _sweep_point(kind, value, result: OptimizationResult, restarts_used) -> SweepPoint:
    f = result.fidelities
    other = f.f_p if kind == "deletion" else f.f_d
    return SweepPoint(
        fixed_kind=kind,
        fixed_value=value,
        max_other=other,
        sum=value + other,
        params=result.params,
        ns_norm=result.report.ns_norm,
        min_eigenvalue=result.report.min_eigenvalue,
        restarts_used=restarts_used,
        converged=result.converged,
    )


def sweep(config: OptimizerConfig, grid, kind: str | None = None) -> list:
    """
    Tradeoff curve: one fixed-fidelity maximization per grid value.

    Each point after the first also restarts from the previous point's
    solution. Failed points are kept with ``converged=False``.
    """
    grid = [float(v) for v in grid]
    if kind is None:
        if config.fixed is None:
            raise ValueError("sweep needs a fixed-fidelity kind")
        kind = config.fixed.kind
    if any(not 0.5 <= v <= 1.0 for v in grid):
        raise ValueError("sweep values must lie in [0.5, 1]")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep values must be ascending")
    if not grid:
        return []

    points = []
    warm = None
    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for value in grid:
            cfg = replace(config, fixed=FixedFidelity(kind, value))
            used = config.restarts + (warm is not None)
            try:
                result = maximize_with_fixed_warm(cfg, warm, pool)
            except NoFeasiblePoint as exc:
                result = exc.result
            points.append(_sweep_point(kind, value, result, used))
            warm = result.params.to_vector()
    finally:
        if pool is not None:
            pool.shutdown()
    return points


def maximize_with_fixed_warm(config: OptimizerConfig, warm=None, executor=None) -> OptimizationResult:
    """:func:`maximize_with_fixed` plus an optional warm-start vector."""
    if config.fixed is None or not 0.5 <= config.fixed.value <= 1.0:
        raise ValueError("config.fixed must pin a fidelity in [0.5, 1]")
    return _optimize(config, warm=warm, executor=executor)
