"""
Feasibility of a deletion machine: no-signaling residuals, positivity of the
output spectrum, and normalization of the free pure outputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import qop
from .machine import (
    N_PARAMS,
    InputDirection,
    MachineParams,
    OutputLabel,
    frame_output,
    invalid_output,
)

DEFAULT_OPTIMIZE_TOL = 1e-6
DEFAULT_VERIFY_TOL = 1e-8


class ConstraintProfile(enum.Enum):
    STRICT = "strict"  # every closed-form residual r0..r10
    RELAXED = "relaxed"  # STRICT without r2
    MATRIX = "matrix"  # entries of the mixture-identity difference
    POSITIVITY = "positivity"  # diagnostic: no no-signaling residuals at all

    @classmethod
    def parse(cls, name) -> ConstraintProfile:
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown constraint profile {name!r}") from None


CLOSED_FORM_NAMES = tuple(f"r{k}" for k in range(11))
MATRIX_NAMES = tuple(f"D{i}{j}" for i in range(1, 5) for j in range(1, 5))


def _padded(params: MachineParams):
    # 1-based views so the formulas read like p1..p8
    return (0.0, *params.p), (0.0, *params.q)


def ns_residuals_closed_form(params: MachineParams) -> dict:
    """Closed-form no-signaling residuals r0..r10 (blank-state factor folded into eta2)."""
    params.check()
    p, q = _padded(params)
    e2, tau = params.eta2, params.txx - params.tzz
    return {
        "r0": params.tzy,
        "r1": p[2] * p[4] - p[6] * p[8] + q[2] * q[4] - q[6] * q[8],
        "r2": p[3] * p[4] - p[7] * p[8] + q[3] * q[4] - q[7] * q[8],
        "r3": e2 - 2 * (p[5] ** 2 - p[1] ** 2 + q[5] ** 2 - q[1] ** 2),
        "r4": e2 - 2 * (p[2] ** 2 - p[6] ** 2 + q[2] ** 2 - q[6] ** 2),
        "r5": e2 - 2 * (p[7] ** 2 - p[3] ** 2 + q[7] ** 2 - q[3] ** 2),
        "r6": e2 - 2 * (p[4] ** 2 - p[8] ** 2 + q[4] ** 2 - q[8] ** 2),
        "r7": e2 - 2 * (p[1] * p[2] - p[5] * p[6] + q[1] * q[2] - q[5] * q[6]),
        "r8": e2 - 2 * (p[3] * p[4] - p[7] * p[8] + q[3] * q[4] - q[7] * q[8]),
        "r9": tau - 2 * (p[2] * p[3] - p[6] * p[7] + q[2] * q[3] - q[6] * q[7]),
        "r10": tau - 2 * (p[1] * p[4] - p[5] * p[8] + q[1] * q[4] - q[5] * q[8]),
    }


def mixture_difference(params: MachineParams) -> np.ndarray:
    """L - R: z-basis side minus x-basis side of the output mixture identity."""
    params.check()
    lhs = (
        qop.to_matrix(frame_output(params, InputDirection.PLUS_Z))
        + qop.projector(invalid_output(params, OutputLabel.PHI))
        + qop.projector(invalid_output(params, OutputLabel.GAMMA))
        + qop.to_matrix(frame_output(params, InputDirection.MINUS_Z))
    )
    rhs = (
        qop.to_matrix(frame_output(params, InputDirection.PLUS_X))
        + qop.projector(invalid_output(params, OutputLabel.PHI_PRIME))
        + qop.projector(invalid_output(params, OutputLabel.GAMMA_PRIME))
        + qop.to_matrix(frame_output(params, InputDirection.MINUS_X))
    )
    return lhs - rhs


def ns_residual_matrix(params: MachineParams) -> float:
    return float(np.linalg.norm(mixture_difference(params)))


def input_mixture_sides() -> tuple:
    """Both sides of the input identity: sum of z-products, sum of x-products."""
    dirs_z = (InputDirection.PLUS_Z, InputDirection.MINUS_Z)
    dirs_x = (InputDirection.PLUS_X, InputDirection.MINUS_X)
    z = sum(np.kron(a.bloch.density_matrix(), b.bloch.density_matrix()) for a in dirs_z for b in dirs_z)
    x = sum(np.kron(a.bloch.density_matrix(), b.bloch.density_matrix()) for a in dirs_x for b in dirs_x)
    return z, x


def _spectrum(eta1, eta2, txx, tzz, tzy):
    s = math.sqrt((eta1 - eta2) ** 2 + 4.0 * (tzy * tzy + tzz * tzz))
    return (
        (1.0 + eta1 + eta2 + txx) / 4.0,
        (1.0 - eta1 - eta2 + txx) / 4.0,
        (1.0 - txx + s) / 4.0,
        (1.0 - txx - s) / 4.0,
    )


def positivity_spectrum(params: MachineParams) -> tuple:
    """Closed-form eigenvalues of the canonical output (correlated sign pair first)."""
    params.check()
    return _spectrum(params.eta1, params.eta2, params.txx, params.tzz, params.tzy)


def normalization_residuals(params: MachineParams) -> tuple:
    return tuple(abs(n2 - 1.0) for n2 in params.block_norms())


@dataclass(frozen=True)
class ConstraintReport:
    profile: ConstraintProfile
    ns_residuals: dict
    ns_norm: float
    min_eigenvalue: float
    normalization_residuals: tuple
    feasible: bool
    tol: float

    def summary(self) -> str:
        status = "feasible" if self.feasible else "INFEASIBLE"
        return (
            f"[{self.profile.value}] {status} at tol={self.tol:g}: "
            f"ns_norm={self.ns_norm:.3e} min_eigenvalue={self.min_eigenvalue:.3e} "
            f"max_normalization={max(self.normalization_residuals):.3e}"
        )


def ns_residuals(params: MachineParams, profile: ConstraintProfile) -> dict:
    profile = ConstraintProfile.parse(profile)
    if profile is ConstraintProfile.POSITIVITY:
        return {}
    if profile is ConstraintProfile.MATRIX:
        d = mixture_difference(params)
        # Frobenius norm counts |entry|; imaginary parts vanish for real amplitudes
        return {name: float(np.abs(v)) for name, v in zip(MATRIX_NAMES, d.ravel())}
    res = ns_residuals_closed_form(params)
    if profile is ConstraintProfile.RELAXED:
        del res["r2"]
    return res


def feasibility_report(params: MachineParams, profile=ConstraintProfile.STRICT, tol: float = DEFAULT_VERIFY_TOL) -> ConstraintReport:
    if not tol > 0:
        raise ValueError("tol must be positive")
    profile = ConstraintProfile.parse(profile)
    params.check()
    res = ns_residuals(params, profile)
    ns_norm = math.sqrt(sum(v * v for v in res.values()))
    closed = min(positivity_spectrum(params))
    # covariance makes every frame isospectral; +z is checked numerically
    numeric = float(qop.eig_hermitian(qop.to_matrix(frame_output(params, InputDirection.PLUS_Z)))[-1])
    min_eig = min(closed, numeric)
    norms = normalization_residuals(params)
    feasible = ns_norm <= tol and min_eig >= -tol and all(n <= tol for n in norms)
    return ConstraintReport(profile, res, ns_norm, min_eig, norms, feasible, tol)


# Polynomial form for the optimizer. Every residual of every profile is
# b + A.x + x^T Q x in the 21-vector (eta1, eta2, txx, tzz, tzy, p1..p8, q1..q8).

ETA1, ETA2, TXX, TZZ, TZY = range(5)


def _p(i):
    return 4 + i


def _q(i):
    return 12 + i


@dataclass(frozen=True)
class QuadraticSystem:
    names: tuple
    b: np.ndarray  # (m,)
    A: np.ndarray  # (m, n)
    Q: np.ndarray  # (m, n, n), symmetric in the last two axes

    def __len__(self):
        return len(self.names)

    def evaluate(self, x: np.ndarray):
        """Residual vector and Jacobian."""
        qx = self.Q @ x
        return self.b + self.A @ x + qx @ x, self.A + 2.0 * qx


class _Builder:
    def __init__(self):
        self.rows = []

    def row(self, name):
        r = {"name": name, "b": 0.0, "lin": {}, "quad": {}}
        self.rows.append(r)
        return r

    @staticmethod
    def lin(r, idx, coef):
        r["lin"][idx] = r["lin"].get(idx, 0.0) + coef

    @staticmethod
    def bilinear(r, a, b, coef):
        key = (min(a, b), max(a, b))
        r["quad"][key] = r["quad"].get(key, 0.0) + coef

    def pq(self, r, i, j, coef):
        """coef * (p_i p_j - p_{i+4} p_{j+4} + q_i q_j - q_{i+4} q_{j+4})."""
        for idx in (_p, _q):
            self.bilinear(r, idx(i), idx(j), coef)
            self.bilinear(r, idx(i + 4), idx(j + 4), -coef)

    def build(self) -> QuadraticSystem:
        m = len(self.rows)
        b = np.zeros(m)
        A = np.zeros((m, N_PARAMS))
        Q = np.zeros((m, N_PARAMS, N_PARAMS))
        for k, r in enumerate(self.rows):
            b[k] = r["b"]
            for idx, c in r["lin"].items():
                A[k, idx] += c
            for (a, bb), c in r["quad"].items():
                if a == bb:
                    Q[k, a, a] += c
                else:
                    Q[k, a, bb] += c / 2.0
                    Q[k, bb, a] += c / 2.0
        return QuadraticSystem(tuple(r["name"] for r in self.rows), b, A, Q)


def _closed_form_system(skip=()) -> QuadraticSystem:
    bld = _Builder()
    # (name, linear part, amplitude pair, coefficient of the pair combination)
    rows = [
        ("r0", TZY, None, 0.0),
        ("r1", None, (2, 4), 1.0),
        ("r2", None, (3, 4), 1.0),
        ("r3", ETA2, (1, 1), 2.0),
        ("r4", ETA2, (2, 2), -2.0),
        ("r5", ETA2, (3, 3), 2.0),
        ("r6", ETA2, (4, 4), -2.0),
        ("r7", ETA2, (1, 2), -2.0),
        ("r8", ETA2, (3, 4), -2.0),
        ("r9", "tau", (2, 3), -2.0),
        ("r10", "tau", (1, 4), -2.0),
    ]
    for name, lin, pair, coef in rows:
        if name in skip:
            continue
        r = bld.row(name)
        if lin == "tau":
            bld.lin(r, TXX, 1.0)
            bld.lin(r, TZZ, -1.0)
        elif lin is not None:
            bld.lin(r, lin, 1.0)
        if pair is not None:
            bld.pq(r, *pair, coef)
    return bld.build()


def _matrix_system() -> QuadraticSystem:
    # L - R = (txx - tzz)(ZZ - XX)/2 + S, S_ij = p_i p_j - p_{i+4} p_{j+4} + (q terms)
    zz_minus_xx = np.real(np.kron(qop.SZ, qop.SZ) - np.kron(qop.SX, qop.SX)) / 2.0
    bld = _Builder()
    for i in range(1, 5):
        for j in range(1, 5):
            r = bld.row(f"D{i}{j}")
            w = zz_minus_xx[i - 1, j - 1]
            if w:
                bld.lin(r, TXX, w)
                bld.lin(r, TZZ, -w)
            bld.pq(r, i, j, 1.0)
    return bld.build()


def _normalization_system() -> QuadraticSystem:
    bld = _Builder()
    for name, idx, start in (("n_p1", _p, 1), ("n_p5", _p, 5), ("n_q1", _q, 1), ("n_q5", _q, 5)):
        r = bld.row(name)
        r["b"] = -1.0
        for i in range(start, start + 4):
            bld.bilinear(r, idx(i), idx(i), 1.0)
    return bld.build()


_SYSTEM_CACHE = {}


def ns_system(profile) -> QuadraticSystem:
    profile = ConstraintProfile.parse(profile)
    if profile not in _SYSTEM_CACHE:
        if profile is ConstraintProfile.STRICT:
            sys_ = _closed_form_system()
        elif profile is ConstraintProfile.RELAXED:
            sys_ = _closed_form_system(skip=("r2",))
        elif profile is ConstraintProfile.MATRIX:
            sys_ = _matrix_system()
        else:
            sys_ = _Builder().build()
        _SYSTEM_CACHE[profile] = sys_
    return _SYSTEM_CACHE[profile]


NORMALIZATION_SYSTEM = _normalization_system()


def spectrum_with_gradient(x: np.ndarray, kink: float = 0.0):
    """Closed-form spectrum of the canonical output and its (4, 21) Jacobian.

    At s = 0 the square-root term uses the zero subgradient.
    """
    eta1, eta2, txx, tzz, tzy = x[:5]
    d = eta1 - eta2
    s = math.sqrt(d * d + 4.0 * (tzy * tzy + tzz * tzz))
    lam = np.array(
        [
            (1.0 + eta1 + eta2 + txx) / 4.0,
            (1.0 - eta1 - eta2 + txx) / 4.0,
            (1.0 - txx + s) / 4.0,
            (1.0 - txx - s) / 4.0,
        ]
    )
    jac = np.zeros((4, N_PARAMS))
    jac[0, :3] = (0.25, 0.25, 0.25)
    jac[1, :3] = (-0.25, -0.25, 0.25)
    ds = np.zeros(5)
    if s > kink:
        ds[:] = (d / s, -d / s, 0.0, 4.0 * tzz / s, 4.0 * tzy / s)
    jac[2, :5] = ds / 4.0
    jac[3, :5] = -ds / 4.0
    jac[2, TXX] = jac[3, TXX] = -0.25
    return lam, jac
