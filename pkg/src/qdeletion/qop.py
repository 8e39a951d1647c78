"""
Two-qubit operator algebra over the Pauli tensor basis.

Operators are stored as real 4x4 coefficient arrays ``c`` with
``rho = (1/4) * sum_{mu,nu} c[mu, nu] * sigma_mu (x) sigma_nu`` and Pauli
order (I, X, Y, Z). Matrices use the computational basis |00>, |01>, |10>, |11>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonHermitianInput, NoConvergence, NotNormalized

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (I2, SX, SY, SZ)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

# PAULI_BASIS[mu, nu] = sigma_mu (x) sigma_nu
PAULI_BASIS = np.array([[np.kron(a, b) for b in PAULI] for a in PAULI])


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, v) -> BlochVector:
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def density_matrix(self) -> np.ndarray:
        """(I + m.sigma) / 2."""
        return 0.5 * (I2 + self.x * SX + self.y * SY + self.z * SZ)


@dataclass(frozen=True)
class ReducedQubit:
    """Single-qubit marginal: trace ``weight`` and normalized Bloch vector."""

    weight: float
    bloch: BlochVector

    def density_matrix(self) -> np.ndarray:
        return self.weight * self.bloch.density_matrix()


class PauliOp:
    """Immutable two-qubit Hermitian operator in Pauli coefficient form."""

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float)
        if c.shape != (4, 4):
            raise ValueError(f"expected a 4x4 coefficient array, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def __getitem__(self, idx):
        return self._c[idx]

    def __eq__(self, other):
        if not isinstance(other, PauliOp):
            return NotImplemented
        return bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return f"PauliOp({self._c.tolist()!r})"

    def allclose(self, other: PauliOp, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._c, other._c, rtol=0.0, atol=atol))

    @classmethod
    def identity(cls) -> PauliOp:
        c = np.zeros((4, 4))
        c[0, 0] = 1.0
        return cls(c)


def to_matrix(op: PauliOp) -> np.ndarray:
    return np.einsum("mn,mnij->ij", op.coeffs, PAULI_BASIS) / 4.0


def _check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise NonHermitianInput(f"matrix deviates from Hermitian by {dev:.3e}")
    return m


def from_matrix(m) -> PauliOp:
    """Inverse of :func:`to_matrix`: ``c[mu, nu] = Tr(m . sigma_mu (x) sigma_nu)``."""
    m = _check_hermitian(m)
    if m.shape != (4, 4):
        raise NonHermitianInput(f"expected a 4x4 matrix, got shape {m.shape}")
    c = np.einsum("mnij,ji->mn", PAULI_BASIS, m)
    return PauliOp(c.real)


def partial_trace(op: PauliOp, keep: int) -> ReducedQubit:
    """Reduced state of qubit ``keep`` (1 or 2)."""
    c = op.coeffs
    if keep == 1:
        vec = c[:, 0]
    elif keep == 2:
        vec = c[0, :]
    else:
        raise ValueError(f"keep must be 1 or 2, got {keep!r}")
    c0 = vec[0]
    if c0 == 0:
        raise ValueError("operator has zero trace")
    return ReducedQubit(float(c0), BlochVector.from_array(vec[1:] / c0))


def _jacobi_symmetric(a: np.ndarray, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigen-decomposition of a real symmetric matrix."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps + 1):
        off = float(np.linalg.norm(a[offdiag]))
        if off <= tol * scale:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * (abs(a[p, p]) + abs(a[q, q])) + 1e-300:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - s * a[q, :]
                a[q, :] = s * row_p + c * a[q, :]
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def _embed(m: np.ndarray) -> np.ndarray:
    # (A + iB) -> [[A, -B], [B, A]]; every eigenvalue appears twice
    a, b = m.real, m.imag
    return np.block([[a, -b], [b, a]])


def eigh_hermitian(m, cluster_tol: float = 1e-10):
    """Eigenvalues (descending) and orthonormal eigenvectors (columns)."""
    m = _check_hermitian(m)
    m = 0.5 * (m + m.conj().T)
    n = m.shape[0]
    w, v = _jacobi_symmetric(_embed(m))
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    values = 0.5 * (w[0::2] + w[1::2])

    # each embedded eigenvector (x, y) gives a complex eigenvector x + iy;
    # pick an orthonormal subset cluster by cluster with pivoting
    cand = v[:n, :] + 1j * v[n:, :]
    vectors = []
    i = 0
    while i < 2 * n:
        j = i
        while j + 1 < 2 * n and abs(w[j + 1] - w[i]) <= cluster_tol:
            j += 1
        pool = [cand[:, k].copy() for k in range(i, j + 1)]
        for _ in range((j + 1) // 2 - len(vectors)):
            best, best_norm = None, -1.0
            for idx, u in enumerate(pool):
                for e in vectors:
                    u = u - (e.conj() @ u) * e
                pool[idx] = u
                nrm = float(np.linalg.norm(u))
                if nrm > best_norm:
                    best, best_norm = idx, nrm
            vectors.append(pool.pop(best) / best_norm)
        i = j + 1
    return values, np.column_stack(vectors)


def eig_hermitian(m) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in descending order."""
    m = _check_hermitian(m)
    m = 0.5 * (m + m.conj().T)
    w, _ = _jacobi_symmetric(_embed(m))
    w = np.sort(w)[::-1]
    return 0.5 * (w[0::2] + w[1::2])


def _as_ket(psi) -> np.ndarray:
    if isinstance(psi, BlochVector):
        raise TypeError("Bloch vectors have no ket form here")
    ket = np.asarray(psi, dtype=complex).ravel()
    nrm = float(np.vdot(ket, ket).real)
    if abs(nrm - 1.0) > 1e-12:
        raise NotNormalized(f"state has squared norm {nrm!r}")
    return ket


def _clamp_unit(f: float) -> float:
    if -1e-12 <= f < 0.0:
        return 0.0
    if 1.0 < f <= 1.0 + 1e-12:
        return 1.0
    return f


def fidelity_pure(psi, rho) -> float:
    """<psi|rho|psi> for a pure ``psi`` (ket array or unit Bloch vector)."""
    if isinstance(rho, PauliOp):
        rho = to_matrix(rho)
    elif isinstance(rho, BlochVector):
        rho = rho.density_matrix()
    rho = np.asarray(rho, dtype=complex)
    if isinstance(psi, BlochVector):
        if abs(psi.norm() - 1.0) > 1e-12:
            raise NotNormalized(f"Bloch vector has norm {psi.norm()!r}")
        if rho.shape != (2, 2):
            raise ValueError("a Bloch-vector state needs a single-qubit rho")
        val = np.trace(psi.density_matrix() @ rho)
    else:
        ket = _as_ket(psi)
        if rho.shape != (ket.size, ket.size):
            raise ValueError(f"rho shape {rho.shape} does not match state of size {ket.size}")
        val = np.vdot(ket, rho @ ket)
    if abs(val.imag) > 1e-12:
        raise NonHermitianInput(f"fidelity has imaginary part {val.imag:.3e}")
    return _clamp_unit(float(val.real))


def trace_distance(a, b) -> float:
    a = _check_hermitian(a)
    b = _check_hermitian(b)
    return 0.5 * float(np.sum(np.abs(eig_hermitian(a - b))))


def projector(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex).ravel()
    return np.outer(ket, ket.conj())
