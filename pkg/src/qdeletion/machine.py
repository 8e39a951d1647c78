"""
Covariant deletion-machine model.

The machine is described by its x-frame output (Pauli block ``eta1, eta2,
txx, tzz, tzy``) and by the free pure outputs it assigns to the four
antisymmetric product inputs (real amplitude blocks ``p1..p8``, ``q1..q8``).
The blank state lies along the input direction, so the deletion marginal is
``eta2`` times the input Bloch vector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import qop
from .errors import InvalidParams, NormalizationError, ParseError

NORMALIZATION_TOL = 1e-9
BOUND_SLACK = 1e-12

PAULI_KEYS = ("eta1", "eta2", "txx", "tzz", "tzy")
AMPLITUDE_KEYS = tuple(f"p{i}" for i in range(1, 9)) + tuple(f"q{i}" for i in range(1, 9))
PARAM_KEYS = PAULI_KEYS + AMPLITUDE_KEYS
N_PARAMS = len(PARAM_KEYS)  # 21


class InputDirection(enum.Enum):
    PLUS_Z = "+z"
    MINUS_Z = "-z"
    PLUS_X = "+x"
    MINUS_X = "-x"

    @property
    def vector(self) -> np.ndarray:
        return _DIRECTION_VECTORS[self]

    @property
    def bloch(self) -> qop.BlochVector:
        return qop.BlochVector.from_array(self.vector)

    @property
    def rotation(self) -> np.ndarray:
        """Single-qubit unitary taking +x to this direction."""
        return _DIRECTION_UNITARIES[self]


_DIRECTION_VECTORS = {
    InputDirection.PLUS_Z: np.array([0.0, 0.0, 1.0]),
    InputDirection.MINUS_Z: np.array([0.0, 0.0, -1.0]),
    InputDirection.PLUS_X: np.array([1.0, 0.0, 0.0]),
    InputDirection.MINUS_X: np.array([-1.0, 0.0, 0.0]),
}

_DIRECTION_UNITARIES = {
    InputDirection.PLUS_X: qop.I2,
    InputDirection.MINUS_X: qop.SZ,
    InputDirection.PLUS_Z: qop.HADAMARD,
    InputDirection.MINUS_Z: qop.SX @ qop.HADAMARD,
}


class OutputLabel(enum.Enum):
    """Pure outputs assigned to the antisymmetric inputs."""

    PHI = "phi"  # up (x) down
    GAMMA = "gamma"  # down (x) up
    PHI_PRIME = "phi'"  # left (x) right
    GAMMA_PRIME = "gamma'"  # right (x) left


def _tuple8(values, name):
    t = tuple(float(v) for v in values)
    if len(t) != 8:
        raise InvalidParams(f"{name} must have 8 entries, got {len(t)}")
    return t


@dataclass(frozen=True)
class MachineParams:
    eta1: float = 0.0
    eta2: float = 0.0
    txx: float = 0.0
    tzz: float = 0.0
    tzy: float = 0.0
    p: tuple = field(default=(0.0,) * 8)
    q: tuple = field(default=(0.0,) * 8)

    def __post_init__(self):
        for key in PAULI_KEYS:
            object.__setattr__(self, key, float(getattr(self, key)))
        object.__setattr__(self, "p", _tuple8(self.p, "p"))
        object.__setattr__(self, "q", _tuple8(self.q, "q"))

    @classmethod
    def optimum(cls) -> MachineParams:
        """eta1 = 1, everything else in the Pauli block 0, p1 = p5 = q1 = q5 = 1."""
        block = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
        return cls(eta1=1.0, p=block, q=block)

    @classmethod
    def from_vector(cls, x) -> MachineParams:
        x = np.asarray(x, dtype=float)
        if x.shape != (N_PARAMS,):
            raise InvalidParams(f"expected a vector of length {N_PARAMS}, got shape {x.shape}")
        return cls(*x[:5], p=x[5:13], q=x[13:21])

    def to_vector(self) -> np.ndarray:
        return np.array([self.eta1, self.eta2, self.txx, self.tzz, self.tzy, *self.p, *self.q])

    def as_dict(self) -> dict:
        return dict(zip(PARAM_KEYS, self.to_vector().tolist()))

    def replace(self, **changes) -> MachineParams:
        d = {k: getattr(self, k) for k in (*PAULI_KEYS, "p", "q")}
        d.update(changes)
        return MachineParams(**d)

    @property
    def tyy(self) -> float:
        return self.tzz

    @property
    def tyz(self) -> float:
        return -self.tzy

    def amplitude(self, block: str, i: int) -> float:
        """1-based amplitude lookup, e.g. ``amplitude('p', 5)``."""
        return (self.p if block == "p" else self.q)[i - 1]

    def block_norms(self) -> tuple:
        """Squared norms of p[1..4], p[5..8], q[1..4], q[5..8]."""
        p, q = np.array(self.p), np.array(self.q)
        return (
            float(p[:4] @ p[:4]),
            float(p[4:] @ p[4:]),
            float(q[:4] @ q[:4]),
            float(q[4:] @ q[4:]),
        )

    def check(self, tol: float = NORMALIZATION_TOL) -> MachineParams:
        """Raise InvalidParams unless bounds and normalization hold."""
        x = self.to_vector()
        if not np.all(np.isfinite(x)):
            raise InvalidParams("parameters must be finite")
        bad = [k for k, v in zip(PARAM_KEYS, x) if abs(v) > 1.0 + BOUND_SLACK]
        if bad:
            raise InvalidParams(f"parameters outside [-1, 1]: {', '.join(bad)}")
        for name, n2 in zip(("p[1..4]", "p[5..8]", "q[1..4]", "q[5..8]"), self.block_norms()):
            if abs(n2 - 1.0) > tol:
                raise InvalidParams(f"amplitude block {name} has squared norm {n2!r}")
        return self


@dataclass(frozen=True)
class FidelityPair:
    f_p: float
    f_d: float

    @property
    def total(self) -> float:
        return self.f_p + self.f_d


def _canonical_coeffs(params: MachineParams) -> np.ndarray:
    c = np.zeros((4, 4))
    c[0, 0] = 1.0
    c[1, 0] = params.eta1
    c[0, 1] = params.eta2
    c[1, 1] = params.txx
    c[2, 2] = params.tzz  # t_yy = t_zz
    c[3, 3] = params.tzz
    c[3, 2] = params.tzy
    c[2, 3] = -params.tzy  # t_yz = -t_zy
    return c


def canonical_output(params: MachineParams) -> qop.PauliOp:
    """Output state for the +x input."""
    params.check()
    return qop.PauliOp(_canonical_coeffs(params))


def conjugate(op: qop.PauliOp, u: np.ndarray) -> qop.PauliOp:
    """(U (x) U) op (U (x) U)^dagger."""
    uu = np.kron(u, u)
    return qop.from_matrix(uu @ qop.to_matrix(op) @ uu.conj().T)


def frame_output(params: MachineParams, direction: InputDirection) -> qop.PauliOp:
    base = canonical_output(params)
    if direction is InputDirection.PLUS_X:
        return base
    return conjugate(base, direction.rotation)


def invalid_output(params: MachineParams, which: OutputLabel) -> np.ndarray:
    """Pure output (real amplitudes over |00>, |01>, |10>, |11>)."""
    params.check()
    block = {
        OutputLabel.PHI: params.p[:4],
        OutputLabel.GAMMA: params.q[:4],
        OutputLabel.PHI_PRIME: params.p[4:],
        OutputLabel.GAMMA_PRIME: params.q[4:],
    }[which]
    return np.array(block, dtype=complex)


def fidelities(params: MachineParams) -> FidelityPair:
    params.check()
    return FidelityPair(f_p=(1.0 + params.eta1) / 2.0, f_d=(1.0 + params.eta2) / 2.0)


def rotation_about(direction, alpha: float) -> np.ndarray:
    """exp(i alpha m.sigma) for a unit vector m."""
    m = direction.vector if isinstance(direction, InputDirection) else np.asarray(direction, float)
    m_sigma = m[0] * qop.SX + m[1] * qop.SY + m[2] * qop.SZ
    return math.cos(alpha) * qop.I2 + 1j * math.sin(alpha) * m_sigma


def commutator_residual(op: qop.PauliOp, alpha: float, direction: InputDirection) -> float:
    u = rotation_about(direction, alpha)
    uu = np.kron(u, u)
    rho = qop.to_matrix(op)
    return float(np.linalg.norm(uu @ rho - rho @ uu))


def covariance_residual(params: MachineParams, alpha: float, direction: InputDirection) -> float:
    """Frobenius norm of the commutator of the output with a rotation about its axis."""
    return commutator_residual(frame_output(params, direction), alpha, direction)


def output_states(params: MachineParams) -> dict:
    """
    Bob's eight conditional output matrices, keyed by Alice's basis.

    ``states['z']`` follows the input order (up up, up down, down up, down down);
    ``states['x']`` follows (right right, left right, right left, left left).
    """
    out = {}
    for basis, (plus, minus, first, second) in {
        "z": (InputDirection.PLUS_Z, InputDirection.MINUS_Z, OutputLabel.PHI, OutputLabel.GAMMA),
        "x": (InputDirection.PLUS_X, InputDirection.MINUS_X, OutputLabel.PHI_PRIME, OutputLabel.GAMMA_PRIME),
    }.items():
        out[basis] = (
            qop.to_matrix(frame_output(params, plus)),
            qop.projector(invalid_output(params, first)),
            qop.projector(invalid_output(params, second)),
            qop.to_matrix(frame_output(params, minus)),
        )
    return out


# parameter file: one `key = value` per line, `#` comments


def parse_params(text: str) -> MachineParams:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for item in line.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                raise ParseError("expected `key = value`", line=lineno)
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in PARAM_KEYS:
                raise ParseError("unknown key", line=lineno, key=key)
            if key in values:
                raise ParseError("duplicate key", line=lineno, key=key)
            try:
                v = float(val.strip())
            except ValueError:
                raise ParseError(f"not a number: {val.strip()!r}", line=lineno, key=key) from None
            if not math.isfinite(v) or abs(v) > 1.0 + BOUND_SLACK:
                raise ParseError(f"value {v!r} outside [-1, 1]", line=lineno, key=key)
            values[key] = v

    x = np.array([values.get(k, 0.0) for k in PARAM_KEYS])
    params = MachineParams.from_vector(x)
    for name, n2 in zip(("p1..p4", "p5..p8", "q1..q4", "q5..q8"), params.block_norms()):
        if abs(n2 - 1.0) > NORMALIZATION_TOL:
            raise NormalizationError(f"amplitudes {name} have squared norm {n2:.12g}, expected 1")
    return params


def format_params(params: MachineParams, header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    # repr keeps full precision so a round trip is exact
    lines += [f"{k} = {v!r}" for k, v in params.as_dict().items()]
    return "\n".join(lines) + "\n"
