import itertools
import math

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_params
from qdeletion import machine, qop
from qdeletion.errors import InvalidParams, NormalizationError, ParseError
from qdeletion.machine import InputDirection, MachineParams, OutputLabel

DIRS = list(InputDirection)
X, Y, Z, I = qop.SX, qop.SY, qop.SZ, qop.I2


def explicit_output_matrix(eta1, eta2, txx, tzz, tzy):
    """The x-frame output written out entry by entry (blank-state factor folded into eta2)."""
    j = 1j
    return np.array(
        [
            [1 + tzz, eta2 - j * tzy, eta1 + j * tzy, txx - tzz],
            [eta2 + j * tzy, 1 - tzz, txx + tzz, eta1 - j * tzy],
            [eta1 - j * tzy, txx + tzz, 1 - tzz, eta2 + j * tzy],
            [txx - tzz, eta1 + j * tzy, eta2 - j * tzy, 1 + tzz],
        ]
    ) / 4


class TestParams:
    def test_vector_round_trip(self, rng):
        p = random_params(rng)
        assert MachineParams.from_vector(p.to_vector()) == p

    def test_derived_entries(self):
        p = MachineParams(tzz=0.3, tzy=0.2)
        assert p.tyy == 0.3 and p.tyz == -0.2

    def test_bound_violation(self, optimum):
        with pytest.raises(InvalidParams):
            optimum.replace(eta1=1.5).check()

    def test_normalization_violation(self, optimum):
        with pytest.raises(InvalidParams):
            optimum.replace(p=(0.5, 0, 0, 0, 1, 0, 0, 0)).check()

    def test_nonfinite(self, optimum):
        with pytest.raises(InvalidParams):
            optimum.replace(txx=float("nan")).check()


class TestCanonicalOutput:
    def test_optimum(self, optimum):
        expected = np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]) / 4
        assert np.allclose(qop.to_matrix(machine.canonical_output(optimum)), expected, atol=1e-15)

    def test_all_zero(self):
        p = MachineParams(p=(1, 0, 0, 0, 1, 0, 0, 0), q=(1, 0, 0, 0, 1, 0, 0, 0))
        assert np.allclose(qop.to_matrix(machine.canonical_output(p)), np.eye(4) / 4)

    def test_hand_substitution(self, optimum):
        m = qop.to_matrix(machine.canonical_output(optimum.replace(eta1=0.5, eta2=0.3)))
        assert m[0, 1] == pytest.approx(0.3 / 4)
        assert m[0, 2] == pytest.approx(0.5 / 4)
        assert np.allclose(np.diag(m), 0.25)

    def test_matches_explicit_matrix(self, rng):
        for _ in range(200):
            p = random_params(rng)
            got = qop.to_matrix(machine.canonical_output(p))
            assert np.allclose(got, explicit_output_matrix(p.eta1, p.eta2, p.txx, p.tzz, p.tzy), atol=1e-15)

    def test_invalid(self, optimum):
        with pytest.raises(InvalidParams):
            machine.canonical_output(optimum.replace(eta2=-1.01))


class TestFrameOutput:
    def test_optimum_plus_z(self, optimum):
        got = qop.to_matrix(machine.frame_output(optimum, InputDirection.PLUS_Z))
        assert np.allclose(got, (np.eye(4) + np.kron(Z, I)) / 4, atol=1e-15)

    def test_all_zero_block(self):
        p = MachineParams(p=(0, 1, 0, 0, 0, 0, 1, 0), q=(0, 0, 0, 1, 1, 0, 0, 0))
        for d in DIRS:
            assert np.allclose(qop.to_matrix(machine.frame_output(p, d)), np.eye(4) / 4, atol=1e-15)

    def test_marginals_follow_direction(self, rng):
        for _ in range(50):
            p = random_params(rng)
            for d in DIRS:
                op = machine.frame_output(p, d)
                assert op[0, 0] == pytest.approx(1.0, abs=1e-14)
                assert np.allclose(qop.partial_trace(op, 1).bloch.as_array(), p.eta1 * d.vector, atol=1e-14)
                assert np.allclose(qop.partial_trace(op, 2).bloch.as_array(), p.eta2 * d.vector, atol=1e-14)

    def test_isospectral(self, rng):
        for _ in range(50):
            p = random_params(rng)
            spectra = [qop.eig_hermitian(qop.to_matrix(machine.frame_output(p, d))) for d in DIRS]
            for a, b in itertools.combinations(spectra, 2):
                assert np.allclose(a, b, atol=1e-10)

    def test_fidelity_consistency(self, rng):
        # closed-form fidelities agree with overlaps of the reduced outputs
        for _ in range(50):
            p = random_params(rng)
            f = machine.fidelities(p)
            for d in DIRS:
                op = machine.frame_output(p, d)
                rho1 = qop.partial_trace(op, 1).density_matrix()
                rho2 = qop.partial_trace(op, 2).density_matrix()
                assert qop.fidelity_pure(d.bloch, rho1) == pytest.approx(f.f_p, abs=1e-12)
                assert qop.fidelity_pure(d.bloch, rho2) == pytest.approx(f.f_d, abs=1e-12)

    def test_covariant_with_rotation_oracle(self, rng):
        # the conjugating unitaries map +x to each target direction
        for d in DIRS:
            u = d.rotation
            rotated = u @ X @ u.conj().T
            target = d.vector[0] * X + d.vector[1] * Y + d.vector[2] * Z
            assert np.allclose(rotated, target, atol=1e-15)


class TestInvalidOutput:
    def test_optimum(self, optimum):
        for label in OutputLabel:
            assert np.allclose(machine.invalid_output(optimum, label), [1, 0, 0, 0])

    def test_basis_vector(self, optimum):
        p = optimum.replace(p=(0, 1, 0, 0, 1, 0, 0, 0))
        assert np.allclose(machine.invalid_output(p, OutputLabel.PHI), [0, 1, 0, 0])

    def test_superposition(self, optimum):
        s = 1 / math.sqrt(2)
        p = optimum.replace(p=(s, s, 0, 0, 1, 0, 0, 0))
        assert np.allclose(machine.invalid_output(p, OutputLabel.PHI), [s, s, 0, 0])

    def test_blocks_and_norms(self, rng):
        for _ in range(50):
            p = random_params(rng)
            got = {label: machine.invalid_output(p, label) for label in OutputLabel}
            assert np.allclose(got[OutputLabel.PHI_PRIME], p.p[4:])
            assert np.allclose(got[OutputLabel.GAMMA], p.q[:4])
            for ket in got.values():
                assert abs(np.vdot(ket, ket).real - 1.0) <= 1e-12


class TestFidelities:
    def test_optimum(self, optimum):
        f = machine.fidelities(optimum)
        assert (f.f_p, f.f_d, f.total) == (1.0, 0.5, 1.5)

    def test_zero(self, optimum):
        f = machine.fidelities(optimum.replace(eta1=0.0))
        assert (f.f_p, f.f_d) == (0.5, 0.5)

    def test_linear(self, optimum):
        assert machine.fidelities(optimum.replace(eta1=0.6)).f_p == pytest.approx(0.8)


def commutator_oracle(op, alpha, direction):
    m_sigma = sum(c * s for c, s in zip(direction.vector, (X, Y, Z)))
    u = expm(1j * alpha * m_sigma)
    uu = np.kron(u, u)
    rho = qop.to_matrix(op)
    return np.linalg.norm(uu @ rho - rho @ uu)


class TestCovariance:
    def test_optimum(self, optimum):
        assert machine.covariance_residual(optimum, 0.7, InputDirection.PLUS_X) <= 1e-10

    def test_random_params(self, rng):
        for _ in range(100):
            p = random_params(rng)
            for d in DIRS:
                assert machine.covariance_residual(p, 1.3, d) <= 1e-10

    def test_corrupted_operator(self, optimum):
        c = machine.canonical_output(optimum).coeffs.copy()
        c[2, 0] = 0.5
        op = qop.PauliOp(c)
        got = machine.commutator_residual(op, math.pi / 4, InputDirection.PLUS_X)
        assert got == pytest.approx(commutator_oracle(op, math.pi / 4, InputDirection.PLUS_X), abs=1e-12)
        # 0.125 * ||[U, Y]||_F * ||U||_F with [U, Y] = -2 sin(a) Z
        assert got == pytest.approx(math.sqrt(2) / 4, abs=1e-12)
        assert got > 0.1

    def test_rotation_matches_expm(self, rng):
        for d in DIRS:
            a = rng.uniform(-3, 3)
            m_sigma = sum(c * s for c, s in zip(d.vector, (X, Y, Z)))
            assert np.allclose(machine.rotation_about(d, a), expm(1j * a * m_sigma), atol=1e-14)


class TestParamFile:
    def test_optimum_file(self, optimum):
        text = "# the optimum\neta1 = 1\np1 = 1\np5 = 1\nq1 = 1\nq5 = 1   # trailing comment\n"
        assert machine.parse_params(text) == optimum

    def test_round_trip(self, rng):
        p = random_params(rng)
        assert machine.parse_params(machine.format_params(p, "header")) == p

    def test_unknown_key(self):
        with pytest.raises(ParseError) as err:
            machine.parse_params("eta1 = 0.5\nbx = 1\n")
        assert err.value.line == 2 and err.value.key == "bx"

    def test_bound_violation(self):
        with pytest.raises(ParseError):
            machine.parse_params("eta1 = 2\np1 = 1\np5 = 1\nq1 = 1\nq5 = 1\n")

    def test_normalization(self):
        with pytest.raises(NormalizationError):
            machine.parse_params("p1 = 0.5\np5 = 1\nq1 = 1\nq5 = 1\n")

    @pytest.mark.parametrize("text", ["eta1 1\n", "eta1 = abc\n", "eta1 = 0.1\neta1 = 0.2\n"])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            machine.parse_params(text)
