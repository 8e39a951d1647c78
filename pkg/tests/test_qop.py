import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qdeletion import qop
from qdeletion.errors import NonHermitianInput, NotNormalized
from qdeletion.qop import BlochVector, PauliOp

X, Y, Z, I = qop.SX, qop.SY, qop.SZ, qop.I2
TEST_UNITARIES = {
    "HxH": np.kron(qop.HADAMARD, qop.HADAMARD),
    "ZxZ": np.kron(Z, Z),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def coeffs(**entries):
    c = np.zeros((4, 4))
    c[0, 0] = 1.0
    for key, v in entries.items():
        c[int(key[1]), int(key[2])] = v
    return PauliOp(c)


def random_hermitian(rng, n=4):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def random_state(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


ket00 = np.array([1, 0, 0, 0], dtype=complex)
ket01 = np.array([0, 1, 0, 0], dtype=complex)


class TestToMatrix:
    def test_identity_term(self):
        assert np.allclose(qop.to_matrix(PauliOp.identity()), np.eye(4) / 4)

    def test_z_on_first(self):
        assert np.allclose(qop.to_matrix(coeffs(c30=1.0)), np.diag([0.5, 0.5, 0, 0]))

    def test_optimum_output(self):
        expected = np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]) / 4
        assert np.allclose(qop.to_matrix(coeffs(c10=1.0)), expected, atol=1e-15)

    def test_hermitian(self, rng):
        m = qop.to_matrix(PauliOp(rng.uniform(-1, 1, (4, 4))))
        assert np.max(np.abs(m - m.conj().T)) <= 1e-14


class TestFromMatrix:
    def test_round_trip_1000(self, rng):
        for _ in range(1000):
            op = PauliOp(rng.uniform(-1, 1, (4, 4)))
            assert qop.from_matrix(qop.to_matrix(op)).allclose(op, atol=1e-12)

    def test_diag(self):
        op = qop.from_matrix(np.diag([0.5, 0.5, 0, 0]))
        assert op.allclose(coeffs(c30=1.0), atol=1e-15)

    def test_explicit_output_matrix(self):
        # x-frame output written entry by entry, (eta1, eta2) = (0.5, 0.3)
        e1, e2 = 0.5, 0.3
        m = np.array(
            [[1, e2, e1, 0], [e2, 1, 0, e1], [e1, 0, 1, e2], [0, e1, e2, 1]],
            dtype=complex,
        ) / 4
        assert qop.from_matrix(m).allclose(coeffs(c10=0.5, c01=0.3), atol=1e-15)

    def test_rejects_non_hermitian(self):
        m = np.eye(4, dtype=complex)
        m[0, 1] = 1e-6
        with pytest.raises(NonHermitianInput):
            qop.from_matrix(m)

    @settings(max_examples=200, deadline=None)
    @given(arrays(np.float64, (4, 4), elements=st.floats(-1, 1)))
    def test_round_trip_property(self, c):
        op = PauliOp(c)
        assert qop.from_matrix(qop.to_matrix(op)).allclose(op, atol=1e-12)


class TestPartialTrace:
    def test_output_marginals(self):
        op = coeffs(c10=0.7, c01=0.2, c11=0.1)
        r1, r2 = qop.partial_trace(op, 1), qop.partial_trace(op, 2)
        assert r1.weight == 1.0
        assert np.allclose(r1.bloch.as_array(), [0.7, 0, 0])
        assert np.allclose(r2.bloch.as_array(), [0.2, 0, 0])

    def test_product_state(self, rng):
        m, n = rng.normal(size=3), rng.normal(size=3)
        m, n = m / np.linalg.norm(m), 0.5 * n / np.linalg.norm(n)
        rho = np.kron(BlochVector.from_array(m).density_matrix(), BlochVector.from_array(n).density_matrix())
        op = qop.from_matrix(rho)
        assert np.allclose(qop.partial_trace(op, 1).bloch.as_array(), m, atol=1e-14)
        assert np.allclose(qop.partial_trace(op, 2).bloch.as_array(), n, atol=1e-14)

    def test_matches_matrix_partial_trace(self, rng):
        rho = random_state(rng)
        op = qop.from_matrix(rho)
        t = rho.reshape(2, 2, 2, 2)
        assert np.allclose(qop.partial_trace(op, 1).density_matrix(), np.einsum("ijkj->ik", t), atol=1e-14)
        assert np.allclose(qop.partial_trace(op, 2).density_matrix(), np.einsum("jijk->ik", t), atol=1e-14)


class TestEigen:
    def test_diag(self):
        assert np.allclose(qop.eig_hermitian(np.diag([0.1, 0.4, 0.2, 0.3])), [0.4, 0.3, 0.2, 0.1], atol=1e-15)

    def test_bell_projector(self):
        bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
        assert np.allclose(qop.eig_hermitian(np.outer(bell, bell)), [1, 0, 0, 0], atol=1e-14)

    def test_output_spectrum(self):
        m = qop.to_matrix(coeffs(c10=0.5, c01=0.3))
        assert np.allclose(qop.eig_hermitian(m), [0.45, 0.30, 0.20, 0.05], atol=1e-14)

    def test_against_numpy(self, rng):
        for _ in range(200):
            h = random_hermitian(rng)
            assert np.allclose(qop.eig_hermitian(h), np.linalg.eigvalsh(h)[::-1], atol=1e-12)

    def test_trace_and_residuals(self, rng):
        for k in range(300):
            if k % 3 == 0:
                u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
                h = u @ np.diag([0.7, 0.7, -0.2, -0.2]) @ u.conj().T  # degenerate pairs
            else:
                h = random_hermitian(rng)
            w, v = qop.eigh_hermitian(h)
            assert np.all(np.diff(w) <= 0)
            assert abs(w.sum() - np.trace(h).real) <= 1e-12
            assert np.max(np.linalg.norm(h @ v - v * w, axis=0)) <= 1e-10
            assert np.allclose(v.conj().T @ v, np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("name", sorted(TEST_UNITARIES))
    def test_conjugation_invariance(self, rng, name):
        u = TEST_UNITARIES[name]
        for _ in range(50):
            h = random_hermitian(rng)
            assert np.allclose(qop.eig_hermitian(u @ h @ u.conj().T), qop.eig_hermitian(h), atol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianInput):
            qop.eig_hermitian(np.triu(np.ones((4, 4))))


class TestFidelity:
    def test_pure_match(self):
        assert qop.fidelity_pure(ket00, qop.projector(ket00)) == 1.0

    def test_maximally_mixed(self):
        assert qop.fidelity_pure(BlochVector(1, 0, 0), I / 2) == pytest.approx(0.5, abs=1e-15)

    def test_linear_form(self):
        rho = (I + 0.6 * X) / 2
        assert qop.fidelity_pure(BlochVector(1, 0, 0), rho) == pytest.approx(0.8, abs=1e-15)

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            qop.fidelity_pure(np.array([1, 1, 0, 0]), np.eye(4) / 4)
        with pytest.raises(NotNormalized):
            qop.fidelity_pure(BlochVector(0.5, 0, 0), I / 2)

    def test_range_and_equality_case(self, rng):
        for _ in range(200):
            psi = rng.normal(size=4) + 1j * rng.normal(size=4)
            psi /= np.linalg.norm(psi)
            f = qop.fidelity_pure(psi, random_state(rng))
            assert 0.0 <= f <= 1.0
            assert qop.fidelity_pure(psi, qop.projector(psi)) == pytest.approx(1.0, abs=1e-12)
            phi = rng.normal(size=4) + 1j * rng.normal(size=4)
            phi /= np.linalg.norm(phi)
            assert qop.fidelity_pure(psi, qop.projector(phi)) < 1.0 - 1e-6


class TestTraceDistance:
    def test_equal(self, rng):
        rho = random_state(rng)
        assert qop.trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal(self):
        assert qop.trace_distance(qop.projector(ket00), qop.projector(ket01)) == pytest.approx(1.0, abs=1e-14)

    def test_rank_two_difference(self):
        p00, p01 = qop.projector(ket00), qop.projector(ket01)
        a = (np.eye(4) / 2 + 2 * p00) / 4
        b = (np.eye(4) / 2 + p00 + p01) / 4
        assert qop.trace_distance(a, b) == pytest.approx(0.25, abs=1e-14)

    def test_metric_properties(self, rng):
        for _ in range(100):
            a, b, c = (random_state(rng, rank=int(rng.integers(1, 5))) for _ in range(3))
            ab, ba = qop.trace_distance(a, b), qop.trace_distance(b, a)
            assert ab >= 0
            assert abs(ab - ba) <= 1e-10
            assert ab <= qop.trace_distance(a, c) + qop.trace_distance(c, b) + 1e-10
