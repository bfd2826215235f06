import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import random_density, random_hermitian, random_unitary
from qportrait import numkernel as nk
from qportrait.errors import DimensionMismatch, NonZeroTrace, NotHermitian, NotUnitary

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


class TestHermitianEig:
    def test_identity(self):
        dec = nk.hermitian_eig(np.eye(2))
        assert np.allclose(dec.eigenvalues, [1, 1])
        V = dec.eigenvectors
        assert np.allclose(V.conj().T @ V, np.eye(2))

    def test_diagonal(self):
        dec = nk.hermitian_eig(np.diag([1.0, 3.0]))
        assert np.allclose(dec.eigenvalues, [3, 1])
        assert np.allclose(np.abs(dec.eigenvectors), [[0, 1], [1, 0]])

    def test_sigma_x(self):
        dec = nk.hermitian_eig(SX)
        assert np.allclose(dec.eigenvalues, [1, -1])
        assert np.allclose(dec.eigenvectors[:, 0], np.array([1, 1]) / np.sqrt(2))
        assert np.allclose(dec.eigenvectors[:, 1], np.array([1, -1]) / np.sqrt(2))

    def test_phase_convention(self, rng):
        dec = nk.hermitian_eig(random_hermitian(rng, 5))
        for v in dec.eigenvectors.T:
            k = int(np.argmax(np.abs(v)))
            assert abs(v[k].imag) < 1e-14 and v[k].real > 0

    def test_deterministic_in_degenerate_subspace(self):
        H = np.diag([2.0, 1.0, 1.0, 1.0])
        a, b = nk.hermitian_eig(H), nk.hermitian_eig(H.copy())
        assert np.array_equal(a.eigenvectors, b.eigenvectors)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian) as err:
            nk.hermitian_eig(np.array([[0, 1], [0, 0]]))
        assert err.value.invariant == "hermitian"

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatch):
            nk.hermitian_eig(np.zeros((2, 3)))

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(2, 8), seed=st.integers(0, 2 ** 32 - 1))
    def test_round_trip_and_orthonormality(self, n, seed):
        H = random_hermitian(np.random.default_rng(seed), n)
        dec = nk.hermitian_eig(H)
        assert nk.max_abs(dec.reassemble() - H) < 1e-10
        V = dec.eigenvectors
        assert nk.max_abs(V.conj().T @ V - np.eye(n)) < 1e-10
        assert np.all(np.diff(dec.eigenvalues) <= 1e-12)
        assert nk.max_abs(sum(dec.projectors()) - np.eye(n)) < 1e-10


class TestGenerators:
    def test_zero_generator(self):
        assert np.allclose(nk.unitary_from_generator(np.zeros((3, 3))), np.eye(3))

    def test_half_pi_sigma_x(self):
        assert nk.max_abs(nk.unitary_from_generator(np.pi / 2 * SX) - 1j * SX) < 1e-12

    def test_embedded_block_rotation(self):
        phi = 0.7
        J = np.zeros((3, 3), dtype=complex)
        J[:2, :2] = phi * SX
        U = nk.unitary_from_generator(J)
        series = sum(np.linalg.matrix_power(1j * J, k) / math.factorial(k) for k in range(30))
        assert nk.max_abs(U - expm(1j * J)) < 1e-12
        assert nk.max_abs(U - series) < 1e-12
        assert U[2, 2] == pytest.approx(1)
        assert nk.max_abs(U[:2, :2] - (np.cos(phi) * np.eye(2) + 1j * np.sin(phi) * SX)) < 1e-12

    def test_rejects_trace(self):
        with pytest.raises(NonZeroTrace):
            nk.unitary_from_generator(np.eye(2))

    def test_log_of_identity(self):
        assert nk.max_abs(nk.generator_from_unitary(np.eye(4))) < 1e-15

    def test_log_of_symmetric_phases(self):
        U = np.diag(np.exp([1j * np.pi / 4, -1j * np.pi / 4]))
        assert nk.max_abs(nk.generator_from_unitary(U) - np.diag([np.pi / 4, -np.pi / 4])) < 1e-12

    def test_log_of_i_sigma_x(self):
        assert nk.max_abs(nk.generator_from_unitary(1j * SX) - np.pi / 2 * SX) < 1e-12

    def test_rejects_non_unitary(self):
        with pytest.raises(NotUnitary):
            nk.generator_from_unitary(np.diag([1.0, 2.0]))

    def test_round_trip_up_to_global_phase(self, rng):
        for n in range(2, 7):
            U = random_unitary(rng, n)
            J = nk.generator_from_unitary(U)
            assert abs(np.trace(J)) < 1e-9
            V = nk.unitary_from_generator(J)
            ratio = U @ V.conj().T
            assert nk.max_abs(ratio - ratio[0, 0] * np.eye(n)) < 1e-9

    def test_phases_are_trace_fixed(self, rng):
        phases, Z = nk.unitary_eigenphases(random_unitary(rng, 5))
        assert abs(phases.sum()) < 1e-12
        assert nk.max_abs(Z.conj().T @ Z - np.eye(5)) < 1e-10


class TestKronAndPartialTrace:
    def test_kron_examples(self):
        assert np.array_equal(nk.kron(np.eye(2), np.eye(2)), np.eye(4))
        assert np.array_equal(nk.kron(SZ, np.eye(2)).real, np.diag([1, 1, -1, -1]))
        assert np.array_equal(nk.kron(SX, SX).real, np.fliplr(np.eye(4)))

    def test_product_state(self, rng):
        a, b = random_density(rng, 2), random_density(rng, 3)
        M = np.kron(b, a)  # a is the fast (L) factor
        assert nk.max_abs(nk.partial_trace(M, "L", 2, 3) - a) < 1e-12
        assert nk.max_abs(nk.partial_trace(M, "S", 2, 3) - b) < 1e-12

    def test_bell(self):
        v = np.array([1, 0, 0, 1]) / np.sqrt(2)
        B = np.outer(v, v)
        for keep in "LS":
            assert nk.max_abs(nk.partial_trace(B, keep, 2, 2) - np.eye(2) / 2) < 1e-15

    def test_equilibrium(self):
        assert nk.max_abs(nk.partial_trace(np.eye(4) / 4, "L", 2, 2) - np.eye(2) / 2) == 0

    def test_matches_explicit_sum(self, rng):
        n_l, n_s = 3, 2
        M = random_density(rng, n_l * n_s)
        ref_l = np.zeros((n_l, n_l), dtype=complex)
        for p in range(n_s):
            for n in range(n_l):
                for m in range(n_l):
                    ref_l[n, m] += M[n + p * n_l, m + p * n_l]
        assert nk.max_abs(nk.partial_trace(M, "L", n_l, n_s) - ref_l) < 1e-14

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            nk.partial_trace(np.eye(5), "L", 2, 2)


def test_tolerance_scale(monkeypatch):
    base = nk.tolerance("hermitian")
    monkeypatch.setenv("QP_TOLERANCE_SCALE", "100")
    assert nk.tolerance("hermitian") == pytest.approx(100 * base)
