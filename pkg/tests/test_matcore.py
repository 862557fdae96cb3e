import numpy as np
import pytest
from hypothesis import given, strategies as st

from reclab.matcore import (
    SuperOperator,
    eig_hermitian,
    hs_inner,
    is_hermitian,
    kron,
    mat_func,
    matrix_units,
    partial_trace,
    trace_norm,
    unvec,
    unvec_batch,
    vec,
    vec_batch,
)

from conftest import density, diag, hermitian, matrix

seeds = st.integers(0, 2**32 - 1)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_eig_diagonal_sorted():
    spec = eig_hermitian(diag(2, 1))
    np.testing.assert_allclose(spec.eigenvalues, [1, 2])


def test_eig_pauli_x():
    np.testing.assert_allclose(eig_hermitian(PAULI_X).eigenvalues, [-1, 1], atol=1e-15)


@given(seeds, st.integers(2, 8))
def test_spectral_round_trip(seed, n):
    m = hermitian(seed, n)
    err = np.linalg.norm(eig_hermitian(m).reconstruct() - m)
    assert err <= 1e-10 * (1 + np.linalg.norm(m))


def test_eigenvector_phase_convention_is_deterministic():
    m = hermitian(5, 4)
    u1 = eig_hermitian(m).eigenvectors
    u2 = eig_hermitian(m.copy()).eigenvectors
    assert np.array_equal(u1, u2)


def test_support_cutoff_is_relative():
    spec = eig_hermitian(1e-6 * diag(1.0, 1e-13, 0.5))
    assert spec.support_rank == 2


def test_mat_func_sqrt():
    np.testing.assert_allclose(mat_func(diag(4, 9), np.sqrt), diag(2, 3))


def test_mat_func_pseudo_inverse():
    np.testing.assert_allclose(mat_func(diag(1, 0), lambda x: 1 / x, support_only=True), diag(1, 0))


@given(seeds, st.floats(-5, 5))
def test_imaginary_power_is_unitary_on_support(seed, t):
    rho = density(seed, 4, rank=3)
    spec = eig_hermitian(rho)
    x = spec.projector() @ matrix(seed + 1, 4)
    assert np.isclose(np.linalg.norm(spec.power(1j * t) @ x), np.linalg.norm(x), atol=1e-12)


@given(seeds, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_pseudo_power_algebra(seed, a, b):
    spec = eig_hermitian(density(seed, 4, rank=2))
    lhs = spec.power(a) @ spec.power(b)
    assert np.abs(lhs - spec.power(a + b)).max() <= 1e-9 * (1 + np.abs(spec.power(a + b)).max())


def test_power_batch_matches_power():
    spec = eig_hermitian(density(3, 3))
    zs = np.array([0.3, -0.2 + 1j, 2j])
    batch = spec.power_batch(zs)
    for z, p in zip(zs, batch):
        np.testing.assert_allclose(p, spec.power(z), atol=1e-14)


def test_vec_round_trip_and_zero():
    x = matrix(0, 3)
    np.testing.assert_array_equal(unvec(vec(x), 3), x)
    assert not vec(np.zeros((2, 3))).any()
    xs = np.stack([x, 2 * x])
    np.testing.assert_array_equal(unvec_batch(vec_batch(xs), 3), xs)


@given(seeds)
def test_vec_kron_identity(seed):
    a, x, b = matrix(seed, 3, 2), matrix(seed + 1, 2, 4), matrix(seed + 2, 4, 3)
    np.testing.assert_allclose(vec(a @ x @ b), np.kron(b.T, a) @ vec(x), atol=1e-12)
    c = b.conj().T
    # vec(a x c^dagger) = (conj(c) (x) a) vec(x)
    np.testing.assert_allclose(vec(a @ x @ c.conj().T), kron(c.conj(), a) @ vec(x), atol=1e-12)


def test_partial_trace_product():
    rho, tau = density(1, 2), density(2, 3)
    np.testing.assert_allclose(partial_trace(np.kron(rho, tau), (2, 3), traced=1), rho, atol=1e-14)
    np.testing.assert_allclose(partial_trace(np.kron(rho, tau), (2, 3), traced=0), tau, atol=1e-14)


def test_trace_norm_pauli_x():
    assert trace_norm(PAULI_X) == pytest.approx(2.0)


@given(seeds)
def test_hs_inner_positive(seed):
    x = matrix(seed, 3)
    val = hs_inner(x, x)
    assert abs(val.imag) < 1e-12
    assert val.real == pytest.approx(np.linalg.norm(x) ** 2)


def test_is_hermitian_tolerance():
    m = hermitian(0, 3)
    assert is_hermitian(m)
    m[0, 1] += 1e-6
    assert not is_hermitian(m)


def test_superoperator_sandwich_and_compose():
    a, b, x = matrix(1, 3), matrix(2, 3), matrix(3, 3)
    s = SuperOperator.sandwich(a, b)
    np.testing.assert_allclose(s.apply(x), a @ x @ b, atol=1e-13)
    t = SuperOperator.sandwich(b, a)
    np.testing.assert_allclose(s.compose(t).apply(x), a @ b @ x @ a @ b, atol=1e-12)
    np.testing.assert_allclose(
        s.adjoint().apply(x), a.conj().T @ x @ b.conj().T, atol=1e-13
    )


def test_matrix_units_basis():
    units = matrix_units(3)
    assert units.shape == (9, 3, 3)
    np.testing.assert_array_equal(units.sum(axis=0), np.ones((3, 3)))
