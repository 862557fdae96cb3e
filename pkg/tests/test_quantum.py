import numpy as np
import pytest
from hypothesis import given, strategies as st

from reclab.quantum import (
    GnsVector,
    ModularPair,
    State,
    connes_cocycle,
    majorization_constant,
    modular_conjugation,
    modular_flow,
    natural_cone_vector,
    rel_modular_apply,
    relative_entropy,
    relative_entropy_alpha_limit,
    relative_entropy_via_cocycle,
    tomita,
)

from conftest import density, diag, matrix

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 4)
KL_DIAG = 0.5 * np.log(4.0 / 3.0)  # sum p log(p/q) for p=(1/2,1/2), q=(1/4,3/4)


def test_state_rejects_bad_input():
    with pytest.raises(ValueError):
        State(diag(1, -0.5))
    with pytest.raises(ValueError):
        State(np.array([[1, 1j], [0, 0]]))
    with pytest.raises(ValueError):
        State(np.ones((2, 3)))


def test_natural_cone_examples():
    np.testing.assert_allclose(natural_cone_vector(diag(1, 0)).amplitude, diag(1, 0))
    np.testing.assert_allclose(natural_cone_vector(np.eye(3) / 3).amplitude, np.eye(3) / np.sqrt(3))


@given(seeds, dims)
def test_natural_cone_squares_to_density(seed, n):
    rho = density(seed, n)
    x = natural_cone_vector(rho).amplitude
    np.testing.assert_allclose(x @ x, rho, atol=1e-10)
    np.testing.assert_allclose(x, x.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(x)[0] > -1e-12


def test_gns_norm_and_density():
    x = GnsVector(matrix(0, 3))
    assert x.norm ** 2 == pytest.approx(np.trace(x.functional_density()).real)


def test_modular_zero_power_is_identity():
    pair = ModularPair(State(density(1, 3)), State(density(2, 3)))
    x = GnsVector(matrix(3, 3))
    np.testing.assert_allclose(rel_modular_apply(pair, 0, x).amplitude, x.amplitude, atol=1e-13)


@given(seeds)
def test_tomita_relation(seed):
    rho = State(density(seed, 3))
    a = matrix(seed + 1, 3)
    pair = ModularPair(rho, rho)
    x = GnsVector(a @ rho.power(0.5))
    np.testing.assert_allclose(tomita(pair, x).amplitude, a.conj().T @ rho.power(0.5), atol=1e-10)


@given(seeds, st.floats(-4, 4))
def test_imaginary_modular_power_preserves_norm(seed, t):
    pair = ModularPair(State(density(seed, 3)), State(density(seed + 1, 3)))
    x = GnsVector(matrix(seed + 2, 3))
    assert rel_modular_apply(pair, 1j * t, x).norm == pytest.approx(x.norm, rel=1e-12)


def test_modular_conjugation_properties():
    rho = density(0, 3)
    xi = natural_cone_vector(rho)
    np.testing.assert_allclose(modular_conjugation(xi).amplitude, xi.amplitude, atol=1e-14)
    x, y = GnsVector(matrix(1, 3)), GnsVector(matrix(2, 3))
    jix = modular_conjugation(GnsVector(1j * x.amplitude)).amplitude
    np.testing.assert_allclose(jix, -1j * modular_conjugation(x).amplitude)
    lhs = modular_conjugation(x).inner(modular_conjugation(y))
    assert lhs == pytest.approx(np.conj(x.inner(y)))


def test_cocycle_examples():
    rho = State(density(0, 3))
    np.testing.assert_allclose(connes_cocycle(rho, rho, 1.7), np.eye(3), atol=1e-12)
    sing = State(density(1, 3, rank=2))
    np.testing.assert_allclose(connes_cocycle(rho, sing, 0.0), sing.support(), atol=1e-12)
    p, q = np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.1, 0.3])
    t = 0.8
    np.testing.assert_allclose(
        connes_cocycle(np.diag(p), np.diag(q), t), np.diag(p ** (1j * t) * q ** (-1j * t)), atol=1e-14
    )


@given(seeds, st.floats(-3, 3))
def test_cocycle_chain_identity(seed, t):
    psi, eta = State(density(seed, 3, rank=2)), State(density(seed + 1, 3))
    prod = connes_cocycle(psi, eta, t) @ connes_cocycle(eta, psi, t)
    np.testing.assert_allclose(prod, psi.support(), atol=1e-10)


def test_relative_entropy_examples():
    rho = density(0, 3)
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-13)
    assert relative_entropy(diag(0.5, 0.5), diag(0.25, 0.75)) == pytest.approx(0.1438410362258904, abs=1e-12)
    assert relative_entropy(diag(1, 0), diag(0, 1)) == np.inf


@given(seeds, dims)
def test_relative_entropy_nonnegative(seed, n):
    assert relative_entropy(density(seed, n), density(seed + 1, n)) >= -1e-10


def test_relative_entropy_via_cocycle_examples():
    assert relative_entropy_via_cocycle(diag(0.5, 0.5), diag(0.25, 0.75)) == pytest.approx(KL_DIAG, abs=1e-6)
    rho = density(0, 3)
    assert relative_entropy_via_cocycle(rho, rho) == pytest.approx(0.0, abs=1e-12)


@given(seeds, dims)
def test_cocycle_derivative_matches_closed_form(seed, n):
    rho, sigma = density(seed, n), density(seed + 1, n)
    assert abs(relative_entropy_via_cocycle(rho, sigma) - relative_entropy(rho, sigma)) <= 1e-5


def test_alpha_limit_diagnostic_close():
    rho, sigma = density(4, 3), density(5, 3)
    assert relative_entropy_alpha_limit(rho, sigma) == pytest.approx(relative_entropy(rho, sigma), abs=1e-3)


@given(seeds)
def test_delta_quadratic_form(seed):
    rho, sigma = State(density(seed, 3)), State(density(seed + 1, 3))
    a = matrix(seed + 2, 3)
    x = GnsVector(a @ sigma.power(0.5))
    form = x.inner(ModularPair(rho, sigma).apply(1.0, x))
    expected = np.trace(rho.density @ a @ sigma.support() @ a.conj().T)
    assert form == pytest.approx(expected, abs=1e-10)


def test_majorization_examples():
    rho = density(0, 3)
    assert majorization_constant(rho, rho) == pytest.approx(1.0)
    assert majorization_constant(diag(0.9, 0.1), diag(0.5, 0.5)) == pytest.approx(1.8)
    assert majorization_constant(diag(1, 0), diag(0, 1)) == np.inf


def test_modular_flow_examples():
    sigma, a = State(density(0, 3)), matrix(1, 3)
    np.testing.assert_allclose(modular_flow(sigma, 0.0, a), a, atol=1e-13)
    comm = sigma.density @ sigma.density
    np.testing.assert_allclose(modular_flow(sigma, 2.3, comm), comm, atol=1e-12)


@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_modular_flow_group_law(seed, t, s):
    sigma, a = State(density(seed, 3)), matrix(seed + 1, 3)
    lhs = modular_flow(sigma, t, modular_flow(sigma, s, a))
    np.testing.assert_allclose(lhs, modular_flow(sigma, t + s, a), atol=1e-10)
