import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import density, diag
from reclab.quantum import State, relative_entropy
from reclab.regularize import (
    a_P_by_quadrature,
    gaussian_density,
    gaussian_filter,
    gaussian_regularize,
    power_dominance,
    regularized_entropy_convergence,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.sampled_from([2, 3])
P_values = st.sampled_from([0.5, 1.0, 4.0, 16.0, 64.0])


def test_gaussian_density_has_filter_as_fourier_transform():
    k = np.linspace(-30, 30, 200001)
    P, x = 4.0, 1.7
    ft = np.trapezoid(gaussian_density(k, P) * np.exp(1j * k * x), k)
    assert ft == pytest.approx(gaussian_filter(x, P), abs=1e-10)


def test_equal_states_are_fixed():
    rho = density(3, 3)
    for P in (1.0, 16.0):
        reg = gaussian_regularize(rho, rho, P)
        np.testing.assert_allclose(reg.density, rho, atol=1e-12)
        np.testing.assert_allclose(reg.a_P, np.eye(3), atol=1e-10)
    rows = regularized_entropy_convergence(rho, rho, (1.0, 4.0))
    assert all(r.gap < 1e-12 and r.vector_distance < 1e-12 for r in rows)


def test_commuting_closed_form():
    lam, mu = np.array([0.6, 0.3, 0.1]), np.array([0.2, 0.5, 0.3])
    P = 3.0
    reg = gaussian_regularize(diag(*lam), diag(*mu), P)
    g = np.exp(-np.log(mu / lam) ** 2 / (2 * P))
    np.testing.assert_allclose(np.diag(reg.a_P).real, g, atol=1e-12)
    p = g**2 * lam / np.sum(g**2 * lam)
    np.testing.assert_allclose(np.diag(reg.density).real, p, atol=1e-12)
    s = np.sum(p * (np.log(p) - np.log(mu)))
    assert relative_entropy(reg.state, State(diag(*mu))) == pytest.approx(s, abs=1e-12)
    assert reg.majorization == pytest.approx(np.max(p / mu), rel=1e-9)


@given(seeds, dims, P_values)
def test_factorization_and_contraction(seed, n, P):
    reg = gaussian_regularize(density(seed, n), density(seed + 1, n), P)
    assert reg.factorization_residual() < 1e-9
    assert np.linalg.norm(reg.a_P, 2) <= 1 + 1e-9
    assert np.trace(reg.density).real == pytest.approx(1.0, abs=1e-12)
    assert np.isfinite(reg.majorization)


@given(seeds, st.sampled_from([1.0, 4.0, 16.0]))
def test_a_P_quadrature_matches_spectral_route(seed, P):
    rho, sigma = density(seed, 2), density(seed + 1, 2)
    reg = gaussian_regularize(rho, sigma, P)
    np.testing.assert_allclose(a_P_by_quadrature(rho, sigma, P), reg.a_P, atol=1e-9)


@given(seeds, P_values)
def test_dominance(seed, P):
    reg = gaussian_regularize(density(seed, 2), density(seed + 1, 2), P)
    for alpha in (0.25, 0.5, 0.75):
        assert power_dominance(reg, alpha) >= -1e-8


@given(seeds, dims)
def test_vector_distance_decreases(seed, n):
    rows = regularized_entropy_convergence(density(seed, n), density(seed + 1, n), (1.0, 4.0, 16.0, 64.0, 256.0))
    dist = [r.vector_distance for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(dist, dist[1:]))


@given(seeds)
def test_entropy_gap_eventually_shrinks(seed):
    rows = regularized_entropy_convergence(density(seed, 2), density(seed + 1, 2), (64.0, 256.0, 1024.0, 4096.0))
    assert rows[-1].gap <= rows[0].gap + 1e-12
    assert rows[-1].gap < 0.05


def test_singular_state_in_faithful_reference():
    rho, sigma = density(5, 3, rank=2), density(6, 3)
    rows = regularized_entropy_convergence(rho, sigma, (1.0, 16.0, 256.0, 4096.0))
    assert rows[-1].gap < rows[0].gap
    assert rows[-1].vector_distance < rows[0].vector_distance


def test_support_violation_raises():
    with pytest.raises(ValueError, match="not supported"):
        gaussian_regularize(density(1, 3), density(2, 3, rank=2), 4.0)
    with pytest.raises(ValueError):
        gaussian_regularize(density(1, 2), density(2, 2), 0.0)
