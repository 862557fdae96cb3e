import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from reclab.quadrature import (
    QuadratureError,
    QuadratureSpec,
    integrate,
    recovery_weight,
    recovery_weight_cdf,
    recovery_weight_fourier,
    tail_mass_bound,
)


def test_weight_forms_agree():
    t = np.linspace(-3, 3, 41)
    np.testing.assert_allclose(recovery_weight(t), np.pi / (1 + np.cosh(2 * np.pi * t)), rtol=1e-13)


def test_weight_is_cdf_derivative():
    t, h = np.linspace(-2, 2, 17), 1e-5
    deriv = (recovery_weight_cdf(t + h) - recovery_weight_cdf(t - h)) / (2 * h)
    np.testing.assert_allclose(deriv, recovery_weight(t), rtol=1e-8, atol=1e-9)


def test_weight_normalized():
    res = integrate(lambda t: np.ones_like(t), QuadratureSpec(), cert_tol=1e-13)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert recovery_weight_cdf(8.0) - recovery_weight_cdf(-8.0) == pytest.approx(1.0, abs=1e-20)


def test_tail_bound():
    mass, _ = quad(recovery_weight, 8, np.inf)
    # the bound is asymptotically tight, so allow quad's relative error
    assert 2 * mass <= tail_mass_bound(8.0) * (1 + 1e-8)
    assert tail_mass_bound(8.0) < 4e-22


@pytest.mark.parametrize("omega", [0.0, 1e-9, 0.5, 3.0, -7.0])
def test_fourier_transform_against_scipy(omega):
    val, _ = quad(lambda t: recovery_weight(t) * np.cos(omega * t), -np.inf, np.inf, limit=200)
    assert recovery_weight_fourier(omega) == pytest.approx(val, abs=1e-10)


@given(st.floats(-6, 6))
def test_oscillatory_integral_certified(omega):
    res = integrate(lambda t: np.exp(1j * omega * t), QuadratureSpec())
    assert res.residual < 1e-10
    assert res.value == pytest.approx(recovery_weight_fourier(omega), abs=1e-10)


def test_nodes_and_doubling():
    spec = QuadratureSpec(t_max=2.0, panels=4, nodes_per_panel=8)
    t, w = spec.nodes_weights()
    assert t.size == 32 and np.all(np.abs(t) < 2)
    assert w.sum() == pytest.approx(4.0)
    assert spec.doubled().nodes_per_panel == 16


def test_quadrature_error_when_not_convergent():
    rough = QuadratureSpec(t_max=8.0, panels=1, nodes_per_panel=4)
    with pytest.raises(QuadratureError) as info:
        integrate(lambda t: np.exp(1j * 400 * t), rough, cert_tol=1e-14)
    assert info.value.residual > 0


def test_invalid_spec():
    with pytest.raises(ValueError):
        QuadratureSpec(panels=0)
    with pytest.raises(ValueError):
        QuadratureSpec(rule="simpson")


def test_kink_falls_back_to_bisection():
    # |t - 0.3| defeats node doubling; panel bisection resolves it
    res = integrate(lambda t: np.abs(t - 0.3), QuadratureSpec())
    ref = quad(lambda t: recovery_weight(t) * (0.3 - t), -8, 0.3, epsabs=1e-14)[0]
    ref += quad(lambda t: recovery_weight(t) * (t - 0.3), 0.3, 8, epsabs=1e-14)[0]
    assert res.value == pytest.approx(ref, abs=1e-12)
    assert res.residual < 1e-10


def test_bisection_handles_vector_values():
    f = lambda t: np.stack([np.abs(t), np.abs(t + 1.0) * 1j], axis=1)
    res = integrate(f, QuadratureSpec())
    assert res.value.shape == (2,)
    assert res.value[0] == pytest.approx(2 * quad(lambda t: recovery_weight(t) * t, 0, 8)[0], abs=1e-11)
