"""Gaussian regularization of a state relative to a reference.

For densities ``rho`` (state) and ``sigma`` (reference) on ``M_n`` the
regularized vector is

    psi_P = g_P(log Delta_{sigma,rho}) rho^{1/2} / norm,   g_P(x) = exp(-x^2 / (2P)).

In the eigenbases ``sigma = U diag(mu) U^dagger`` and
``rho = V diag(lam) V^dagger`` the operator ``log Delta_{sigma,rho}`` is
diagonal with entries ``log mu_i - log lam_j``, so ``g_P`` acts entrywise on
``U^dagger rho^{1/2} V``. The unnormalized vector equals ``a_P rho^{1/2}``
with ``a_P = int g(k) sigma^{ik} rho^{-ik} dk`` for the unit-mass Gaussian
``g(k) = sqrt(P / 2 pi) exp(-P k^2 / 2)``, hence ``||a_P|| <= 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import hermitian_part
from .quadrature import QuadratureSpec, integrate
from .quantum import GnsVector, State, _mass_outside, as_state, majorization_constant, relative_entropy

DEFAULT_P_GRID = (1.0, 4.0, 16.0, 64.0, 256.0)


def gaussian_filter(x, P: float) -> np.ndarray:
    return np.exp(-np.asarray(x) ** 2 / (2.0 * P))


def gaussian_density(k, P: float) -> np.ndarray:
    """Unit-mass Gaussian whose Fourier transform is :func:`gaussian_filter`."""
    return np.sqrt(P / (2.0 * np.pi)) * np.exp(-P * np.asarray(k) ** 2 / 2.0)


@dataclass(frozen=True, eq=False)
class RegularizedState:
    rho: State
    sigma: State
    P: float
    vector: GnsVector
    unnormalized_norm: float
    a_P: np.ndarray

    @property
    def density(self) -> np.ndarray:
        return hermitian_part(self.vector.functional_density())

    @property
    def state(self) -> State:
        return State(self.density)

    @property
    def majorization(self) -> float:
        """Smallest ``c_P`` with ``omega_{psi_P} <= c_P omega_sigma``."""
        return majorization_constant(self.state, self.sigma)

    def factorization_residual(self) -> float:
        """``||a_P rho^{1/2} - unnormalized vector||`` (entry max)."""
        target = self.vector.amplitude * self.unnormalized_norm
        return float(np.abs(self.a_P @ self.rho.power(0.5) - target).max())


def gaussian_regularize(rho, sigma, P: float) -> RegularizedState:
    """Regularized state ``psi_P`` together with ``a_P`` (see module docstring)."""
    if P <= 0:
        raise ValueError("P must be positive")
    rho, sigma = as_state(rho), as_state(sigma)
    if _mass_outside(rho, sigma) > 1e-10:
        raise ValueError("rho is not supported in sigma; regularization undefined")
    ss, sr = sigma.spec, rho.spec
    u, v = ss.eigenvectors, sr.eigenvectors
    gaps = ss.log_support()[:, None] - sr.log_support()[None, :]
    mask = ss.support_mask[:, None] & sr.support_mask[None, :]
    filt = np.where(mask, gaussian_filter(gaps, P), 0.0)
    coords = u.conj().T @ rho.power(0.5) @ v
    raw = u @ (filt * coords) @ v.conj().T
    nrm = float(np.linalg.norm(raw))
    a_p = raw @ rho.power(-0.5)
    return RegularizedState(rho, sigma, float(P), GnsVector(raw / nrm), nrm, a_p)


def a_P_by_quadrature(rho, sigma, P: float, quad: QuadratureSpec | None = None,
                      cert_tol: float = 1e-11) -> np.ndarray:
    """``int g(k) sigma^{ik} rho^{-ik} dk`` by Gauss-Legendre quadrature.

    Independent of :func:`gaussian_regularize`; the integration range is
    ``|k| <= 9 / sqrt(P)``, outside which the Gaussian mass is below 1e-18.
    """
    rho, sigma = as_state(rho), as_state(sigma)
    quad = quad or QuadratureSpec(t_max=1.0, panels=8, nodes_per_panel=16)
    half = 9.0 / np.sqrt(P)

    def f(ks):
        return sigma.spec.power_batch(1j * ks) @ rho.spec.power_batch(-1j * ks)

    res = integrate(f, quad, weight=lambda k: gaussian_density(k, P), cert_tol=cert_tol,
                    lo=-half, hi=half)
    return res.value


def power_dominance(reg: RegularizedState, alpha: float) -> float:
    """Smallest eigenvalue of ``Delta_{psi_P,sigma}^alpha - N^{-2 alpha} a_P Delta_{rho,sigma}^alpha a_P^dagger``.

    Both sides are superoperators on the standard form (``Delta_{x,sigma}``
    acts as ``X -> x X sigma^{-1}``, ``a_P`` by left multiplication) and
    ``N = ||a_P rho^{1/2}||``.
    """
    rho_p = reg.state
    a = reg.a_P
    right_factor = reg.sigma.power(-alpha)
    left_diff = rho_p.power(alpha) - reg.unnormalized_norm ** (-2 * alpha) * a @ reg.rho.power(alpha) @ a.conj().T
    diff = np.kron(right_factor.T, hermitian_part(left_diff))
    return float(np.linalg.eigvalsh(hermitian_part(diff))[0])


@dataclass(frozen=True)
class ConvergenceRow:
    P: float
    entropy: float
    gap: float
    vector_distance: float


def regularized_entropy_convergence(rho, sigma, P_grid=DEFAULT_P_GRID) -> list[ConvergenceRow]:
    """Table of ``S(psi_P|sigma)`` and its distance to ``S(rho|sigma)`` along ``P_grid``."""
    rho, sigma = as_state(rho), as_state(sigma)
    target = relative_entropy(rho, sigma)
    xi = rho.power(0.5)
    rows = []
    for P in P_grid:
        reg = gaussian_regularize(rho, sigma, P)
        s = relative_entropy(reg.state, sigma)
        rows.append(ConvergenceRow(float(P), s, abs(s - target), float(np.linalg.norm(reg.vector.amplitude - xi))))
    return rows
