"""Fidelity, weighted L_q norms relative to the commutant, sandwiched Renyi divergences.

For a vector ``vec(X)`` of the standard form and a reference density
``rho`` the weighted norm for ``q`` in ``[1, 2]`` is

    ||X||_{q,rho}^q = Tr[(rho^r X X^dagger rho^r)^{q/2}],   r = (2 - q) / (2 q),

with pseudo-powers of ``rho``. At ``q = 2`` this is the Hilbert-Schmidt
norm of ``X`` and at ``q = 1`` it is the fidelity between ``X X^dagger`` and
``rho``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import minimize

from .matcore import eig_hermitian, hermitian_part, trace_norm
from .quantum import GnsVector, State, as_state, relative_entropy

Kind = Literal["fidelity", "am_norm", "sandwiched", "trace_distance"]


@dataclass(frozen=True)
class Divergence:
    """A computed divergence value together with its parameters."""

    kind: Kind
    value: float
    parameter: float | None = None
    support_flag: bool = False


def _density(x) -> np.ndarray:
    return x.density if isinstance(x, State) else np.asarray(x)


def _psd_trace_power(m, power: float) -> float:
    """``Tr[m^power]`` for a PSD matrix, negative roundoff eigenvalues clipped."""
    w = np.clip(np.linalg.eigvalsh(hermitian_part(m)), 0.0, None)
    return float(np.sum(w**power))


def fidelity(rho, tau) -> float:
    """Square-root fidelity ``Tr[(tau^{1/2} rho tau^{1/2})^{1/2}]``.

    Either argument may be an unnormalized positive functional. Computed as
    the trace norm of ``rho^{1/2} tau^{1/2}``, which is symmetric.
    """
    a = as_state(_density(rho)).power(0.5)
    b = as_state(_density(tau)).power(0.5)
    return trace_norm(a @ b)


def am_norm(zeta, psi, q: float) -> float:
    """Weighted ``L_q`` norm of ``zeta`` relative to the commutant, ``q`` in ``[1, 2]``.

    ``zeta`` is a :class:`GnsVector` or its amplitude matrix, ``psi`` a state.
    Components of ``zeta`` outside the support of ``psi`` are projected away
    for ``q < 2`` (pseudo-power convention); use :func:`am_norm_support_flag`
    to detect that case.
    """
    if not 1.0 <= q <= 2.0:
        raise ValueError(f"q must lie in [1, 2], got {q}")
    x = zeta.amplitude if isinstance(zeta, GnsVector) else np.asarray(zeta)
    if q == 2.0:
        return float(np.linalg.norm(x))
    psi = as_state(_density(psi))
    r = (2.0 - q) / (2.0 * q)
    # Tr[(y y^dagger)^{q/2}] from singular values, which stay accurate near zero
    sv = np.linalg.svd(psi.power(r) @ x, compute_uv=False)
    return float(np.sum(sv**q) ** (1.0 / q))


def am_norm_support_flag(zeta, psi, tol: float = 1e-10) -> bool:
    """True when ``zeta X zeta^dagger`` carries weight off the support of ``psi``."""
    x = zeta.amplitude if isinstance(zeta, GnsVector) else np.asarray(zeta)
    psi = as_state(_density(psi))
    outside = np.eye(psi.dim) - psi.support()
    return float(np.linalg.norm(outside @ x) ** 2) > tol * max(float(np.linalg.norm(x) ** 2), 1e-300)


def am_norm_variational(zeta, psi, q: float, grid: int = 41, seed: int = 0) -> float:
    """Brute-force weighted norm for ``M_2``, used as an oracle.

    Minimizes ``||Delta_{phi,psi}^{1/2 - 1/q} zeta||`` over faithful states
    ``phi`` of the commutant, i.e. ``||rho_psi^{r} X tau^{-r}||_F`` over
    faithful qubit densities ``tau`` with ``r = 1/q - 1/2``. A coarse grid
    over the Bloch ball is refined with Nelder-Mead.
    """
    if not 1.0 <= q <= 2.0:
        raise ValueError(f"q must lie in [1, 2], got {q}")
    x = zeta.amplitude if isinstance(zeta, GnsVector) else np.asarray(zeta)
    rho = as_state(_density(psi))
    if rho.dim != 2:
        raise ValueError("the variational oracle is implemented for M_2 only")
    r = 1.0 / q - 0.5
    left = rho.power(r) @ x
    paulis = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])

    def objective(h):
        h = np.asarray(h)
        # tau = exp(h . sigma) / Tr, so tau^{-r} = exp(-r h . sigma) Tr^r
        norm_h = np.linalg.norm(h)
        gen = np.einsum("k,kij->ij", h, paulis)
        tr = 2.0 * np.cosh(norm_h)
        spec = eig_hermitian(gen)
        inv_pow = spec.apply(lambda w: np.exp(-r * w)) * tr**r
        return float(np.linalg.norm(left @ inv_pow))

    rng = np.random.default_rng(seed)
    best_h, best = np.zeros(3), objective(np.zeros(3))
    radii = np.linspace(0.0, 12.0, grid)
    dirs = rng.standard_normal((grid, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for rad in radii[1:]:
        for d in dirs:
            v = objective(rad * d)
            if v < best:
                best, best_h = v, rad * d
    for _ in range(3):
        res = minimize(objective, best_h, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000})
        if res.fun <= best:
            best, best_h = float(res.fun), res.x
    return best


def sandwiched_renyi(rho, sigma, s: float) -> float:
    """``D_s(rho|sigma) = log Tr[(sigma^r rho sigma^r)^s] / (s - 1)``, ``r = (1-s)/(2s)``.

    Defined for ``s`` in ``(1/2, 1)``. For such ``s`` the trace is finite even
    when ``rho`` is not supported in ``sigma``; the value is ``+inf`` only
    when the trace vanishes.
    """
    if not 0.5 < s < 1.0:
        raise ValueError(f"s must lie in (1/2, 1), got {s}")
    rho_m = _density(rho)
    sigma_s = as_state(_density(sigma))
    r = (1.0 - s) / (2.0 * s)
    h = sigma_s.power(r)
    quantity = _psd_trace_power(h @ rho_m @ h, s)
    if quantity <= 0.0:
        return np.inf
    return float(np.log(quantity) / (s - 1.0))


def sandwiched_from_norm(zeta, psi, s: float) -> float:
    """``D_s`` of the functional of ``zeta`` against ``psi`` via ``am_norm`` at ``q = 2s``."""
    nrm = am_norm(zeta, psi, 2.0 * s)
    if nrm <= 0.0:
        return np.inf
    return float(2.0 * s * np.log(nrm) / (s - 1.0))


def functional_norm_distance(rho, tau) -> float:
    """Norm of the difference of two functionals: trace norm of the density difference."""
    return trace_norm(_density(rho) - _density(tau))


def divergence(kind: Kind, a, b, parameter: float | None = None) -> Divergence:
    """Uniform entry point returning a :class:`Divergence` record."""
    if kind == "fidelity":
        return Divergence(kind, fidelity(a, b))
    if kind == "am_norm":
        return Divergence(kind, am_norm(a, b, parameter), parameter, am_norm_support_flag(a, b))
    if kind == "sandwiched":
        return Divergence(kind, sandwiched_renyi(a, b, parameter), parameter)
    if kind == "trace_distance":
        return Divergence(kind, functional_norm_distance(a, b))
    raise ValueError(f"unknown divergence kind {kind!r}")


def squeeze_bounds(zeta, psi, p: float) -> tuple[float, float, float]:
    """``(|<zeta, xi_psi>|, ||zeta||_{p,psi}, ||Delta_{psi,zeta}^{1/p-1/2} zeta||)``.

    For unit vectors the three values are non-decreasing. The upper bound is
    ``||rho_psi^{r} X (X^dagger X)^{-r}||_F`` with ``r = 1/p - 1/2``.
    """
    x = zeta.amplitude if isinstance(zeta, GnsVector) else np.asarray(zeta)
    rho = as_state(_density(psi))
    r = 1.0 / p - 0.5
    lower = abs(np.trace(x.conj().T @ rho.power(0.5)))
    comm = State(hermitian_part(x.conj().T @ x))
    upper = float(np.linalg.norm(rho.power(r) @ x @ comm.power(-r)))
    return float(lower), am_norm(x, rho, p), upper


def relative_entropy_bound_chain(rho, sigma, s_values=(0.6, 0.75, 0.9)) -> list[float]:
    """``[D_s for s in s_values] + [S]``; non-decreasing for unit-trace pairs."""
    return [sandwiched_renyi(rho, sigma, s) for s in s_values] + [relative_entropy(rho, sigma)]
