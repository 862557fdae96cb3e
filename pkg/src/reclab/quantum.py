"""States, the standard form of M_n, relative modular operators and entropy.

The standard form of ``M_n`` is the Hilbert space of ``n x n`` matrices with
the Hilbert-Schmidt inner product, the algebra acting by left
multiplication and its commutant by right multiplication. A state with
density ``rho`` is represented in the natural cone by ``rho**(1/2)``, the
modular conjugation is ``X -> X^dagger`` and the relative modular operator
of a pair acts as ``X -> rho_eta X rho_psi^{-1}``. All entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matcore import (
    SpectralDecomposition,
    SuperOperator,
    eig_hermitian,
    hermitian_part,
    hs_inner,
    is_hermitian,
)

PSD_TOL = 1e-11
INFINITY_MASS = 1e-10


@dataclass(frozen=True, eq=False)
class State:
    """Positive functional on ``M_n`` given by its density.

    Unit trace is not required: non-normalized functionals such as the
    ``gamma_t`` of the recovery bound are ``State`` objects too.
    """

    density: np.ndarray
    spec: SpectralDecomposition = field(init=False, repr=False)

    def __post_init__(self):
        rho = np.asarray(self.density, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density must be square, got {rho.shape}")
        if not is_hermitian(rho, 1e-9):
            raise ValueError("density is not Hermitian")
        rho = hermitian_part(rho)
        spec = eig_hermitian(rho)
        lmax = max(spec.eigenvalues[-1], 0.0)
        if spec.eigenvalues[0] < -PSD_TOL * max(lmax, 1.0):
            raise ValueError(f"density is not positive: min eigenvalue {spec.eigenvalues[0]:.3e}")
        object.__setattr__(self, "density", rho)
        object.__setattr__(self, "spec", spec)

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.density).real)

    @property
    def support_rank(self) -> int:
        return self.spec.support_rank

    @property
    def is_faithful(self) -> bool:
        return self.spec.is_faithful

    def power(self, z: complex) -> np.ndarray:
        return self.spec.power(z)

    def support(self) -> np.ndarray:
        return self.spec.projector()

    def expect(self, a) -> complex:
        return complex(np.trace(self.density @ np.asarray(a)))

    def normalized(self) -> "State":
        return State(self.density / self.trace)


def as_state(x) -> State:
    return x if isinstance(x, State) else State(np.asarray(x))


@dataclass(frozen=True, eq=False)
class GnsVector:
    """Vector ``vec(X)`` of the standard form of ``M_n``.

    It induces the functional ``a -> Tr[X^dagger a X]`` on the algebra, whose
    density is ``X X^dagger``.
    """

    amplitude: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitude", np.asarray(self.amplitude, dtype=complex))

    @property
    def dim(self) -> int:
        return self.amplitude.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitude))

    def inner(self, other: "GnsVector") -> complex:
        return hs_inner(self.amplitude, other.amplitude)

    def functional_density(self) -> np.ndarray:
        x = self.amplitude
        return x @ x.conj().T

    def commutant_density(self) -> np.ndarray:
        x = self.amplitude
        return x.conj().T @ x

    def act(self, a) -> "GnsVector":
        """Algebra element acting by left multiplication."""
        return GnsVector(np.asarray(a) @ self.amplitude)


def natural_cone_vector(rho) -> GnsVector:
    return GnsVector(as_state(rho).power(0.5))


def modular_conjugation(x: GnsVector) -> GnsVector:
    return GnsVector(x.amplitude.conj().T)


@dataclass(frozen=True, eq=False)
class ModularPair:
    """Relative modular data for ``Delta_{eta,psi}``: ``X -> rho_eta X rho_psi^{-1}``."""

    eta: State
    psi: State

    @property
    def support_compatible(self) -> bool:
        """Whether ``supp rho_psi`` lies inside ``supp rho_eta``."""
        return _mass_outside(self.psi, self.eta) <= INFINITY_MASS

    def power(self, z: complex) -> SuperOperator:
        return SuperOperator.sandwich(self.eta.power(z), self.psi.power(-z))

    def apply(self, z: complex, x: GnsVector) -> GnsVector:
        return GnsVector(self.eta.power(z) @ x.amplitude @ self.psi.power(-z))


def rel_modular_apply(pair: ModularPair, z: complex, x: GnsVector) -> GnsVector:
    return pair.apply(z, x)


def tomita(pair: ModularPair, x: GnsVector) -> GnsVector:
    """Relative Tomita operator ``S_{eta,psi} = J Delta_{eta,psi}^{1/2}``."""
    return modular_conjugation(pair.apply(0.5, x))


def connes_cocycle(psi, eta, t: float) -> np.ndarray:
    """``(D psi : D eta)_t = rho_psi^{it} rho_eta^{-it}`` with pseudo-powers."""
    psi, eta = as_state(psi), as_state(eta)
    return psi.power(1j * t) @ eta.power(-1j * t)


def modular_flow(sigma, t: float, a) -> np.ndarray:
    sigma = as_state(sigma)
    return sigma.power(1j * t) @ np.asarray(a) @ sigma.power(-1j * t)


def _mass_outside(rho: State, sigma: State) -> float:
    """Weight of ``rho`` on the kernel of ``sigma``."""
    outside = np.eye(sigma.dim) - sigma.support()
    return float(np.trace(rho.density @ outside).real)


def relative_entropy(rho, sigma) -> float:
    """``Tr[rho (log rho - log sigma)]`` in nats; ``inf`` off support."""
    rho, sigma = as_state(rho), as_state(sigma)
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    if _mass_outside(rho, sigma) > INFINITY_MASS:
        return np.inf
    w = rho.spec.eigenvalues[rho.spec.support_mask]
    neg_entropy = float(np.sum(w * np.log(w)))
    cross = float(np.trace(rho.density @ sigma.spec.log()).real)
    return neg_entropy - cross


def relative_entropy_via_cocycle(rho, sigma, h: float = 1e-4) -> float:
    """Entropy from the derivative of the Connes cocycle at ``t = 0``.

    Uses ``S = -i d/dt rho((D rho : D sigma)_t)``, evaluated by a central
    difference with step ``h``. Independent of :func:`relative_entropy`.
    """
    rho, sigma = as_state(rho), as_state(sigma)
    if _mass_outside(rho, sigma) > INFINITY_MASS:
        raise ValueError("relative entropy is infinite; cocycle derivative undefined")

    def f(t):
        return rho.expect(connes_cocycle(rho, sigma, t))

    deriv = (f(h) - f(-h)) / (2 * h)
    return float((-1j * deriv).real)


def relative_entropy_alpha_limit(rho, sigma, alpha: float = 1e-5) -> float:
    """Diagnostic ``-(<xi|Delta^alpha_{sigma,rho} xi> - 1)/alpha`` at small alpha."""
    rho, sigma = as_state(rho), as_state(sigma)
    xi = natural_cone_vector(rho)
    moved = ModularPair(sigma, rho).apply(alpha, xi)
    return float(-((xi.inner(moved)).real - rho.trace) / alpha)


def majorization_constant(rho, sigma) -> float:
    """Smallest ``c`` with ``rho <= c sigma``; ``inf`` off support."""
    rho, sigma = as_state(rho), as_state(sigma)
    if _mass_outside(rho, sigma) > INFINITY_MASS:
        return np.inf
    s = sigma.power(-0.5)
    m = hermitian_part(s @ rho.density @ s)
    return float(np.linalg.eigvalsh(m)[-1])
