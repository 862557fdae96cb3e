"""Petz (KMS) adjoint, rotated Petz maps and the averaged recovery channel.

For a channel ``T: M_m -> M_n`` and a reference density ``sigma_A`` on
``M_n`` put ``sigma_B = predual(sigma_A)``. The KMS adjoint is

    T+(a) = sigma_B^{-1/2} T*(sigma_A^{1/2} a sigma_A^{1/2}) sigma_B^{-1/2},

with ``T*`` the Hilbert-Schmidt adjoint, and the rotated Petz map is

    alpha^t(a) = sigma_B^{it} T+(sigma_A^{-it} a sigma_A^{it}) sigma_B^{-it}.

The recovery channel is the ``p(t)``-average of ``alpha^t``. Everything is
computed in the eigenbases of ``sigma_A`` and ``sigma_B``, where the modular
flows are diagonal phases: ``alpha^t`` there is a fixed matrix multiplied
entrywise by ``exp(i t Omega)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .channels import Channel, theta
from .matcore import SuperOperator
from .quadrature import DEFAULT_CERT_TOL, QuadratureSpec, integrate, recovery_weight_fourier
from .quantum import State, as_state


class SupportWarning(UserWarning):
    """A reference state is not faithful and pseudo-inverses were used."""


def _basis_change(u: np.ndarray) -> np.ndarray:
    # vec(U^dagger x U) = kron(U^T, U^dagger) vec(x)
    return np.kron(u.T, u.conj().T)


@dataclass(frozen=True, eq=False)
class RecoverySpec:
    """Channel, reference state on the output algebra and quadrature settings."""

    channel: Channel
    sigma_A: State
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    sigma_B: State = field(init=False)
    support_reduced: bool = field(init=False)

    def __post_init__(self):
        sigma_A = as_state(self.sigma_A)
        if sigma_A.dim != self.channel.out_dim:
            raise ValueError("reference state does not live on the channel's output algebra")
        sigma_B = State(self.channel.predual(sigma_A.density))
        reduced = not (sigma_A.is_faithful and sigma_B.is_faithful)
        object.__setattr__(self, "sigma_A", sigma_A)
        object.__setattr__(self, "sigma_B", sigma_B)
        object.__setattr__(self, "support_reduced", reduced)
        if reduced:
            warnings.warn(
                "reference state or its image is not faithful; the Petz map is "
                "computed on the supports", SupportWarning, stacklevel=2,
            )

    # -- eigen-coordinate data ---------------------------------------------
    def _phase_data(self):
        """``(M_tilde, Omega, W_A, W_B)`` with ``alpha^t = W_B^+ (M_tilde o e^{itOmega}) W_A``."""
        cached = self.__dict__.get("_phase_cache")
        if cached is not None:
            return cached
        sa, sb = self.sigma_A.spec, self.sigma_B.spec
        w_a = _basis_change(sa.eigenvectors)
        w_b = _basis_change(sb.eigenvectors)
        m_tilde = w_b @ kms_adjoint(self.channel, self.sigma_A, _quiet=True).superop.matrix @ w_a.conj().T
        la, lb = sa.log_support(), sb.log_support()
        n, m = self.channel.out_dim, self.channel.in_dim
        # column index k + n*l of the input, row index i + m*j of the output
        col = (la[:, None] - la[None, :]).reshape(-1, order="F")
        row = (lb[:, None] - lb[None, :]).reshape(-1, order="F")
        omega = row[:, None] - col[None, :]
        data = (m_tilde, omega, w_a, w_b)
        object.__setattr__(self, "_phase_cache", data)
        return data

    def rotated_petz_batch(self, ts) -> np.ndarray:
        """Choi matrices of ``alpha^t`` for an array of ``t``, shape ``(K, nm, nm)``."""
        m_tilde, omega, w_a, w_b = self._phase_data()
        ts = np.asarray(ts, dtype=float).reshape(-1)
        phases = np.exp(1j * ts[:, None, None] * omega[None])
        mats = w_b.conj().T @ (m_tilde[None] * phases) @ w_a
        return _choi_from_superop_batch(mats, self.channel.out_dim, self.channel.in_dim)


def _choi_from_superop_batch(mats: np.ndarray, n: int, m: int) -> np.ndarray:
    # superop maps M_n -> M_m here (A -> B), so Choi lives on C^m (x) C^n
    k = mats.shape[0]
    c4 = mats.reshape(k, m, m, n, n).transpose(0, 2, 4, 1, 3)
    return c4.reshape(k, m * n, m * n)


def kms_adjoint(T: Channel, sigma_A, _quiet: bool = False) -> Channel:
    """Petz dual ``T+: M_n -> M_m`` of ``T`` with respect to ``sigma_A``.

    If ``sigma_A`` or ``sigma_B`` is singular the inverse square roots are
    pseudo-inverses, which compresses the map to the supports; a
    :class:`SupportWarning` is emitted.
    """
    sigma_A = as_state(sigma_A)
    sigma_B = State(T.predual(sigma_A.density))
    if not _quiet and not (sigma_A.is_faithful and sigma_B.is_faithful):
        warnings.warn("Petz dual computed on the supports", SupportWarning, stacklevel=2)
    ha = sigma_A.power(0.5)
    hb_inv = sigma_B.power(-0.5)
    inner = SuperOperator.sandwich(ha, ha)
    outer = SuperOperator.sandwich(hb_inv, hb_inv)
    hs_adj = T.superop.adjoint()
    return Channel.from_superop(outer.compose(hs_adj).compose(inner))


def kms_inner(sigma, x, y) -> complex:
    """``<x, y>_sigma = Tr[sigma^{1/2} x^dagger sigma^{1/2} y]``."""
    h = as_state(sigma).power(0.5)
    return complex(np.trace(h @ np.asarray(x).conj().T @ h @ np.asarray(y)))


def kms_defining_residual(T: Channel, sigma_A, T_plus: Channel | None = None) -> float:
    """Max over matrix units of ``|<T+(a), b>_{sigma_B} - <a, T(b)>_{sigma_A}|``."""
    from .matcore import matrix_units

    sigma_A = as_state(sigma_A)
    sigma_B = T.predual(sigma_A.density)
    T_plus = kms_adjoint(T, sigma_A) if T_plus is None else T_plus
    err = 0.0
    for a in matrix_units(T.out_dim):
        ta = T_plus.apply(a)
        for b in matrix_units(T.in_dim):
            lhs = kms_inner(sigma_B, ta, b)
            rhs = kms_inner(sigma_A, a, T.apply(b))
            err = max(err, abs(lhs - rhs))
    return float(err)


def rotated_petz(spec: RecoverySpec, t: float) -> Channel:
    """``alpha^t`` assembled directly from the modular flows and ``T+``."""
    T_plus = kms_adjoint(spec.channel, spec.sigma_A, _quiet=True)
    flow_a = SuperOperator.sandwich(spec.sigma_A.power(-1j * t), spec.sigma_A.power(1j * t))
    flow_b = SuperOperator.sandwich(spec.sigma_B.power(1j * t), spec.sigma_B.power(-1j * t))
    return Channel.from_superop(flow_b.compose(T_plus.superop).compose(flow_a))


def petz_identity_residual(spec: RecoverySpec, t: float, alpha_t: Channel | None = None) -> float:
    """Residual of the implicit characterization of ``alpha^t``.

    For all ``b`` in ``M_m`` and ``a`` in ``M_n``,
    ``<b xi_B, J Delta_B^{-it} alpha^t(a) xi_B> = <T(b) xi_A, J Delta_A^{-it} a xi_A>``
    where ``xi = sigma^{1/2}``, ``J X = X^dagger`` and ``Delta^s X = sigma^s X sigma^{-s}``.
    Returns the largest deviation over matrix-unit pairs.
    """
    from .matcore import matrix_units

    alpha_t = rotated_petz(spec, t) if alpha_t is None else alpha_t
    T = spec.channel
    xa, xb = spec.sigma_A.power(0.5), spec.sigma_B.power(0.5)

    def side(sig: State, xi, left, x):
        moved = sig.power(-1j * t) @ x @ xi @ sig.power(1j * t)
        return np.vdot(left @ xi, moved.conj().T)

    err = 0.0
    for a in matrix_units(T.out_dim):
        aa = alpha_t.apply(a)
        for b in matrix_units(T.in_dim):
            lhs = side(spec.sigma_B, xb, b, aa)
            rhs = side(spec.sigma_A, xa, T.apply(b), a)
            err = max(err, abs(lhs - rhs))
    return float(err)


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    channel: Channel
    residual: float
    quadrature: QuadratureSpec


def averaged_recovery(spec: RecoverySpec, cert_tol: float = DEFAULT_CERT_TOL) -> RecoveryResult:
    """``alpha = int p(t) alpha^t dt`` by composite Gauss-Legendre quadrature.

    The Choi matrix is integrated entrywise; the certificate is the largest
    Choi change when the nodes per panel are doubled. Raises
    :class:`~reclab.quadrature.QuadratureError` if it cannot be met.
    """
    res = integrate(spec.rotated_petz_batch, spec.quadrature, cert_tol=cert_tol)
    ch = Channel(spec.channel.out_dim, spec.channel.in_dim, res.value)
    return RecoveryResult(ch, res.residual, res.spec)


def averaged_recovery_closed_form(spec: RecoverySpec) -> Channel:
    """Recovery channel from the Fourier transform of ``p``, without quadrature.

    Since ``int p(t) exp(i w t) dt = (w/2)/sinh(w/2)``, averaging multiplies
    each eigen-coordinate entry of ``alpha^t`` by that factor at its phase
    frequency. Used as an independent check of :func:`averaged_recovery`.
    """
    m_tilde, omega, w_a, w_b = spec._phase_data()
    mat = w_b.conj().T @ (m_tilde * recovery_weight_fourier(omega)) @ w_a
    choi = _choi_from_superop_batch(mat[None], spec.channel.out_dim, spec.channel.in_dim)[0]
    return Channel(spec.channel.out_dim, spec.channel.in_dim, choi)


def theta_conjugate(T: Channel, basis) -> Channel:
    """``Theta o T o Theta`` for entrywise conjugation ``Theta`` in ``basis``.

    ``Theta`` is anti-linear, so the composite is linear; both algebras must
    be ``M_n`` with the same basis.
    """
    if T.in_dim != T.out_dim:
        raise ValueError("theta conjugation needs a channel M_n -> M_n")
    return Channel.from_map(lambda a: theta(basis, T.apply(theta(basis, a))), T.in_dim, T.out_dim)


def recovered_density(T: Channel, recovery: Channel, rho_A) -> np.ndarray:
    """Density of ``omega o T o alpha``: push ``rho_A`` through both preduals."""
    rho = as_state(rho_A).density
    return recovery.predual(T.predual(rho))
