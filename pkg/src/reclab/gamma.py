"""Intertwiners, the interpolating vector Gamma(z) and the inequality checkers.

An instance is a channel ``T: M_m -> M_n`` together with densities
``rho_A`` (the state) and ``sigma_A`` (the reference) on ``M_n``. Their
images ``rho_B``, ``sigma_B`` on ``M_m`` are the preduals. In the standard
form the vector of ``rho`` is ``rho^{1/2}`` and the relative modular
operator ``Delta_{sigma,rho}`` acts as ``X -> sigma X rho^{-1}``, so

    Gamma(z) = sigma_A^z T(sigma_B^{-z} rho_B^z) rho_A^{1/2 - z}

for ``0 <= Re z <= 1/2`` (pseudo-powers throughout).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .channels import Channel, random_unital_cp_channel
from .divergences import am_norm, fidelity, functional_norm_distance, sandwiched_renyi
from .matcore import EPS_SUPPORT, SuperOperator, hermitian_part
from .quadrature import DEFAULT_CERT_TOL, QuadratureSpec, integrate
from .quantum import GnsVector, State, as_state, relative_entropy
from .recovery import RecoverySpec, SupportWarning, averaged_recovery, recovered_density
from .rng import make_rng, random_density

CONSISTENCY_TOL = 1e-9
PINV_RCOND = float(np.sqrt(EPS_SUPPORT))


class IntertwinerError(RuntimeError):
    """The least-squares intertwiner does not reproduce its defining relation."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class InstanceBundle:
    """Channel, state and reference on ``M_n`` plus their images on ``M_m``."""

    channel: Channel
    rho_A: State
    sigma_A: State
    rho_B: State = field(init=False)
    sigma_B: State = field(init=False)

    def __post_init__(self):
        rho_A, sigma_A = as_state(self.rho_A), as_state(self.sigma_A)
        if rho_A.dim != self.channel.out_dim or sigma_A.dim != self.channel.out_dim:
            raise ValueError("states must live on the channel's output algebra")
        object.__setattr__(self, "rho_A", rho_A)
        object.__setattr__(self, "sigma_A", sigma_A)
        object.__setattr__(self, "rho_B", State(self.channel.predual(rho_A.density)))
        object.__setattr__(self, "sigma_B", State(self.channel.predual(sigma_A.density)))

    @property
    def entropy_A(self) -> float:
        return relative_entropy(self.rho_A, self.sigma_A)

    @property
    def entropy_B(self) -> float:
        return relative_entropy(self.rho_B, self.sigma_B)

    @property
    def delta_S(self) -> float:
        """``S(rho_A|sigma_A) - S(rho_B|sigma_B)``; ``inf`` if the first term is."""
        s_a = self.entropy_A
        if not np.isfinite(s_a):
            return np.inf
        return s_a - self.entropy_B

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.entropy_A))

    @property
    def faithful(self) -> bool:
        return all(s.is_faithful for s in (self.rho_A, self.sigma_A, self.rho_B, self.sigma_B))

    @property
    def dims(self) -> tuple[int, int]:
        return self.channel.out_dim, self.channel.in_dim

    def recovery_spec(self, quadrature: QuadratureSpec | None = None) -> RecoverySpec:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SupportWarning)
            return RecoverySpec(self.channel, self.sigma_A, quadrature or QuadratureSpec())


def random_instance(n: int, m: int, d: int, seed, *, rank_rho: int | None = None,
                    rank_sigma: int | None = None) -> InstanceBundle:
    """Haar-Stinespring channel with Hilbert-Schmidt random states."""
    rng = make_rng(seed)
    T = random_unital_cp_channel(n, m, d, rng)
    rho = random_density(rng, n, rank_rho)
    sigma = random_density(rng, n, rank_sigma)
    return InstanceBundle(T, State(rho), State(sigma))


# -- intertwiners --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Intertwiner:
    """Superoperator from the ``M_m`` standard form to the ``M_n`` one."""

    kind: str
    operator: SuperOperator
    residual: float

    @property
    def norm(self) -> float:
        return self.operator.norm()

    def apply(self, x) -> np.ndarray:
        return self.operator.apply(x)

    def apply_batch(self, xs) -> np.ndarray:
        return self.operator.apply_batch(xs)


def _least_squares_map(sources: np.ndarray, targets: np.ndarray, n: int, m: int, kind: str,
                       tol: float) -> Intertwiner:
    v = targets @ np.linalg.pinv(sources, rcond=PINV_RCOND)
    residual = float(np.abs(v @ sources - targets).max(initial=0.0))
    scale = 1.0 + float(np.abs(targets).max(initial=0.0))
    if residual > tol * scale:
        raise IntertwinerError(f"{kind} intertwiner is inconsistent", residual)
    return Intertwiner(kind, SuperOperator(m, n, v), residual)


def build_V_psi(inst: InstanceBundle, tol: float = CONSISTENCY_TOL) -> Intertwiner:
    """``V b rho_B^{1/2} = T(b) rho_A^{1/2}``, zero on the orthogonal complement."""
    n, m = inst.dims
    half_b, half_a = inst.rho_B.power(0.5), inst.rho_A.power(0.5)
    sources = np.kron(half_b.T, np.eye(m))
    targets = np.kron(half_a.T, np.eye(n)) @ inst.channel.superop.matrix
    return _least_squares_map(sources, targets, n, m, "psi", tol)


def build_V_eta(inst: InstanceBundle, tol: float = CONSISTENCY_TOL) -> Intertwiner:
    """``V s(rho_B) b sigma_B^{1/2} = s(rho_A) T(b) sigma_A^{1/2}``, zero elsewhere."""
    n, m = inst.dims
    sources = np.kron(inst.sigma_B.power(0.5).T, inst.rho_B.support())
    targets = np.kron(inst.sigma_A.power(0.5).T, inst.rho_A.support()) @ inst.channel.superop.matrix
    return _least_squares_map(sources, targets, n, m, "eta", tol)


def intertwining_residual(inst: InstanceBundle, V_psi: Intertwiner, V_eta: Intertwiner) -> float:
    """Check ``V_eta S_B = S_A V_psi`` on the vectors ``b rho_B^{1/2}`` (matrix units ``b``).

    ``S X = (sigma^{1/2} X rho^{-1/2})^dagger`` is the relative Tomita operator.
    """
    from .matcore import matrix_units

    def tomita(sig: State, rho: State, x):
        return (sig.power(0.5) @ x @ rho.power(-0.5)).conj().T

    err = 0.0
    half_b = inst.rho_B.power(0.5)
    for b in matrix_units(inst.channel.in_dim):
        x = b @ half_b
        lhs = V_eta.apply(tomita(inst.sigma_B, inst.rho_B, x))
        rhs = tomita(inst.sigma_A, inst.rho_A, V_psi.apply(x))
        err = max(err, float(np.abs(lhs - rhs).max()))
    return err


def strip_operator(inst: InstanceBundle, V_psi: Intertwiner, z: complex) -> SuperOperator:
    """``Delta_A^z V_psi Delta_B^{-z}`` with ``Delta = Delta_{sigma,rho}``."""
    left = SuperOperator.sandwich(inst.sigma_A.power(z), inst.rho_A.power(-z))
    right = SuperOperator.sandwich(inst.sigma_B.power(-z), inst.rho_B.power(z))
    return left.compose(V_psi.operator).compose(right)


def strip_norms(inst: InstanceBundle, V_psi: Intertwiner, grid: int = 5,
                t_range: float = 2.0) -> np.ndarray:
    """Operator norms of :func:`strip_operator` on a ``grid x grid`` mesh of the closed strip."""
    res = np.linspace(0.0, 0.5, grid)
    ims = np.linspace(-t_range, t_range, grid)
    return np.array([[strip_operator(inst, V_psi, a + 1j * b).norm() for b in ims] for a in res])


# -- Gamma ---------------------------------------------------------------------


def gamma_interior_batch(inst: InstanceBundle, V_psi: Intertwiner, zs) -> np.ndarray:
    """Amplitudes of ``Gamma(z)`` for an array of ``z``, shape ``(K, n, n)``."""
    zs = np.asarray(zs, dtype=complex).reshape(-1)
    inner = inst.sigma_B.spec.power_batch(-zs) @ inst.rho_B.spec.power_batch(0.5 + zs)
    mapped = V_psi.apply_batch(inner)
    return inst.sigma_A.spec.power_batch(zs) @ mapped @ inst.rho_A.spec.power_batch(-zs)


def gamma_interior(inst: InstanceBundle, V_psi: Intertwiner, z: complex) -> GnsVector:
    """``Gamma(z) = Delta_A^z V_psi Delta_B^{-z} xi_B`` for ``0 <= Re z <= 1/2``."""
    if not -1e-12 <= np.real(z) <= 0.5 + 1e-12:
        raise ValueError(f"Re z must lie in [0, 1/2], got {z}")
    return GnsVector(gamma_interior_batch(inst, V_psi, [z])[0])


def gamma_boundary_batch(inst: InstanceBundle, V_eta: Intertwiner, ts) -> np.ndarray:
    """Amplitudes of ``Gamma(1/2 + it)`` through ``V_eta``, shape ``(K, n, n)``.

    Chain: ``X1 = sigma_B^{-it} rho_B^{1/2} rho_B^{it}``, conjugate transpose,
    apply ``V_eta``, conjugate transpose, ``X5 = sigma_A^{it} X4 rho_A^{-it}``.
    """
    ts = np.asarray(ts, dtype=float).reshape(-1)
    x1 = inst.sigma_B.spec.power_batch(-1j * ts) @ inst.rho_B.spec.power_batch(0.5 + 1j * ts)
    x3 = V_eta.apply_batch(np.conj(np.swapaxes(x1, 1, 2)))
    x4 = np.conj(np.swapaxes(x3, 1, 2))
    return inst.sigma_A.spec.power_batch(1j * ts) @ x4 @ inst.rho_A.spec.power_batch(-1j * ts)


def gamma_boundary(inst: InstanceBundle, V_eta: Intertwiner, t: float) -> GnsVector:
    return GnsVector(gamma_boundary_batch(inst, V_eta, [t])[0])


def gamma_t_functional(g: GnsVector) -> State:
    """The (non-normalized) functional ``a -> <g, a g>``, density ``X X^dagger``."""
    return State(hermitian_part(g.functional_density()))


def am_norm_batch(xs: np.ndarray, psi: State, q: float) -> np.ndarray:
    """:func:`~reclab.divergences.am_norm` for a stack of amplitudes."""
    if q == 2.0:
        return np.linalg.norm(xs, axis=(1, 2))
    r = (2.0 - q) / (2.0 * q)
    sv = np.linalg.svd(psi.power(r)[None] @ xs, compute_uv=False)
    return np.sum(sv**q, axis=1) ** (1.0 / q)


# -- checks ----------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    """``lhs >= rhs`` style outcome with ``slack = lhs - rhs``."""

    lhs: float
    rhs: float
    slack: float
    cert_residual: float = 0.0
    note: str = ""


def recovered_dominance_check(inst: InstanceBundle, ts, V_eta: Intertwiner | None = None,
                    spec: RecoverySpec | None = None) -> np.ndarray:
    """Smallest eigenvalue of ``density(rho o T o alpha^t) - density(gamma_t)`` per ``t``."""
    V_eta = build_V_eta(inst) if V_eta is None else V_eta
    spec = inst.recovery_spec() if spec is None else spec
    ts = np.asarray(ts, dtype=float).reshape(-1)
    gam = gamma_boundary_batch(inst, V_eta, ts)
    gam_dens = gam @ np.conj(np.swapaxes(gam, 1, 2))
    chois = spec.rotated_petz_batch(ts)
    n = inst.channel.out_dim
    out = np.empty(ts.size)
    for k in range(ts.size):
        alpha_t = Channel(n, inst.channel.in_dim, chois[k])
        rec = alpha_t.predual(inst.rho_B.density)
        out[k] = np.linalg.eigvalsh(hermitian_part(rec - gam_dens[k]))[0]
    return out


def norm_bound_rhs(inst: InstanceBundle, q: float, quad: QuadratureSpec | None = None,
             V_eta: Intertwiner | None = None, cert_tol: float = DEFAULT_CERT_TOL):
    """``-int p(t) log ||Gamma(1/2 + it)||_{q, rho_A}^2 dt`` and the certificate residual."""
    V_eta = build_V_eta(inst) if V_eta is None else V_eta
    quad = quad or QuadratureSpec()

    def integrand(ts):
        norms = am_norm_batch(gamma_boundary_batch(inst, V_eta, ts), inst.rho_A, q)
        with np.errstate(divide="ignore"):
            return -2.0 * np.log(norms)

    res = integrate(integrand, quad, cert_tol=cert_tol)
    return float(np.real(res.value)), res.residual


def norm_bound_check(inst: InstanceBundle, q: float, quad: QuadratureSpec | None = None,
               V_eta: Intertwiner | None = None, cert_tol: float = DEFAULT_CERT_TOL) -> CheckResult:
    lhs = inst.delta_S
    rhs, residual = norm_bound_rhs(inst, q, quad, V_eta, cert_tol)
    return CheckResult(lhs, rhs, lhs - rhs, residual)


def recovery_for(inst: InstanceBundle, quad: QuadratureSpec | None = None,
                 cert_tol: float = DEFAULT_CERT_TOL):
    res = averaged_recovery(inst.recovery_spec(quad), cert_tol=cert_tol)
    return res.channel, res.residual


def fidelity_bound_check(inst: InstanceBundle, recovery: Channel, cert_residual: float = 0.0) -> CheckResult:
    """``Delta S >= -log F(rho_A, rho o T o alpha)^2``."""
    lhs = inst.delta_S
    rec = recovered_density(inst.channel, recovery, inst.rho_A)
    f = fidelity(inst.rho_A.density, rec)
    rhs = float(-2.0 * np.log(f)) if f > 0 else np.inf
    return CheckResult(lhs, rhs, lhs - rhs, cert_residual)


def norm_distance_check(inst: InstanceBundle, recovery: Channel) -> CheckResult:
    """``Delta S >= ||rho o T o alpha - rho||^2 / 4``."""
    lhs = inst.delta_S
    rec = recovered_density(inst.channel, recovery, inst.rho_A)
    rhs = 0.25 * float(functional_norm_distance(rec, inst.rho_A.density)) ** 2
    return CheckResult(lhs, rhs, lhs - rhs)


def jensen_check(inst: InstanceBundle, recovery: Channel, s: float) -> CheckResult:
    """``Delta S >= (1-s)/s D_s(rho o T o alpha | rho)`` (averaged recovery)."""
    lhs = inst.delta_S
    rec = recovered_density(inst.channel, recovery, inst.rho_A)
    rhs = (1.0 - s) / s * float(sandwiched_renyi(rec, inst.rho_A, s))
    return CheckResult(lhs, rhs, lhs - rhs)


def _rotated_recovered_batch(inst: InstanceBundle, spec: RecoverySpec, ts) -> np.ndarray:
    chois = spec.rotated_petz_batch(ts)
    n, m = inst.dims
    c4 = chois.reshape(-1, m, n, m, n)
    return np.einsum("ca,kaicj->kji", inst.rho_B.density, c4)


def _recovered_factor_batch(inst: InstanceBundle, ts) -> np.ndarray:
    """Factors ``K_t`` with ``K_t K_t^dagger`` the density of ``rho_B o alpha^t``.

    ``rho_B o alpha^t = sigma_A^{1/2+it} T(Y Y^dagger) sigma_A^{1/2-it}`` with
    ``Y = sigma_B^{-1/2-it} rho_B^{1/2}``, and ``T(Y Y^dagger) = Z Z^dagger`` for
    ``Z = [A_k^dagger Y]_k`` in a Kraus form of ``T``. Singular values of a
    factor are accurate down to roundoff, whereas square roots of small
    eigenvalues of the density amplify it.
    """
    ts = np.asarray(ts, dtype=float).reshape(-1)
    kraus = inst.channel.kraus()
    y = inst.sigma_B.spec.power_batch(-0.5 - 1j * ts) @ inst.rho_B.power(0.5)[None]
    z = np.einsum("rin,kij->krnj", kraus.conj(), y)
    z = np.concatenate(list(np.moveaxis(z, 1, 0)), axis=-1)
    return inst.sigma_A.spec.power_batch(0.5 + 1j * ts) @ z


def _singular_values(h: np.ndarray, ks: np.ndarray) -> np.ndarray:
    return np.linalg.svd(h[None] @ ks, compute_uv=False)


def averaged_fidelity_check(inst: InstanceBundle, quad: QuadratureSpec | None = None,
                            cert_tol: float = DEFAULT_CERT_TOL) -> CheckResult:
    """``Delta S >= -2 int p(t) log F(rho o T o alpha^t, rho) dt``.

    The fidelity is the trace norm of ``rho^{1/2} K_t`` with the factor of
    :func:`_recovered_factor_batch`.
    """
    quad = quad or QuadratureSpec()
    half = inst.rho_A.power(0.5)

    def integrand(ts):
        vals = np.sum(_singular_values(half, _recovered_factor_batch(inst, ts)), axis=1)
        with np.errstate(divide="ignore"):
            return -2.0 * np.log(vals)

    res = integrate(integrand, quad, cert_tol=cert_tol)
    lhs = inst.delta_S
    rhs = float(np.real(res.value))
    return CheckResult(lhs, rhs, lhs - rhs, res.residual)


def averaged_renyi_check(inst: InstanceBundle, s: float, quad: QuadratureSpec | None = None,
                         cert_tol: float = DEFAULT_CERT_TOL) -> CheckResult:
    """``Delta S >= (1-s)/s int p(t) D_s(rho o T o alpha^t | rho) dt``."""
    quad = quad or QuadratureSpec()
    h = inst.rho_A.power((1.0 - s) / (2.0 * s))

    def integrand(ts):
        sv = _singular_values(h, _recovered_factor_batch(inst, ts))
        with np.errstate(divide="ignore"):
            return np.log(np.sum(sv ** (2.0 * s), axis=1)) / (s - 1.0)

    res = integrate(integrand, quad, cert_tol=cert_tol)
    lhs = inst.delta_S
    rhs = (1.0 - s) / s * float(np.real(res.value))
    return CheckResult(lhs, rhs, lhs - rhs, res.residual)


def p_theta(theta: float, q: float) -> float:
    """Interpolated exponent with ``1/p = (1 - 2 theta)/2 + 2 theta / q``."""
    return 1.0 / ((1.0 - 2.0 * theta) / 2.0 + 2.0 * theta / q)


@dataclass(frozen=True)
class LimitResult:
    value: float
    delta_S: float
    gap: float
    squared_form: float


def dpi_limit_check(inst: InstanceBundle, q: float, theta: float,
                    V_psi: Intertwiner | None = None) -> LimitResult:
    """Finite-``theta`` value of ``-log ||Gamma(theta)||_{p_theta} / theta``.

    Tends to ``Delta S`` as ``theta -> 0``; ``squared_form`` is the same
    expression with the squared norm, which tends to ``2 Delta S``.
    """
    if not 0.0 < theta <= 0.1:
        raise ValueError(f"theta must lie in (0, 0.1], got {theta}")
    V_psi = build_V_psi(inst) if V_psi is None else V_psi
    g = gamma_interior(inst, V_psi, theta)
    nrm = am_norm(g, inst.rho_A, p_theta(theta, q))
    value = -np.log(nrm) / theta
    ds = inst.delta_S
    return LimitResult(float(value), ds, float(value - ds), float(2.0 * value))


def a_term_derivative(inst: InstanceBundle, h: float = 1e-5) -> float:
    """``-i f'(0)`` for ``f(u) = Tr[rho_A rho_A^{iu} sigma_A^{-iu} T(sigma_B^{iu} rho_B^{-iu})]``.

    The derivative of the cocycle expression equals ``Delta S``; central
    difference with step ``h``.
    """
    def f(u):
        left = inst.rho_A.power(1j * u) @ inst.sigma_A.power(-1j * u)
        inner = inst.sigma_B.power(1j * u) @ inst.rho_B.power(-1j * u)
        return np.trace(inst.rho_A.density @ left @ inst.channel.apply(inner))

    deriv = (f(h) - f(-h)) / (2.0 * h)
    return float(np.real(-1j * deriv))


def hirsch_kernels(theta: float, t):
    """Kernels ``(alpha_theta(t), beta_theta(t))``; each integrates to one."""
    t = np.asarray(t, dtype=float)
    s, c = np.sin(2 * np.pi * theta), np.cos(2 * np.pi * theta)
    ch = np.cosh(2 * np.pi * t)
    return s / ((1 - 2 * theta) * (ch - c)), s / (2 * theta * (ch + c))


def hirsch_check(inst: InstanceBundle, theta: float, q: float,
                 quad: QuadratureSpec | None = None, V_psi: Intertwiner | None = None,
                 cert_tol: float = DEFAULT_CERT_TOL) -> CheckResult:
    """Three-lines bound for ``log ||Gamma(theta)||_{p_theta}``.

    The right side combines ``log ||Gamma(it)||`` (exponent 2) and
    ``log ||Gamma(1/2 + it)||_q`` with the two kernels.
    """
    if not 0.0 < theta < 0.5:
        raise ValueError(f"theta must lie in (0, 1/2), got {theta}")
    V_psi = build_V_psi(inst) if V_psi is None else V_psi
    quad = quad or QuadratureSpec()
    lhs = float(np.log(am_norm(gamma_interior(inst, V_psi, theta), inst.rho_A, p_theta(theta, q))))

    def integrand(ts):
        ka, kb = hirsch_kernels(theta, ts)
        left = np.linalg.norm(gamma_interior_batch(inst, V_psi, 1j * ts), axis=(1, 2))
        right = am_norm_batch(gamma_interior_batch(inst, V_psi, 0.5 + 1j * ts), inst.rho_A, q)
        return (1 - 2 * theta) * ka * np.log(left) + 2 * theta * kb * np.log(right)

    res = integrate(integrand, quad, weight=None, cert_tol=cert_tol)
    rhs = float(np.real(res.value))
    return CheckResult(rhs, lhs, rhs - lhs, res.residual)


def kernel_masses(theta: float, quad: QuadratureSpec | None = None) -> tuple[float, float]:
    """Numerical ``int (1-2 theta) alpha_theta`` and ``int 2 theta beta_theta``."""
    quad = quad or QuadratureSpec()
    res = integrate(
        lambda ts: np.stack(hirsch_kernels(theta, ts), axis=1) * [1 - 2 * theta, 2 * theta],
        quad, weight=None, cert_tol=1e-12,
    )
    return float(res.value[0]), float(res.value[1])


def firstlaw_family(inst: InstanceBundle, V_psi: Intertwiner, thetas, q: float) -> np.ndarray:
    """``log ||zeta_theta||_{p_theta} / theta`` for ``zeta_theta = Gamma(theta)/||Gamma(theta)||``."""
    out = []
    for th in np.asarray(thetas, dtype=float):
        x = gamma_interior(inst, V_psi, th).amplitude
        x = x / np.linalg.norm(x)
        out.append(np.log(am_norm(x, inst.rho_A, p_theta(th, q))) / th)
    return np.array(out)


def cocycle_bound(phi, psi, z: complex) -> tuple[float, float]:
    """``(||rho_phi^{-z} rho_psi^{z}||, c^{2 Re z})`` with ``c`` the majorization constant."""
    from .quantum import majorization_constant

    phi, psi = as_state(phi), as_state(psi)
    val = float(np.linalg.norm(phi.power(-z) @ psi.power(z), 2))
    c = majorization_constant(psi, phi)
    return val, float(c ** (2 * np.real(z)))


def chain_identity_residual(rho, n_b: int, n_e: int, sigma_b) -> float:
    """Conditional-expectation entropy identity, returned as an absolute residual.

    With ``E`` the trace-preserving expectation onto ``M_{n_b} (x) 1``,
    ``S(rho|sigma o E) - S(rho_B|sigma_B) = S(rho|rho o E)``.
    """
    from .matcore import partial_trace

    rho = as_state(rho).density
    sb = as_state(sigma_b).density
    eye = np.eye(n_e) / n_e
    rho_b = partial_trace(rho, (n_b, n_e), traced=1)
    lhs = relative_entropy(rho, np.kron(sb, eye)) - relative_entropy(rho_b, sb)
    rhs = relative_entropy(rho, np.kron(rho_b, eye))
    return float(abs(lhs - rhs))
