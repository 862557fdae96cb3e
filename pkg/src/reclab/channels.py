"""Heisenberg-picture channels ``T: M_m -> M_n`` and example constructors.

A channel is stored by its Choi matrix ``sum_ij T(e_ij) (x) e_ij`` on
``C^n (x) C^m``; ``T`` is completely positive iff this matrix is positive.
The predual (Schrodinger picture) is derived on demand from the duality
``Tr[predual(rho) b] = Tr[rho T(b)]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .matcore import EPS_SUPPORT, SuperOperator, eig_hermitian, hermitian_part, matrix_units, partial_trace
from .quantum import State, as_state
from .rng import ginibre, haar_isometry, make_rng

UNITAL_TOL = 1e-10
CP_TOL = 1e-10
BOHR_MERGE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Channel:
    """Linear map ``M_m -> M_n`` (``in_dim = m``, ``out_dim = n``) via its Choi matrix."""

    in_dim: int
    out_dim: int
    choi: np.ndarray
    unital_checked: bool = False
    cp_checked: bool = False
    two_positive_checked: bool = False

    def __post_init__(self):
        n, m = self.out_dim, self.in_dim
        choi = np.asarray(self.choi, dtype=complex)
        if choi.shape != (n * m, n * m):
            raise ValueError(f"Choi matrix must be {(n * m, n * m)}, got {choi.shape}")
        object.__setattr__(self, "choi", choi)

    # -- representations -------------------------------------------------
    @property
    def _blocks(self) -> np.ndarray:
        # C4[a, i, c, j] = T(e_ij)[a, c]
        n, m = self.out_dim, self.in_dim
        return self.choi.reshape(n, m, n, m)

    @classmethod
    def from_superop(cls, s: SuperOperator, **flags) -> "Channel":
        n, m = s.out_dim, s.in_dim
        c4 = s.matrix.reshape(n, n, m, m).transpose(1, 3, 0, 2)
        return cls(m, n, c4.reshape(n * m, n * m), **flags)

    @classmethod
    def from_map(cls, f, in_dim: int, out_dim: int, **flags) -> "Channel":
        return cls.from_superop(SuperOperator.from_map(f, in_dim, out_dim), **flags)

    @classmethod
    def from_stinespring(cls, w, in_dim: int, env_dim: int, **flags) -> "Channel":
        """``T(b) = W^dagger (b (x) 1_d) W`` for ``W: C^n -> C^m (x) C^d``."""
        w = np.asarray(w, dtype=complex)
        n = w.shape[1]
        wr = w.reshape(in_dim, env_dim, n)
        # T(e_ij)[a, c] = sum_k conj(W[(i,k), a]) W[(j,k), c]
        c4 = np.einsum("ika,jkc->aicj", wr.conj(), wr)
        return cls(in_dim, n, c4.reshape(n * in_dim, n * in_dim), **flags)

    @property
    def superop(self) -> SuperOperator:
        n, m = self.out_dim, self.in_dim
        mat = self._blocks.transpose(2, 0, 3, 1).reshape(n * n, m * m)
        return SuperOperator(m, n, mat)

    # -- action ------------------------------------------------------------
    def apply(self, b) -> np.ndarray:
        b = np.asarray(b)
        if b.shape != (self.in_dim, self.in_dim):
            raise ValueError(f"expected {self.in_dim}x{self.in_dim} input, got {b.shape}")
        return np.einsum("aicj,ij->ac", self._blocks, b)

    def apply_batch(self, bs) -> np.ndarray:
        return np.einsum("aicj,kij->kac", self._blocks, np.asarray(bs))

    __call__ = apply

    def predual(self, rho) -> np.ndarray:
        """Density of ``rho o T`` (also the Hilbert-Schmidt adjoint applied to ``rho``)."""
        rho = rho.density if isinstance(rho, State) else np.asarray(rho)
        if rho.shape != (self.out_dim, self.out_dim):
            raise ValueError(f"expected {self.out_dim}x{self.out_dim} density, got {rho.shape}")
        return np.einsum("ca,aicj->ji", rho, self._blocks)

    def predual_batch(self, rhos) -> np.ndarray:
        return np.einsum("kca,aicj->kji", np.asarray(rhos), self._blocks)

    def kraus(self) -> np.ndarray:
        """Operators ``A_k`` (``m x n``) with ``T(b) = sum_k A_k^dagger b A_k``.

        Taken from the eigen-decomposition of the Choi matrix; eigenvalues
        below the relative support cutoff are dropped. Requires CP.
        """
        n, m = self.out_dim, self.in_dim
        w, v = np.linalg.eigh(hermitian_part(self.choi))
        if w[0] < -CP_TOL * max(abs(w[-1]), 1.0):
            raise ValueError("Kraus form needs a completely positive map")
        keep = w > EPS_SUPPORT * max(w[-1], 0.0)
        vecs = v[:, keep] * np.sqrt(w[keep])
        # v_k[a*m + i] = conj(A_k[i, a])
        return np.conj(vecs.T.reshape(-1, n, m)).transpose(0, 2, 1)

    def hs_adjoint(self) -> "Channel":
        """The map ``M_n -> M_m`` given by the predual."""
        return Channel.from_superop(self.superop.adjoint())

    def compose(self, other: "Channel") -> "Channel":
        """``self o other``: apply ``other`` first."""
        return Channel.from_superop(self.superop.compose(other.superop))

    # -- certificates --------------------------------------------------------
    def unital_residual(self) -> float:
        return float(np.abs(self.apply(np.eye(self.in_dim)) - np.eye(self.out_dim)).max())

    def certified(self) -> "Channel":
        """Copy with the unital and CP flags set from actual checks."""
        ok_cp, _, _ = check_cp(self)
        return replace(
            self,
            unital_checked=self.unital_residual() <= UNITAL_TOL,
            cp_checked=ok_cp,
            two_positive_checked=ok_cp,
        )

    def choi_distance(self, other: "Channel") -> float:
        return float(np.abs(self.choi - other.choi).max())

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "choi_re": self.choi.real.tolist(),
            "choi_im": self.choi.imag.tolist(),
            "flags": {
                "unital_checked": self.unital_checked,
                "cp_checked": self.cp_checked,
                "two_positive_checked": self.two_positive_checked,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Channel":
        choi = np.asarray(d["choi_re"], dtype=float) + 1j * np.asarray(d["choi_im"], dtype=float)
        flags = d.get("flags", {})
        return cls(int(d["in_dim"]), int(d["out_dim"]), choi, **flags)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Channel":
        return cls.from_dict(json.loads(text))


def apply(T: Channel, b) -> np.ndarray:
    return T.apply(b)


def predual_apply(T: Channel, rho) -> State:
    return State(T.predual(rho))


def check_cp(T: Channel, tol: float = CP_TOL):
    """Choi positivity test.

    Returns ``(is_cp, min_eigenvalue, witness)`` where the witness is the
    eigenvector of the most negative Choi eigenvalue (``None`` on success).
    """
    w, v = np.linalg.eigh(hermitian_part(T.choi))
    scale = max(abs(w[-1]), 1.0)
    ok = bool(w[0] >= -tol * scale)
    return ok, float(w[0]), (None if ok else v[:, 0])


def check_two_positive_sampled(T: Channel, samples: int = 200, seed=0):
    """Sampled test of positivity of ``T (x) id_2`` on random positive inputs.

    Inputs are random rank-one positive matrices on ``C^2 (x) C^m``. Returns
    ``(passed, worst)`` with ``worst`` the most negative eigenvalue found
    (relative to the input's norm).
    """
    rng = make_rng(seed)
    m, n = T.in_dim, T.out_dim
    worst = np.inf
    for _ in range(samples):
        v = ginibre(rng, 2 * m, 1)[:, 0]
        v /= np.linalg.norm(v)
        p = np.outer(v, v.conj()).reshape(2, m, 2, m)
        blocks = T.apply_batch(p.transpose(0, 2, 1, 3).reshape(4, m, m)).reshape(2, 2, n, n)
        out = blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)
        worst = min(worst, float(np.linalg.eigvalsh(hermitian_part(out))[0]))
    return bool(worst >= -CP_TOL), worst


# -- constructors -----------------------------------------------------------


def identity_channel(dim: int) -> Channel:
    c = sum(np.kron(e, e) for e in matrix_units(dim))
    return Channel(dim, dim, c, unital_checked=True, cp_checked=True, two_positive_checked=True)


def transpose_map(dim: int) -> Channel:
    """Positive, unital, not 2-positive: the standard negative control."""
    return Channel.from_map(lambda b: b.T, dim, dim, unital_checked=True)


def unitary_channel(u) -> Channel:
    """``b -> U^dagger b U`` (Heisenberg picture of ``rho -> U rho U^dagger``)."""
    u = np.asarray(u, dtype=complex)
    return Channel.from_map(lambda b: u.conj().T @ b @ u, u.shape[0], u.shape[0]).certified()


def random_unital_cp_channel(n: int, m: int, d: int, seed) -> Channel:
    """``T(b) = W^dagger (b (x) 1_d) W`` with a Haar isometry ``W: C^n -> C^m (x) C^d``."""
    if m * d < n:
        raise ValueError(f"need m*d >= n, got m={m}, d={d}, n={n}")
    w = haar_isometry(make_rng(seed), m * d, n)
    return Channel.from_stinespring(w, m, d).certified()


def conditional_expectation_pair(n_b: int, n_e: int) -> tuple[Channel, Channel]:
    """Inclusion ``b -> b (x) 1`` and the trace-preserving expectation back onto it."""
    n_a = n_b * n_e
    incl = Channel.from_map(lambda b: np.kron(b, np.eye(n_e)), n_b, n_a)
    expct = Channel.from_map(lambda a: partial_trace(a, (n_b, n_e), traced=1) / n_e, n_a, n_b)
    return incl.certified(), expct.certified()


# -- detailed-balance semigroups ---------------------------------------------


@dataclass(frozen=True, eq=False)
class Semigroup:
    """Quantum Markov semigroup ``T_t = exp(t L)`` with detailed-balance data.

    ``theta_basis`` is the eigenbasis of the Hamiltonian; the involution
    ``Theta`` is complex conjugation of matrix entries in that basis.
    """

    dim: int
    generator: SuperOperator
    sigma: State
    beta: float
    theta_basis: np.ndarray
    hamiltonian: np.ndarray


def bohr_components(h, coupling):
    """Split a coupling into Bohr-frequency components ``A_omega``.

    ``A_omega`` collects ``|k><k| A |l><l|`` over pairs with
    ``E_l - E_k = omega``; frequencies closer than ``BOHR_MERGE_TOL`` are
    merged. Returns a list of ``(omega, A_omega)``.
    """
    spec = eig_hermitian(h)
    e, u = spec.eigenvalues, spec.eigenvectors
    a = u.conj().T @ np.asarray(coupling) @ u
    gaps = e[None, :] - e[:, None]
    order = np.sort(gaps.ravel())
    clusters = []
    for g in order:
        if not clusters or g - clusters[-1][-1] > BOHR_MERGE_TOL:
            clusters.append([g])
        else:
            clusters[-1].append(g)
    out = []
    for cl in clusters:
        lo, hi = cl[0], cl[-1]
        mask = (gaps >= lo - 1e-15) & (gaps <= hi + 1e-15)
        comp = np.where(mask, a, 0.0)
        if np.abs(comp).max() > 0:
            out.append((float(np.mean(cl)), u @ comp @ u.conj().T))
    return out


def kms_rate(omega: float, beta: float) -> float:
    """Jump rate obeying ``rate(-w) = exp(-beta w) rate(w)``."""
    return float(0.5 * (1.0 + np.tanh(0.5 * beta * omega)))


def davies_semigroup(h, beta: float, couplings) -> Semigroup:
    """Davies generator for Hamiltonian ``h`` at inverse temperature ``beta``.

    Each coupling is first replaced by its part that is real in the
    eigenbasis of ``h``, which makes the generator commute with ``Theta``;
    without that the rotated Petz map is not ``Theta o T_t o Theta``.
    """
    h = hermitian_part(np.asarray(h, dtype=complex))
    if beta < 0:
        raise ValueError("beta must be non-negative")
    n = h.shape[0]
    spec = eig_hermitian(h)
    u = spec.eigenvectors
    gen = np.zeros((n * n, n * n), dtype=complex)
    eye = np.eye(n)
    for c in couplings:
        c = hermitian_part(np.asarray(c, dtype=complex))
        c = u @ (u.conj().T @ c @ u).real @ u.conj().T
        for omega, a in bohr_components(h, c):
            rate = kms_rate(omega, beta)
            k = a.conj().T @ a
            gen += rate * (np.kron(a.T, a.conj().T) - 0.5 * (np.kron(eye, k) + np.kron(k.T, eye)))
    boltz = np.exp(-beta * (spec.eigenvalues - spec.eigenvalues[0]))
    sigma = State(spec.from_diagonal(boltz / boltz.sum()))
    return Semigroup(n, SuperOperator(n, n, gen), sigma, float(beta), u, h)


def semigroup_step(S: Semigroup, t: float) -> Channel:
    if t < 0:
        raise ValueError("t must be non-negative")
    mat = expm(t * S.generator.matrix)
    return Channel.from_superop(SuperOperator(S.dim, S.dim, mat)).certified()


def theta(basis, a) -> np.ndarray:
    """Entrywise complex conjugation in ``basis``: anti-linear, involutive."""
    basis = np.asarray(basis)
    return basis @ (basis.conj().T @ np.asarray(a) @ basis).conj() @ basis.conj().T


def detailed_balance_residual(S: Semigroup, t: float) -> float:
    """Max over matrix units of ``|sigma(a* T_t(b)) - sigma(Theta(b*) T_t(Theta(a)))|``."""
    T = semigroup_step(S, t)
    rho = S.sigma.density
    err = 0.0
    units = matrix_units(S.dim)
    for a in units:
        for b in units:
            lhs = np.trace(rho @ a.conj().T @ T.apply(b))
            rhs = np.trace(rho @ theta(S.theta_basis, b.conj().T) @ T.apply(theta(S.theta_basis, a)))
            err = max(err, abs(lhs - rhs))
    return float(err)


def stationarity_residual(S: Semigroup, t: float) -> float:
    T = semigroup_step(S, t)
    return float(np.abs(T.predual(S.sigma.density) - S.sigma.density).max())


def random_davies(n: int, beta: float, seed, n_couplings: int = 2) -> Semigroup:
    from .rng import random_hermitian

    rng = make_rng(seed)
    h = random_hermitian(rng, n)
    cs = [random_hermitian(rng, n) for _ in range(n_couplings)]
    return davies_semigroup(h, beta, cs)


def as_channel_state(rho) -> State:
    return as_state(rho)
