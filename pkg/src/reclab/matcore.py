"""Dense Hermitian spectral calculus and vectorization helpers.

Everything downstream works with small dense complex matrices. Two
conventions are fixed here and used throughout the package:

* ``vec`` stacks columns, so ``vec(a @ x @ b) == kron(b.T, a) @ vec(x)``.
* Functions of a positive matrix that are singular at zero (negative or
  complex powers, logarithms) are evaluated on the support only and set to
  zero on the kernel (Moore-Penrose convention). The support is the span of
  eigenvectors whose eigenvalue exceeds ``EPS_SUPPORT * lambda_max``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

EPS_SUPPORT = 1e-12
HERMITIAN_TOL = 1e-12


def _as_square(m, name="matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    scale = 1.0 + np.abs(m).max(initial=0.0)
    return bool(np.abs(m - m.conj().T).max(initial=0.0) <= tol * scale)


def hermitian_part(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigen-decomposition ``M = U diag(w) U^dagger`` of a Hermitian matrix.

    Eigenvalues are ascending. Eigenvalues not exceeding ``cutoff`` are
    treated as outside the support by every pseudo-function below.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    cutoff: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def support_mask(self) -> np.ndarray:
        return self.eigenvalues > self.cutoff

    @property
    def support_rank(self) -> int:
        return int(self.support_mask.sum())

    @property
    def is_faithful(self) -> bool:
        return self.support_rank == self.dim

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    def from_diagonal(self, values) -> np.ndarray:
        u = self.eigenvectors
        return (u * values) @ u.conj().T

    def apply(self, f: Callable, support_only: bool = False) -> np.ndarray:
        """Return ``U f(w) U^dagger``; see :func:`mat_func`."""
        w = self.eigenvalues
        if support_only:
            mask = self.support_mask
            vals = np.zeros(w.shape, dtype=complex)
            if mask.any():
                vals[mask] = f(w[mask])
        else:
            vals = np.asarray(f(w), dtype=complex)
            bad = ~np.isfinite(vals)
            if bad.any():
                raise ValueError(
                    f"function is singular at eigenvalue {w[bad][0]!r}; "
                    "use support_only=True"
                )
        return self.from_diagonal(vals)

    def power(self, z: complex) -> np.ndarray:
        """Pseudo-power: ``lambda**z`` on the support, zero on the kernel."""
        return self.from_diagonal(self.power_diag(z))

    def power_diag(self, z: complex) -> np.ndarray:
        mask = self.support_mask
        out = np.zeros(self.dim, dtype=complex)
        out[mask] = np.exp(z * np.log(self.eigenvalues[mask]))
        return out

    def power_batch(self, zs) -> np.ndarray:
        """Pseudo-powers for an array of exponents, shape ``(len(zs), n, n)``."""
        zs = np.asarray(zs, dtype=complex).reshape(-1)
        mask = self.support_mask
        diag = np.zeros((zs.size, self.dim), dtype=complex)
        diag[:, mask] = np.exp(np.outer(zs, np.log(self.eigenvalues[mask])))
        u = self.eigenvectors
        return (u[None] * diag[:, None, :]) @ u.conj().T

    def log(self) -> np.ndarray:
        return self.apply(np.log, support_only=True)

    def projector(self) -> np.ndarray:
        u = self.eigenvectors[:, self.support_mask]
        return u @ u.conj().T

    def log_support(self) -> np.ndarray:
        """Logarithms of the support eigenvalues (zeros elsewhere)."""
        out = np.zeros(self.dim)
        mask = self.support_mask
        out[mask] = np.log(self.eigenvalues[mask])
        return out


def _fix_phases(u: np.ndarray) -> np.ndarray:
    # first non-negligible component of each column made real positive
    u = u.copy()
    for k in range(u.shape[1]):
        col = u[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-10)
        if idx.size:
            c = col[idx[0]]
            u[:, k] = col * (abs(c) / c)
    return u


def eig_hermitian(m, eps_support: float = EPS_SUPPORT) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    The input is symmetrized first. Eigenvalues come out ascending and each
    eigenvector has its first non-negligible component real and positive, so
    the result is reproducible bit for bit.
    """
    h = hermitian_part(_as_square(m))
    w, u = np.linalg.eigh(h)
    u = _fix_phases(u)
    scale = max(float(np.abs(w).max(initial=0.0)), 0.0)
    return SpectralDecomposition(w, u, eps_support * scale)


def spectrum(m) -> SpectralDecomposition:
    """Accept a matrix or an existing decomposition."""
    if isinstance(m, SpectralDecomposition):
        return m
    return eig_hermitian(m)


def mat_func(m, f: Callable, support_only: bool = False) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix spectrally.

    With ``support_only`` the function is evaluated on eigenvalues above the
    support cutoff and zero is used elsewhere, which gives pseudo-inverses and
    pseudo-powers. Without it a non-finite value raises ``ValueError``.
    Complex-valued ``f`` (e.g. ``x**(1j*t)``) returns a general complex matrix.
    """
    return spectrum(m).apply(f, support_only=support_only)


def vec(x) -> np.ndarray:
    """Column-stacking vectorization."""
    x = np.asarray(x)
    if x.ndim != 2:
        raise ValueError(f"vec expects a matrix, got shape {x.shape}")
    return x.reshape(-1, order="F")


def unvec(v, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ValueError(f"cannot unvec {v.size} entries into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def vec_batch(xs) -> np.ndarray:
    """Vectorize a stack of matrices ``(k, r, c)`` into ``(k, r*c)``."""
    xs = np.asarray(xs)
    return xs.transpose(0, 2, 1).reshape(xs.shape[0], -1)


def unvec_batch(vs, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    vs = np.asarray(vs)
    return vs.reshape(vs.shape[0], cols, rows).transpose(0, 2, 1)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def partial_trace(x, dims: tuple[int, int], traced: int = 1) -> np.ndarray:
    """Trace out factor ``traced`` (0 or 1) of an operator on C^d0 (x) C^d1."""
    d0, d1 = dims
    x = np.asarray(x)
    if x.shape != (d0 * d1, d0 * d1):
        raise ValueError(f"shape {x.shape} does not match dims {dims}")
    t = x.reshape(d0, d1, d0, d1)
    if traced == 1:
        return np.einsum("ajbj->ab", t)
    if traced == 0:
        return np.einsum("iaib->ab", t)
    raise ValueError("traced must be 0 or 1")


def trace_norm(x) -> float:
    return float(np.linalg.svd(np.asarray(x), compute_uv=False).sum())


def hs_inner(x, y) -> complex:
    """Hilbert-Schmidt inner product ``Tr(x^dagger y)``."""
    return complex(np.vdot(np.asarray(x), np.asarray(y)))


def matrix_unit(rows: int, cols: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((rows, cols), dtype=complex)
    e[i, j] = 1.0
    return e


def matrix_units(dim: int) -> np.ndarray:
    """All ``dim**2`` matrix units ordered like ``vec`` (column major)."""
    k = dim * dim
    return unvec_batch(np.eye(k, dtype=complex), dim)


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Linear map ``M_m -> M_n`` stored as an ``n^2 x m^2`` matrix on vecs."""

    in_dim: int
    out_dim: int
    matrix: np.ndarray

    def __post_init__(self):
        shape = (self.out_dim**2, self.in_dim**2)
        if self.matrix.shape != shape:
            raise ValueError(f"superoperator matrix must be {shape}, got {self.matrix.shape}")

    @classmethod
    def from_map(cls, f: Callable, in_dim: int, out_dim: int) -> "SuperOperator":
        cols = [vec(f(e)) for e in matrix_units(in_dim)]
        return cls(in_dim, out_dim, np.stack(cols, axis=1).astype(complex))

    @classmethod
    def sandwich(cls, left, right) -> "SuperOperator":
        """``X -> left @ X @ right``."""
        left = np.asarray(left)
        right = np.asarray(right)
        return cls(right.shape[0], left.shape[0], np.kron(right.T, left))

    @classmethod
    def identity(cls, dim: int) -> "SuperOperator":
        return cls(dim, dim, np.eye(dim * dim, dtype=complex))

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.in_dim, self.in_dim):
            raise ValueError(f"expected {self.in_dim}x{self.in_dim} input, got {x.shape}")
        return unvec(self.matrix @ vec(x), self.out_dim)

    def apply_batch(self, xs) -> np.ndarray:
        vs = vec_batch(xs) @ self.matrix.T
        return unvec_batch(vs, self.out_dim)

    def compose(self, other: "SuperOperator") -> "SuperOperator":
        """``self o other`` (apply ``other`` first)."""
        if other.out_dim != self.in_dim:
            raise ValueError("dimension mismatch in composition")
        return SuperOperator(other.in_dim, self.out_dim, self.matrix @ other.matrix)

    def adjoint(self) -> "SuperOperator":
        """Hilbert-Schmidt adjoint."""
        return SuperOperator(self.out_dim, self.in_dim, self.matrix.conj().T)

    def norm(self) -> float:
        """Operator norm for the Hilbert-Schmidt geometry on both sides."""
        return float(np.linalg.norm(self.matrix, 2))

    def basis_residual(self, f: Callable) -> float:
        """Largest deviation between ``self`` and ``f`` on matrix units."""
        err = 0.0
        for e in matrix_units(self.in_dim):
            err = max(err, float(np.abs(self.apply(e) - f(e)).max()))
        return err
