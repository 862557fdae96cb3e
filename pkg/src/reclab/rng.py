"""Seeded randomness: seed splitting and random matrix ensembles.

Every random object is drawn from a ``numpy.random.Generator`` backed by
Philox, a counter-based 64-bit generator. Per-trial streams are keyed by
``mix64(seed, trial_index)``, the SplitMix64 finalizer applied to
``seed + (index + 1) * golden_gamma``.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(seed: int, index: int) -> int:
    z = (int(seed) + (int(index) + 1) * _GOLDEN_GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def make_rng(seed) -> np.random.Generator:
    """Philox generator for an integer seed; generators pass through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK))


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with the R-diagonal phases removed."""
    q, r = np.linalg.qr(ginibre(rng, n, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """First ``cols`` columns of a Haar unitary: an isometry ``C^cols -> C^rows``."""
    if rows < cols:
        raise ValueError(f"no isometry from C^{cols} into C^{rows}")
    return haar_unitary(rng, rows)[:, :cols]


def random_density(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt (induced Ginibre) random density matrix of given rank."""
    rank = n if rank is None else rank
    g = ginibre(rng, n, rank)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    g = ginibre(rng, n, n)
    return 0.5 * (g + g.conj().T)


def random_matrix(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    return ginibre(rng, rows, rows if cols is None else cols)
