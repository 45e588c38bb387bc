"""Shared numeric oracles for the test suite.

The dense helpers rebuild measurement objects as explicit matrices so the
series/sampling code paths can be checked against direct linear algebra.
Convention used throughout: ⟨n|F(φ)|m⟩ = (1/2π) H_nm e^{iφ(n−m)}.
"""

import zlib

import numpy as np


def dense_F(H: np.ndarray, phi: float) -> np.ndarray:
    """Phase-POVM element F(φ) as a dense matrix."""
    n = np.arange(len(H))
    e = np.exp(1j * phi * n)
    return (e[:, None] * H * e.conj()[None, :]) / (2 * np.pi)


def dense_density(H: np.ndarray, rho: np.ndarray, phi: float) -> float:
    """p(φ) = Tr[F(φ) ρ] evaluated without any series shortcuts."""
    F = dense_F(H, phi)
    return float(np.real(np.sum(F * rho.T)))


def midpoint_grid(n: int) -> np.ndarray:
    """n angles (k+½)·2π/n — never on a binning boundary for N ≤ 2¹⁰."""
    return (np.arange(n) + 0.5) * (2 * np.pi / n)


def outer_rho(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def rng_for(name: str) -> np.random.Generator:
    """Deterministic per-test generator keyed by a label."""
    return np.random.default_rng(zlib.crc32(name.encode()))
