"""Truncated single-mode Fock space: state vectors and shifted-diagonal operators.

States are plain complex ndarrays over |0>..|n_max>.  Every operator the rest
of the package needs -- damping exponentials, rotation phases, annihilation
powers and their products -- has the form D(n̂)·â^k, which is closed under
composition and costs O(n_max) to apply.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def n_max_for(N: int, K: int) -> int:
    """Default Fock cutoff for an (N, K) code: (K + 2)·N + 4."""
    return (K + 2) * N + 4


def basis_state(n: int, n_max: int) -> np.ndarray:
    if not 0 <= n <= n_max:
        raise ValueError(f"|{n}> lies outside cutoff n_max={n_max}")
    v = np.zeros(n_max + 1, dtype=np.complex128)
    v[n] = 1.0
    return v


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """<u|v>.  Mixing different truncations is always a bug, so it raises."""
    if u.shape != v.shape:
        raise ValueError(
            f"cutoff mismatch: n_max {len(u) - 1} vs {len(v) - 1}"
        )
    return complex(np.vdot(u, v))


def norm2(v: np.ndarray) -> float:
    return float(np.real(np.vdot(v, v)))


def falling_factorial(n: np.ndarray, k: int) -> np.ndarray:
    """n·(n−1)···(n−k+1) elementwise, as float."""
    out = np.ones(np.shape(n), dtype=np.float64)
    for j in range(k):
        out = out * (np.asarray(n, dtype=np.float64) - j)
    return out


def annihilate(v: np.ndarray, k: int = 1) -> np.ndarray:
    """Apply â^k: amplitudes drop k slots, picking up √(n!/(n−k)!)."""
    if k < 0:
        raise ValueError("annihilation power must be non-negative")
    if k == 0:
        return v.copy()
    d = len(v)
    out = np.zeros_like(v)
    if k < d:
        src = np.arange(k, d)
        out[: d - k] = v[k:] * np.sqrt(falling_factorial(src, k))
    return out


def apply_number_function(v: np.ndarray, f) -> np.ndarray:
    """Multiply by f(n̂): f receives the integer array n = 0..n_max."""
    n = np.arange(len(v))
    return v * np.asarray(f(n))


def number_expectation(v: np.ndarray) -> float:
    """<n̂> for the (normalized or not) state v."""
    w = np.abs(v) ** 2
    tot = w.sum()
    if tot == 0.0:
        raise ValueError("zero vector has no number expectation")
    return float((w * np.arange(len(v))).sum() / tot)


# ---------------------------------------------------------------------------
# shifted-diagonal operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeOperator:
    """Operator D(n̂)·â^k: lower k times, then scale each |n> by diag[n]."""

    diag: np.ndarray
    k: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("annihilation power must be non-negative")
        object.__setattr__(self, "diag", np.asarray(self.diag, dtype=np.complex128))

    @property
    def n_max(self) -> int:
        return len(self.diag) - 1

    @classmethod
    def identity(cls, n_max: int) -> "ModeOperator":
        return cls(diag=np.ones(n_max + 1, dtype=np.complex128), k=0)

    def is_identity(self) -> bool:
        return self.k == 0 and bool(np.all(self.diag == 1.0))

    def apply(self, v: np.ndarray) -> np.ndarray:
        if len(v) != len(self.diag):
            raise ValueError(
                f"cutoff mismatch: operator n_max {self.n_max} vs state {len(v) - 1}"
            )
        if self.is_identity():
            return v
        w = annihilate(v, self.k) if self.k else v
        return w * self.diag

    def compose(self, other: "ModeOperator") -> "ModeOperator":
        """self ∘ other (other acts first).  Result is shifted-diagonal again."""
        if len(self.diag) != len(other.diag):
            raise ValueError("cutoff mismatch in operator composition")
        d = len(self.diag)
        shifted = np.ones(d, dtype=np.complex128)
        if self.k < d:
            shifted[: d - self.k] = other.diag[self.k:]
        return ModeOperator(diag=self.diag * shifted, k=self.k + other.k)

    def scaled(self, c: complex) -> "ModeOperator":
        return ModeOperator(diag=self.diag * c, k=self.k)

    def as_matrix(self) -> np.ndarray:
        """Dense matrix, for oracles and small checks only."""
        d = len(self.diag)
        m = np.zeros((d, d), dtype=np.complex128)
        cols = np.arange(self.k, d)
        rows = cols - self.k
        m[rows, cols] = self.diag[rows] * np.sqrt(falling_factorial(cols, self.k))
        return m


def lowering_matrix(n_max: int) -> np.ndarray:
    """Dense â, for test oracles."""
    m = np.zeros((n_max + 1, n_max + 1), dtype=np.complex128)
    n = np.arange(1, n_max + 1)
    m[n - 1, n] = np.sqrt(n)
    return m
