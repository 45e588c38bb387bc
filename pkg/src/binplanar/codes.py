"""Binomial rotation-symmetric bosonic codes.

An (N, K) code lives on Fock support n = 0, N, 2N, ... with binomial
amplitudes; Ẑ_N = exp(iπn̂/N) acts as logical Z and the discrete rotation
R̂_2N equals it.  Dual-basis states |±> spread over all K+1 support points:

    |±> = Σ_k √(C(K,k)/2^K) (±1)^k |kN>

Code distances: d_θ = π/N against rotations, d_n = N against loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .fock import n_max_for


@dataclass(frozen=True)
class Code:
    """Parameters of a binomial rotation-symmetric code."""

    N: int
    K: int

    def __post_init__(self):
        if self.N < 1 or self.K < 1:
            raise ValueError("need N >= 1 and K >= 1")

    @property
    def nbar(self) -> float:
        """Mean photon number N·K/2 of codewords and of |±>."""
        return self.N * self.K / 2.0

    @property
    def d_theta(self) -> float:
        return math.pi / self.N

    @property
    def d_n(self) -> int:
        return self.N

    @property
    def n_max(self) -> int:
        return n_max_for(self.N, self.K)

    @property
    def is_trivial(self) -> bool:
        return self.N == 1 and self.K == 1


def codeword(code: Code, mu: int, n_max: int | None = None) -> np.ndarray:
    """|mu_L> with amplitudes √(2^{1−K} C(K, 2k+mu)) on |(2k+mu)N>.

    The amplitudes are exactly normalized for every K (even or odd) because
    the even and odd binomial slices each sum to 2^{K−1}.
    """
    if mu not in (0, 1):
        raise ValueError("mu must be 0 or 1")
    if n_max is None:
        n_max = code.n_max
    N, K = code.N, code.K
    top = math.ceil(K / 2) - mu
    ks = np.arange(top + 1)
    js = 2 * ks + mu
    ns = js * N
    support = ns[js <= K]
    if support.size and support.max() > n_max:
        raise ValueError(f"cutoff {n_max} too small for ({N},{K}) codeword")
    amps = np.sqrt(2.0 ** (1 - K) * comb(K, js[js <= K]))
    v = np.zeros(n_max + 1, dtype=np.complex128)
    v[support] = amps
    return v


def xbasis_state(code: Code, sign: int, n_max: int | None = None) -> np.ndarray:
    """|+> or |−>: (|0_L> ± |1_L>)/√2."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    return (codeword(code, 0, n_max) + sign * codeword(code, 1, n_max)) / math.sqrt(2)


def logical_Z_diag(code: Code, n_max: int | None = None) -> np.ndarray:
    """Diagonal of Ẑ_N = exp(iπn̂/N)."""
    if n_max is None:
        n_max = code.n_max
    n = np.arange(n_max + 1)
    return np.exp(1j * math.pi * n / code.N)


def rotation_diag(order: int, n_max: int) -> np.ndarray:
    """Diagonal of the discrete rotation R̂_m = exp(2πi n̂/m)."""
    n = np.arange(n_max + 1)
    return np.exp(2j * math.pi * n / order)
