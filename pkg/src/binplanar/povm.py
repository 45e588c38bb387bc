"""Phase-measurement POVMs and everything computed from them.

A covariant phase POVM is fixed by one real symmetric matrix H with unit
diagonal:

    F(φ) = (1/2π) Σ_mn e^{iφ(m−n)} H_mn |m><n| ,   ∫ F dφ = 1 .

Three kinds are provided:
  canonical   H_mn = 1
  heterodyne  H_mn = Γ((m+n)/2 + 1)/√(m! n!)
  ahd         adaptive homodyne (Mark II), built from an exact rational
              interpolating table

All outcome densities reduce to cosine series in φ, which keeps sampling and
likelihood evaluation cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.optimize import minimize_scalar

from .codes import Code, xbasis_state
from .fock import annihilate

PHASE_KINDS = ("canonical", "heterodyne", "ahd")

_TRUNC_EPS = 1e-14
_L_CAP = 64


# ---------------------------------------------------------------------------
# H matrices
# ---------------------------------------------------------------------------

def canonical_H(n_max: int) -> np.ndarray:
    return np.ones((n_max + 1, n_max + 1))


def heterodyne_H(n_max: int) -> np.ndarray:
    """H_mn = Γ((m+n)/2 + 1)/√(m! n!), from the radial r·dr marginal."""
    m = np.arange(n_max + 1)
    lg_half = np.array([math.lgamma((m[i] + m[j]) / 2 + 1)
                        for i in range(n_max + 1)
                        for j in range(n_max + 1)]).reshape(n_max + 1, n_max + 1)
    lfact = np.array([math.lgamma(i + 1) for i in range(n_max + 1)])
    return np.exp(lg_half - 0.5 * (lfact[:, None] + lfact[None, :]))


@lru_cache(maxsize=4)
def _mark2_table(size: int) -> tuple:
    """Exact rational Mark II moment table M_{m,n}, returned as longdouble.

    Boundary M_{m,0} = 1/(2m+1)!!, interior by the symmetric recursion
    M_{m,n} = (n·M_{m,n−1} + m·M_{m−1,n}) / (2(m−n)² + m + n).
    """
    M = [[None] * size for _ in range(size)]
    M[0][0] = Fraction(1)
    for n in range(1, size):
        v = Fraction(1)
        for j in range(1, n + 1):
            v /= 2 * j + 1
        M[0][n] = M[n][0] = v
    for s in range(2, 2 * size - 1):
        for m in range(1, size):
            n = s - m
            if not 1 <= n < size or M[m][n] is not None:
                continue
            num = n * M[m][n - 1] + m * M[m - 1][n]
            M[m][n] = num / (2 * (m - n) ** 2 + m + n)
    out = np.empty((size, size), dtype=np.longdouble)
    for m in range(size):
        for n in range(size):
            out[m, n] = np.longdouble(M[m][n].numerator) / np.longdouble(M[m][n].denominator)
    return (out,)


def mark2_M(m: int, n: int) -> Fraction:
    """Exact rational table entry, for golden-value tests."""
    size = max(m, n) + 1
    M = [[None] * size for _ in range(size)]
    M[0][0] = Fraction(1)
    for i in range(1, size):
        v = Fraction(1)
        for j in range(1, i + 1):
            v /= 2 * j + 1
        M[0][i] = M[i][0] = v
    for s in range(2, 2 * size - 1):
        for a in range(1, size):
            b = s - a
            if not 1 <= b < size or M[a][b] is not None:
                continue
            M[a][b] = (b * M[a][b - 1] + a * M[a - 1][b]) / (2 * (a - b) ** 2 + a + b)
    return M[m][n]


def _gen_binom(x: float, lmax: int) -> np.ndarray:
    """Generalized binomial binom(x, l), l = 0..lmax, via the product formula.

    Pole-free for negative-integer x (where Γ-ratio evaluation breaks down).
    """
    out = np.empty(lmax + 1, dtype=np.longdouble)
    out[0] = 1.0
    acc = np.longdouble(1.0)
    for l in range(1, lmax + 1):
        acc = acc * np.longdouble(x - l + 1) / l
        out[l] = acc
    return out


def _gamma_weights(m: int) -> np.ndarray:
    """γ_{m,p} = √(m!)/(2^p (m−2p)! p!) for p = 0..⌊m/2⌋, longdouble."""
    ps = np.arange(m // 2 + 1)
    lg = (0.5 * math.lgamma(m + 1)
          - ps * math.log(2.0)
          - np.array([math.lgamma(m - 2 * p + 1) + math.lgamma(p + 1) for p in ps]))
    return np.exp(lg.astype(np.longdouble))


def ahd_H(n_max: int, l_cap: int = _L_CAP, trunc_eps: float = _TRUNC_EPS) -> np.ndarray:
    """Adaptive-homodyne (Mark II) H matrix.

    H_mn = Σ_pq γ_{m,p} γ_{n,q} C^{(m,n)}_{p,q} with
    C^{(m,n)}_{p,q} = Σ_{l,l'} binom(d,l) binom(−d,l') M_{p+l, q+l'},
    d = (m−n)/2.  The l sums are truncated once increments fall below
    trunc_eps (hard cap l_cap); the alternating series converges fast because
    M decays factorially.  Aborts if any diagonal strays from 1 by >= 1e−6.
    """
    pmax = n_max // 2
    size = pmax + l_cap + 2
    (M,) = _mark2_table(size)
    # windows[p, q, l, lp] = M[p+l, q+lp]
    win = l_cap + 1
    windows = sliding_window_view(M, (win, win))[: pmax + 1, : pmax + 1]
    gam = [_gamma_weights(m) for m in range(n_max + 1)]

    H = np.zeros((n_max + 1, n_max + 1), dtype=np.longdouble)
    for m in range(n_max + 1):
        for n in range(m + 1):
            d = (m - n) / 2.0
            w = _gen_binom(-d, l_cap)
            wp = _gen_binom(d, l_cap)
            P, Q = m // 2 + 1, n // 2 + 1
            # inner l' sum at full width, outer l sum with increment test
            B = np.einsum("pqlk,k->pql", windows[:P, :Q], wp)
            C = np.zeros((P, Q), dtype=np.longdouble)
            for l in range(win):
                inc = w[l] * B[:, :, l]
                C += inc
                if l >= 2 and np.max(np.abs(inc)) < trunc_eps:
                    break
            H[m, n] = gam[m] @ C @ gam[n]
    H = H + np.tril(H, -1).T
    Hf = H.astype(np.float64)
    Hf = (Hf + Hf.T) / 2.0
    derr = np.max(np.abs(np.diag(Hf) - 1.0))
    if derr >= 1e-6:
        raise RuntimeError(f"ahd table failed normalization check: {derr:.3e}")
    return Hf


# ---------------------------------------------------------------------------
# POVM wrapper
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePOVM:
    kind: str
    H: np.ndarray
    _kraus: list = field(default_factory=list, repr=False, compare=False)

    @property
    def n_max(self) -> int:
        return len(self.H) - 1

    def kraus_factors(self) -> np.ndarray:
        """Rows w_i with F(φ) = (1/2π) Σ_i |k_i(φ)><k_i(φ)|, k_i[m] = w_i[m]·e^{imφ}.

        Eigen-decomposition of H; slightly negative eigenvalues (roundoff)
        are clamped, near-null directions dropped.
        """
        if not self._kraus:
            evals, evecs = np.linalg.eigh(self.H)
            lam_max = float(evals.max())
            if evals.min() < -1e-8 * lam_max:
                raise RuntimeError(
                    f"H for {self.kind} is not PSD: min eigenvalue {evals.min():.3e}"
                )
            keep = evals > 1e-14 * lam_max
            w = np.sqrt(np.clip(evals[keep], 0.0, None))[:, None] * evecs[:, keep].T
            self._kraus.append(w)
        return self._kraus[0]


_H_BUILDERS = {
    "canonical": canonical_H,
    "heterodyne": heterodyne_H,
    "ahd": ahd_H,
}

_povm_cache: dict = {}


def build_povm(kind: str, n_max: int) -> PhasePOVM:
    if kind not in _H_BUILDERS:
        raise ValueError(f"unknown phase POVM kind {kind!r}; pick from {PHASE_KINDS}")
    key = (kind, n_max)
    if key not in _povm_cache:
        _povm_cache[key] = PhasePOVM(kind=kind, H=_H_BUILDERS[kind](n_max))
    return _povm_cache[key]


def dump_H(povm: PhasePOVM, path) -> None:
    """Plain-text dump of the H matrix (machine readable, no timestamps)."""
    header = f"phase POVM H matrix  kind={povm.kind}  n_max={povm.n_max}"
    np.savetxt(path, povm.H, header=header)


# ---------------------------------------------------------------------------
# outcome densities as cosine/sine series
# ---------------------------------------------------------------------------

def phase_series(H: np.ndarray, u: np.ndarray, v: np.ndarray | None = None) -> np.ndarray:
    """Series s_d (d = 0..D−1) with p(φ) = (1/2π) Σ_d e^{idφ} s_d + c.c. sans d=0.

    For ρ = |u><v| (v defaults to u): s_d = Σ_m H[m+d, m] u_m v*_{m+d}.
    Hermitian ρ gives s_{−d} = s_d*, so only d >= 0 is stored.
    """
    if v is None:
        v = u
    D = len(u)
    s = np.zeros(D, dtype=np.complex128)
    for d in range(D):
        s[d] = np.dot(np.diagonal(H, -d) * u[: D - d], np.conj(v[d:]))
    return s


def phase_series_rho(H: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """phase_series for a density matrix ρ: s_d = Σ_m H[m+d, m] ρ[m, m+d]."""
    D = len(rho)
    s = np.zeros(D, dtype=np.complex128)
    for d in range(D):
        s[d] = np.dot(np.diagonal(H, -d), np.diagonal(rho, d))
    return s


def phase_series_batch(H: np.ndarray, U: np.ndarray) -> np.ndarray:
    """phase_series for each row of U (real rows), returned (B, D) real."""
    B, D = U.shape
    out = np.empty((B, D))
    for d in range(D):
        out[:, d] = (U[:, : D - d] * U[:, d:]) @ np.diagonal(H, -d)
    return out


def eval_density(s: np.ndarray, phi) -> np.ndarray:
    """p(φ) from a series row (real or complex), vectorized over φ."""
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    d = np.arange(len(s))
    ang = np.outer(phi, d)
    sr, si = np.real(s).copy(), np.imag(s)
    sr[1:] *= 2.0
    p = np.cos(ang) @ sr
    if si.any():
        p = p - 2.0 * (np.sin(ang) @ si)
    return p / (2 * math.pi)


def eval_density_many(S: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """One density per row: S (B, D) real series, phi (B,) -> p (B,)."""
    B, D = S.shape
    d = np.arange(D)
    ang = phi[:, None] * d[None, :]
    w = S.copy()
    w[:, 1:] *= 2.0
    return np.einsum("bd,bd->b", np.cos(ang), w) / (2 * math.pi)


def density_envelope(s: np.ndarray, n_grid: int = 1024) -> float:
    """1.05 × max_φ p(φ): coarse grid then local refinement."""
    grid = np.linspace(0.0, 2 * math.pi, n_grid, endpoint=False)
    p = eval_density(s, grid)
    i = int(np.argmax(p))
    lo, hi = grid[i] - 2 * math.pi / n_grid, grid[i] + 2 * math.pi / n_grid
    res = minimize_scalar(lambda x: -eval_density(s, x)[0], bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-10})
    best = max(float(p[i]), float(-res.fun))
    return 1.05 * best


def rejection_sample(s: np.ndarray, envelope: float, rng: np.random.Generator,
                     size: int, max_rejects: int = 1_000_000) -> np.ndarray:
    """Draw `size` phases from the density with series s, by rejection."""
    out = np.empty(size)
    filled = 0
    wasted = 0
    while filled < size:
        m = max(size - filled, 64)
        m = int(m * 1.5) + 16
        phi = rng.uniform(0.0, 2 * math.pi, m)
        y = rng.uniform(0.0, envelope, m)
        ok = y <= eval_density(s, phi)
        acc = phi[ok]
        take = min(len(acc), size - filled)
        out[filled: filled + take] = acc[:take]
        filled += take
        wasted += m - take
        if wasted > max_rejects:
            raise RuntimeError("rejection sampler exceeded the rejection budget")
    return out


def sample_phase(povm: PhasePOVM, state: np.ndarray, rng: np.random.Generator,
                 size: int = 1) -> np.ndarray:
    """Sample measurement outcomes for a pure state under this POVM."""
    s = phase_series(povm.H, state)
    if np.max(np.abs(np.imag(s))) < 1e-12:
        s = np.real(s)
    env = density_envelope(s)
    return rejection_sample(s, env, rng, size)


# ---------------------------------------------------------------------------
# intrinsic measurement error (γ = 0 Monte Carlo)
# ---------------------------------------------------------------------------

def measurement_error_rate(code: Code, povm: PhasePOVM, qsi: str = "binning",
                           shots: int = 100_000,
                           rng: np.random.Generator | None = None,
                           n_max: int | None = None) -> tuple[float, float]:
    """Residual rate q of misassigned dual-basis signs at γ = 0.

    Twirled preparation: draw μ = ±1 uniformly, then φ from tr[F(φ)|μ><μ|],
    infer μ̂ with the chosen QSI ('binning' or 'ml'), count μ̂ ≠ μ.
    """
    from .qsi import bin_phase  # local import to avoid a cycle

    if rng is None:
        rng = np.random.default_rng(0)
    if n_max is None:
        n_max = min(code.n_max, povm.n_max)
    plus = np.real(xbasis_state(code, +1, n_max))
    minus = np.real(xbasis_state(code, -1, n_max))
    sp = phase_series(povm.H, plus).real
    sm = phase_series(povm.H, minus).real
    n_plus = int(rng.binomial(shots, 0.5))
    phi_p = rejection_sample(sp, density_envelope(sp), rng, n_plus)
    phi_m = rejection_sample(sm, density_envelope(sm), rng, shots - n_plus)
    if qsi == "binning":
        wrong = int(np.sum(bin_phase(phi_p, code.N) != +1))
        wrong += int(np.sum(bin_phase(phi_m, code.N) != -1))
    elif qsi == "ml":
        wp = eval_density(sp, phi_p) >= eval_density(sm, phi_p)
        wm = eval_density(sp, phi_m) >= eval_density(sm, phi_m)
        wrong = int(np.sum(~wp)) + int(np.sum(wm))
    else:
        raise ValueError(f"unknown qsi kind {qsi!r} for measurement_error_rate")
    q = wrong / shots
    return q, math.sqrt(max(q * (1 - q), 1e-12) / shots)
