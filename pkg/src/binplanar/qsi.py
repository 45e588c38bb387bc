"""Qubit state inference: turning phase outcomes φ into hard signs μ̂ = ±1.

Three techniques, in increasing sophistication:

  binning    nearest rotation sector: sign of the lobe round(Nφ/π)
  local-ml   per-qubit likelihoods f±(φ) with neighbour loss counts
             marginalized through the discrete dephasing Ĉ_J
  ml         exact joint maximum likelihood for an isolated measured pair

Loss enters through the Kraus channel Â_k = (1/√k!)(1−e^{−γ})^{k/2}e^{−γn̂/2}â^k
truncated at k ≤ u and the received rotations Ĉ_k = e^{−iπkn̂/N²}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codes import Code, xbasis_state
from .fock import annihilate
from .loss import emission_count_prior
from .povm import PhasePOVM, density_envelope, eval_density, phase_series


def bin_phase(phi, N: int):
    """Sign of the rotation sector containing φ: lobes of width π/N around
    the support angles πl/N, even l → +1.  Exact boundary angles resolve
    to +1."""
    phi = np.asarray(phi, dtype=np.float64)
    x = phi * (N / math.pi) + 0.5
    l = np.floor(x)
    sign = np.where((l.astype(np.int64) % (2 * N)) % 2 == 0, 1, -1)
    sign = np.where(x == l, 1, sign)  # boundary tie-break
    if np.ndim(phi) == 0:
        return int(sign)
    return sign.astype(np.int64)


def completeness_defect(code: Code, gamma: float, u: int) -> float:
    """Codespace weight missed by truncating the loss channel at k ≤ u.

    On a Fock level n the channel weights are binomial(n, 1−e^{−γ}), so the
    defect is largest on the topmost support level n = K·N.
    """
    eta = math.exp(-gamma)
    n = code.K * code.N
    kept = sum(math.comb(n, k) * (1 - eta) ** k * eta ** (n - k)
               for k in range(min(u, n) + 1))
    return 1.0 - kept


def adaptive_u(code: Code, gamma: float, tol: float = 1e-8) -> int:
    """Smallest truncation order whose completeness defect is below tol."""
    u = 0
    while completeness_defect(code, gamma, u) > tol:
        u += 1
        if u > code.K * code.N:
            break
    return u


def harden(f_plus, f_minus):
    """μ̂ from likelihoods; ties go to +1."""
    return np.where(np.asarray(f_plus) >= np.asarray(f_minus), 1, -1)


def soft_weight(f_plus, f_minus, mu_hat, cap: float = 1e3):
    """w = −log(f_other/f_chosen) ≥ 0; vanishing f_chosen gives the cap."""
    fp = np.asarray(f_plus, dtype=np.float64)
    fm = np.asarray(f_minus, dtype=np.float64)
    mu = np.asarray(mu_hat)
    chosen = np.where(mu == 1, fp, fm)
    other = np.where(mu == 1, fm, fp)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.log(chosen) - np.log(other)
    w = np.where(chosen <= 0.0, cap, w)
    w = np.where((other <= 0.0) & (chosen > 0.0), cap, w)
    return np.clip(w, 0.0, cap)


# ---------------------------------------------------------------------------
# per-(code, POVM, γ) likelihood tables
# ---------------------------------------------------------------------------

@dataclass
class QsiTables:
    """Precomputed cosine series for densities and likelihoods.

    All series are for the *unrotated* states; received dephasing by angle θ
    just shifts the evaluation point (phase covariance).
    """

    code: Code
    povm: PhasePOVM
    gamma: float
    u: int = 3
    _sign_series: dict = field(default_factory=dict, repr=False)
    _mix: dict = field(default_factory=dict, repr=False)
    _P_deg: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.n_max = self.povm.n_max
        plus = np.real(xbasis_state(self.code, +1, self.n_max))
        minus = np.real(xbasis_state(self.code, -1, self.n_max))
        self._base = {+1: plus, -1: minus}
        eta = math.exp(-self.gamma)
        # q_{i,k} series, with the Â_k weights folded in
        self.q_series = {}
        for sign in (+1, -1):
            for k in range(self.u + 1):
                v = annihilate(self._base[sign], k)
                v = v * np.exp(-0.5 * self.gamma * np.arange(self.n_max + 1))
                pref = (1 - eta) ** k / math.factorial(k)
                self.q_series[(sign, k)] = pref * phase_series(self.povm.H, v).real
        self.Q_series = {s: sum(self.q_series[(s, k)] for k in range(self.u + 1))
                         for s in (+1, -1)}
        # truncated loss-count prior Tr[Â_j|±><±|Â_j†], kept unnormalized so
        # that ∫(f⁺+f⁻)dφ reproduces the operator traces exactly
        self.prior_raw = emission_count_prior(self.code, self.gamma, self.u)
        self.prior = self.prior_raw / self.prior_raw.sum()

    # -- densities conditioned on the own loss count ------------------------

    def sign_series(self, j: int):
        """Series of tr[F(φ) â^j e^{−γn̂/2}|±><±|h.c.] (common scale dropped)."""
        if j not in self._sign_series:
            decay = np.exp(-0.5 * self.gamma * np.arange(self.n_max + 1))
            pair = []
            for sign in (+1, -1):
                v = annihilate(self._base[sign], j) * decay
                pair.append(phase_series(self.povm.H, v).real)
            self._sign_series[j] = tuple(pair)
        return self._sign_series[j]

    def mix_density(self, j: int):
        """Normalized outcome density for the twirled logical state after j
        own losses, plus its rejection envelope."""
        if j not in self._mix:
            sp, sm = self.sign_series(j)
            s = sp + sm
            if s[0] <= 0.0:
                raise RuntimeError(f"empty density for j={j}")
            s = s / s[0]
            self._mix[j] = (s, density_envelope(s))
        return self._mix[j]

    # -- neighbour-count marginals ------------------------------------------

    def P_for_degree(self, deg: int) -> np.ndarray:
        """Distribution of J = Σ neighbour losses for `deg` neighbours."""
        if deg not in self._P_deg:
            P = np.ones(1)
            for _ in range(deg):
                P = np.convolve(P, self.prior_raw)
            self._P_deg[deg] = P
        return self._P_deg[deg]

    def local_likelihoods(self, phi: np.ndarray, P_J: np.ndarray):
        """f±(φ) = Σ_J P(J) Q±(φ + πJ/N²), vectorized over φ."""
        phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
        shift = math.pi / self.code.N ** 2
        fp = np.zeros(len(phi))
        fm = np.zeros(len(phi))
        for J, w in enumerate(P_J):
            if w == 0.0:
                continue
            ang = phi + shift * J
            fp += w * eval_density(self.Q_series[+1], ang)
            fm += w * eval_density(self.Q_series[-1], ang)
        return fp, fm


_tables_cache: dict = {}


def get_tables(code: Code, povm: PhasePOVM, gamma: float, u: int = 3) -> QsiTables:
    key = (code.N, code.K, povm.kind, povm.n_max, round(gamma, 12), u)
    if key not in _tables_cache:
        _tables_cache[key] = QsiTables(code, povm, gamma, u)
    return _tables_cache[key]


# ---------------------------------------------------------------------------
# QSI techniques
# ---------------------------------------------------------------------------

def local_ml_likelihood(phi, tables: QsiTables, neighbor_outcomes=(),
                        n_unresolved: int = 0, extra_priors=()):
    """Reference local-ML likelihood pair for one qubit.

    `neighbor_outcomes` are the hard ±1 results of already-measured (raster
    earlier) neighbours — a missing value is a protocol error.  Later
    neighbours enter as `n_unresolved` equal-prior mixtures.  `extra_priors`
    appends explicit loss-count priors (e.g. a noiseless neighbour δ_{j0}).
    The outcome *values* do not alter the numbers (the ± loss priors are
    identical); they are validated and counted.
    """
    for o in neighbor_outcomes:
        if o not in (+1, -1):
            raise ValueError(
                "neighbor outcome missing or invalid: raster order violated")
    if n_unresolved < 0:
        raise ValueError("n_unresolved must be >= 0")
    P = tables.P_for_degree(len(tuple(neighbor_outcomes)) + n_unresolved)
    for pr in extra_priors:
        P = np.convolve(P, np.asarray(pr, dtype=np.float64))
    fp, fm = tables.local_likelihoods(phi, P)
    if np.ndim(phi) == 0:
        return float(fp[0]), float(fm[0])
    return fp, fm


def ml_qsi_2q(phi1, phi2, tables: QsiTables):
    """Joint ML signs for two measured qubits linked by one CROT.

    ℒ(i₁,i₂) = Σ_{k,k'} q_{i₁,k}(φ₁+πk'/N²) · q_{i₂,k'}(φ₂+πk/N²);
    ties resolve in the order (+,+), (+,−), (−,+), (−,−).
    """
    phi1 = np.atleast_1d(np.asarray(phi1, dtype=np.float64))
    phi2 = np.atleast_1d(np.asarray(phi2, dtype=np.float64))
    u = tables.u
    shift = math.pi / tables.code.N ** 2
    B = len(phi1)
    # axis layout: [sign, k1 (qubit-1 loss), k2 (qubit-2 loss), shot]
    A1 = np.empty((2, u + 1, u + 1, B))
    A2 = np.empty((2, u + 1, u + 1, B))
    for si, s in enumerate((+1, -1)):
        for k1 in range(u + 1):
            for k2 in range(u + 1):
                A1[si, k1, k2] = eval_density(tables.q_series[(s, k1)], phi1 + shift * k2)
                A2[si, k1, k2] = eval_density(tables.q_series[(s, k2)], phi2 + shift * k1)
    # ℒ[i1, i2] = Σ_{k1,k2} q_{i1,k1}(φ1+πk2/N²) q_{i2,k2}(φ2+πk1/N²)
    L = np.einsum("aklb,cklb->acb", A1, A2)
    flat = L.reshape(4, B)
    pick = np.argmax(flat, axis=0)  # first max wins: (+,+), (+,−), (−,+), (−,−)
    i1 = np.where(pick < 2, 1, -1)
    i2 = np.where(pick % 2 == 0, 1, -1)
    return i1, i2
