"""Photon-loss model: trajectory sampling and commuted error operators.

During every CROT window each mode decays at rate κ = γ/t_gate while the
gates e^{iΩ t n̂⊗n̂} run (Ω·t_gate·N² = π for an order-N code).  Commuting the
jump operators past the gates turns a trajectory with emission times 𝐭 into

    ideal CROTs  ×  Π_a Ê_{a,𝐭}

with the per-mode error operator

    Ê_a = √κ^{j_a} e^{κτ(𝐭_a)/2} · e^{iΘ_a n̂} · â^{j_a} · e^{−γn̂/2},
    Θ_a = −Ω Σ_{b∈𝒩(a)} τ(𝐭_b),    τ(𝐭) = j·t_gate − Σ_m t_m ,

i.e. amplitude damping from its own j_a losses plus a rotation from photons
its neighbours lost.  Emission times are sampled per mode from the gate-free
decay law (the CROT phases drop out of the emission statistics)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .codes import Code, xbasis_state
from .fock import ModeOperator


@dataclass(frozen=True)
class NoiseParams:
    """Loss strength and gate timing for an order-N code lattice."""

    gamma: float
    N: int
    t_gate: float = 1.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.t_gate <= 0:
            raise ValueError("t_gate must be positive")

    @property
    def kappa(self) -> float:
        return self.gamma / self.t_gate

    @property
    def omega(self) -> float:
        """CROT drive Ω = π/(N² t_gate) between two order-N codes."""
        return math.pi / (self.N ** 2 * self.t_gate)


@dataclass(frozen=True)
class GateGraph:
    """Which modes share CROT gates (undirected, simple)."""

    n_modes: int
    edges: tuple

    def __post_init__(self):
        for (a, b) in self.edges:
            if not (0 <= a < self.n_modes and 0 <= b < self.n_modes) or a == b:
                raise ValueError(f"bad edge ({a},{b})")

    @cached_property
    def neighbors(self) -> tuple:
        adj = [[] for _ in range(self.n_modes)]
        for (a, b) in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)


def chain_graph(n_modes: int) -> GateGraph:
    return GateGraph(n_modes, tuple((i, i + 1) for i in range(n_modes - 1)))


def tau(times, t_gate: float = 1.0) -> float:
    """Effective delay τ(𝐭) = j·t_gate − Σ_m t_m of one mode's emissions."""
    t = np.asarray(times, dtype=np.float64)
    return float(len(t) * t_gate - t.sum())


# ---------------------------------------------------------------------------
# emission-time sampling (gate-independent)
# ---------------------------------------------------------------------------

_BISECT_ITERS = 48  # 2^-48 ≈ 4e-15 relative — below the 1e-12 target


def sample_emission_times(populations: np.ndarray, gamma: float, t_gate: float,
                          rng: np.random.Generator, size: int):
    """Emission times for `size` independent modes started in the given
    number distribution.

    Inverse-transform sampling on the closed-form survival probability
    S(Δ) = Σ_n p_n e^{−nκΔ}, bisected to 1e−12·t_gate; after each jump the
    distribution is updated by the no-jump decay and one â.  Returns a list
    of ascending time arrays.
    """
    populations = np.asarray(populations, dtype=np.float64)
    if populations.ndim != 1 or populations.sum() <= 0:
        raise ValueError("populations must be a non-empty 1-D distribution")
    if gamma == 0.0:
        return [np.empty(0) for _ in range(size)]
    kappa = gamma / t_gate
    D = len(populations)
    n = np.arange(D, dtype=np.float64)

    P = np.tile(populations / populations.sum(), (size, 1))
    t = np.zeros(size)
    active = np.arange(size)
    rec_ids: list = []
    rec_times: list = []

    while active.size:
        rem = t_gate - t[active]
        R = rng.random(active.size)
        s_end = (P[active] * np.exp(-np.outer(rem, kappa * n))).sum(axis=1)
        jumping = s_end < R
        if not np.any(jumping):
            break
        idx = active[jumping]
        rloc = R[jumping]
        lo = np.zeros(idx.size)
        hi = rem[jumping]
        Pj = P[idx]
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            s_mid = (Pj * np.exp(-np.outer(mid, kappa * n))).sum(axis=1)
            below = s_mid < rloc  # jump happened before mid
            hi = np.where(below, mid, hi)
            lo = np.where(below, lo, mid)
        dt = 0.5 * (lo + hi)
        t[idx] += dt
        rec_ids.append(idx.copy())
        rec_times.append(t[idx].copy())
        # no-jump evolution for dt, then one annihilation
        W = Pj * np.exp(-np.outer(dt, kappa * n))
        W = W * n  # jump weights n·p_n
        W[:, :-1] = W[:, 1:]
        W[:, -1] = 0.0
        P[idx] = W / W.sum(axis=1, keepdims=True)
        active = idx

    out = [np.empty(0)] * size
    if rec_ids:
        ids = np.concatenate(rec_ids)
        ts = np.concatenate(rec_times)
        order = np.argsort(ids, kind="stable")
        ids, ts = ids[order], ts[order]
        starts = np.searchsorted(ids, np.arange(size))
        ends = np.searchsorted(ids, np.arange(size), side="right")
        for i in range(size):
            if ends[i] > starts[i]:
                out[i] = np.sort(ts[starts[i]:ends[i]])
    return out


def sample_emissions(code: Code, noise: NoiseParams, rng: np.random.Generator,
                     size: int = 1, populations: np.ndarray | None = None):
    """Per-mode emission records for `size` cluster modes prepared in |+>."""
    if populations is None:
        populations = np.abs(xbasis_state(code, +1)) ** 2
    return sample_emission_times(populations, noise.gamma, noise.t_gate, rng, size)


def emission_count_prior(code: Code, gamma: float, jmax: int) -> np.ndarray:
    """P(j) = Tr[Â_j |+><+| Â_j†], j = 0..jmax (binomial thinning)."""
    pops = np.abs(xbasis_state(code, +1)) ** 2
    eta = math.exp(-gamma)
    P = np.zeros(jmax + 1)
    ns = np.flatnonzero(pops > 0)
    for n in ns:
        for j in range(min(jmax, n) + 1):
            P[j] += pops[n] * math.comb(n, j) * (1 - eta) ** j * eta ** (n - j)
    if gamma == 0.0:
        P[:] = 0.0
        P[0] = 1.0
    return P


# ---------------------------------------------------------------------------
# commuted error operators and the ideal gate
# ---------------------------------------------------------------------------

def error_operator(mode: int, emissions, graph: GateGraph, noise: NoiseParams,
                   n_max: int) -> ModeOperator:
    """Ê_{a,𝐭} for one mode, given every mode's emission record."""
    times = emissions[mode]
    j = len(times)
    tau_a = tau(times, noise.t_gate)
    theta = -noise.omega * sum(tau(emissions[b], noise.t_gate)
                               for b in graph.neighbors[mode])
    n = np.arange(n_max + 1)
    kap = noise.kappa
    scalar = kap ** (j / 2.0) * math.exp(0.5 * kap * tau_a - 0.5 * kap * noise.t_gate * j)
    diag = scalar * np.exp((1j * theta - 0.5 * noise.gamma) * n)
    return ModeOperator(diag=diag, k=j)


def dephasing_angle(mode: int, emissions, graph: GateGraph, noise: NoiseParams) -> float:
    """Θ_a = −Ω Σ_{b∈𝒩(a)} τ(𝐭_b): the received-rotation angle alone."""
    return -noise.omega * sum(tau(emissions[b], noise.t_gate)
                              for b in graph.neighbors[mode])


def crot_phases(N: int, n_max1: int, n_max2: int | None = None) -> np.ndarray:
    """Diagonal of CROT between two order-N codes: e^{iπ n₁n₂/N²}."""
    if n_max2 is None:
        n_max2 = n_max1
    n1 = np.arange(n_max1 + 1)
    n2 = np.arange(n_max2 + 1)
    return np.exp(1j * math.pi * np.outer(n1, n2) / N ** 2)


def loss_kraus(code: Code, gamma: float, k: int, n_max: int | None = None) -> ModeOperator:
    """Â_k = (1/√k!)(1−e^{−γ})^{k/2} e^{−γn̂/2} â^k."""
    if n_max is None:
        n_max = code.n_max
    n = np.arange(n_max + 1)
    pref = (1 - math.exp(-gamma)) ** (k / 2.0) / math.sqrt(math.factorial(k))
    return ModeOperator(diag=pref * np.exp(-0.5 * gamma * n), k=k)


# ---------------------------------------------------------------------------
# dense two-mode MCWF reference sampler (for Ω-independence checks)
# ---------------------------------------------------------------------------

def mcwf_two_mode_emission_times(code: Code, gamma: float, omega: float,
                                 shots: int, rng: np.random.Generator,
                                 t_gate: float = 1.0, chunk: int = 5000) -> np.ndarray:
    """All emission times from a faithful dense MCWF unravelling of two modes
    in |+>⊗|+> coupled by e^{iΩ t n̂₁n̂₂} with independent decay κ = γ/t_gate.

    Keeps full complex amplitudes (the Ω phases are carried explicitly) and
    draws jump channels from the instantaneous ⟨n̂_μ⟩.  Pools times over all
    shots into one flat array.
    """
    if gamma == 0.0:
        return np.empty(0)
    kappa = gamma / t_gate
    plus = xbasis_state(code, +1)
    D = len(plus)
    n = np.arange(D, dtype=np.float64)
    nsum = n[:, None] + n[None, :]
    phase_rate = 1j * omega * np.outer(n, n) - 0.5 * kappa * nsum
    sq = np.sqrt(n)

    all_times: list = []
    done = 0
    while done < shots:
        B = min(chunk, shots - done)
        psi = np.tile(np.outer(plus, plus)[None, :, :], (B, 1, 1)).astype(np.complex128)
        t = np.zeros(B)
        active = np.arange(B)
        while active.size:
            rem = t_gate - t[active]
            R = rng.random(active.size)
            pops = np.abs(psi[active]) ** 2
            norm = pops.sum(axis=(1, 2))
            s_end = (pops * np.exp(-kappa * nsum)[None] ** rem[:, None, None]).sum(axis=(1, 2)) / norm
            jumping = s_end < R
            if not np.any(jumping):
                break
            idx = active[jumping]
            rloc = R[jumping] * pops[jumping].sum(axis=(1, 2))
            pj = pops[jumping]
            lo = np.zeros(idx.size)
            hi = rem[jumping]
            for _ in range(_BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                s = (pj * np.exp(-kappa * mid[:, None, None] * nsum[None])).sum(axis=(1, 2))
                below = s < rloc
                hi = np.where(below, mid, hi)
                lo = np.where(below, lo, mid)
            dt = 0.5 * (lo + hi)
            t[idx] += dt
            all_times.append(t[idx].copy())
            # advance amplitudes to the jump time, pick a channel, jump
            psi_idx = psi[idx] * np.exp(phase_rate[None] * dt[:, None, None])
            w = np.abs(psi_idx) ** 2
            n1 = (w * n[None, :, None]).sum(axis=(1, 2))
            n2 = (w * n[None, None, :]).sum(axis=(1, 2))
            pick1 = rng.random(idx.size) < n1 / (n1 + n2)
            out = np.empty_like(psi_idx)
            # â on mode 1
            out[pick1, :-1, :] = psi_idx[pick1, 1:, :] * sq[1:, None]
            out[pick1, -1, :] = 0.0
            # â on mode 2
            out[~pick1, :, :-1] = psi_idx[~pick1, :, 1:] * sq[None, 1:]
            out[~pick1, :, -1] = 0.0
            nrm = np.sqrt((np.abs(out) ** 2).sum(axis=(1, 2)))
            psi[idx] = out / nrm[:, None, None]
            active = idx
        done += B
    if all_times:
        return np.sort(np.concatenate(all_times))
    return np.empty(0)
