"""Teleportation along a 1D cluster of RSB qubits, scored by entanglement fidelity.

A noiseless logical ancilla is entangled with the first mode, CROTs link the
chain, the commuted per-mode error operators carry the sampled photon-loss
trajectory, and modes 1..M−1 are measured with a phase POVM.  QSI turns the
angles into hard signs, the byproduct frame is undone on the final mode, and
the overlap with (|00⟩+|11⟩)/√2 is accumulated without renormalizing away
codespace leakage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codes import Code, codeword, xbasis_state
from .fock import ModeOperator
from .loss import NoiseParams, chain_graph, error_operator, sample_emission_times
from .povm import (build_povm, density_envelope, phase_series_rho,
                   rejection_sample)
from .qsi import bin_phase, get_tables, harden, local_ml_likelihood, ml_qsi_2q

_H2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_MAX_DENSE = 40_000_000  # complex entries


@dataclass(frozen=True)
class ChainConfig:
    code: Code
    noise: NoiseParams
    povm: str = "canonical"
    qsi: str = "binning"  # binning | local-ml | ml
    shots: int = 10_000
    M: int = 3
    n_max: int | None = None

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("chain needs M >= 2")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if self.qsi not in ("binning", "local-ml", "ml"):
            raise ValueError(f"unknown qsi kind {self.qsi!r}")


def recovery_frame(mu_hats) -> np.ndarray:
    """Byproduct-frame recovery for the last qubit from hard outcomes alone.

    Each measurement contributes H·Z^{b}, b = (1−μ̂)/2; the recovery is the
    inverse of the accumulated product (unitary, so the adjoint).
    """
    W = np.eye(2)
    for mu in mu_hats:
        V = _H2.copy()
        if mu == -1:
            V = V @ np.diag([1.0, -1.0])
        elif mu != 1:
            raise ValueError("hard outcomes must be ±1")
        W = V @ W
    return W.conj().T


def _apply_mode_diag(psi: np.ndarray, op: ModeOperator, axis: int) -> np.ndarray:
    """Apply a shifted-diagonal ModeOperator along one tensor axis."""
    if op.is_identity():
        return psi
    psi = np.moveaxis(psi, axis, -1)
    D = psi.shape[-1]
    out = np.zeros_like(psi)
    k = op.k
    if k < D:
        n = np.arange(k, D)
        fall = np.sqrt(np.prod([n - j for j in range(k)], axis=0)) if k else np.ones(D)
        src = psi[..., k:] * fall if k else psi
        out[..., : D - k] = src * op.diag[: D - k]
    return np.moveaxis(out, -1, axis)


def _mode_gram(psi: np.ndarray, axis: int) -> np.ndarray:
    """Reduced density matrix of one mode axis: G[n, n'] = Σ ψ[..n..] ψ̄[..n'..]."""
    m = np.moveaxis(psi, axis, -1)
    m = m.reshape(-1, m.shape[-1])
    return m.T @ m.conj()


def _collapse(psi: np.ndarray, axis: int, W: np.ndarray, phi: float) -> np.ndarray:
    """Contract the measured mode axis with the POVM Kraus rows at angle φ.

    The branch index (Kraus rank) replaces the mode axis; branches stay
    unnormalized so incoherent bookkeeping is a plain |·|² sum later.
    """
    D = psi.shape[axis]
    n = np.arange(D)
    K = W * np.exp(-1j * phi * n)[None, :] / math.sqrt(2 * math.pi)
    out = np.tensordot(K, psi, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def _chain_delta(phi: float, g0c: np.ndarray, g1c: np.ndarray, even_K: bool) -> float:
    """In-lobe correction angle δ(φ) — the mod-π part of arg⟨φ|1_L⟩⟨φ|0_L⟩*."""
    if even_K:
        return 0.0
    n = np.arange(len(g0c))
    e = np.exp(-1j * phi * n)
    g0 = complex(g0c @ e)
    g1 = complex(g1c @ e)
    xi = float(np.angle(g1 * np.conj(g0)))
    return xi - math.pi * math.floor(xi / math.pi + 0.5)


def run_chain(cfg: ChainConfig, rng: np.random.Generator | None = None):
    """Monte Carlo entanglement fidelity of the chain.  Returns (F, stderr)."""
    if rng is None:
        rng = np.random.default_rng(0)
    code, noise, M = cfg.code, cfg.noise, cfg.M
    n_max = cfg.n_max if cfg.n_max is not None else code.n_max
    D = n_max + 1
    if 2 * D ** M > _MAX_DENSE:
        raise MemoryError(
            f"dense chain state 2·{D}^{M} exceeds the supported size")
    povm = build_povm(cfg.povm, n_max)
    kraus = povm.kraus_factors()
    tables = None
    if cfg.qsi in ("local-ml", "ml"):
        tables = get_tables(code, povm, noise.gamma, u=3)
        if cfg.qsi == "ml" and M != 3:
            raise ValueError("full ML QSI is implemented for the M=3 chain only")

    g0c = np.real(codeword(code, 0, n_max))
    g1c = np.real(codeword(code, 1, n_max))
    plus = np.real(xbasis_state(code, +1, n_max))
    proj = np.stack([g0c, g1c])  # codespace projector rows
    even_K = code.K % 2 == 0
    pops = plus ** 2

    nn = np.arange(D)
    crot = np.exp(1j * math.pi * np.outer(nn, nn) / code.N ** 2)
    graph = chain_graph(M)

    # ancilla-entangled first mode, |+_L⟩ elsewhere, CROTs along the line
    base = np.zeros((2, D), dtype=np.complex128)
    base[0], base[1] = g0c, g1c
    base /= math.sqrt(2.0)
    psi0 = base.reshape((2, D) + (1,) * (M - 1))
    for i in range(1, M):
        shape = [1] * (M + 1)
        shape[1 + i] = D
        psi0 = psi0 * plus.reshape(shape)
    for i in range(M - 1):
        shape = [1] * (M + 1)
        shape[1 + i], shape[2 + i] = D, D
        psi0 = psi0 * crot.reshape(shape)

    bell = np.zeros((2, 2))
    bell[0, 0] = bell[1, 1] = 1.0 / math.sqrt(2.0)

    fid = np.empty(cfg.shots)
    for shot in range(cfg.shots):
        times = sample_emission_times(pops, noise.gamma, noise.t_gate, rng, M - 1)
        times.append(np.empty(0))  # final mode carries no noise
        psi = psi0
        for a in range(M - 1):
            op = error_operator(a, times, graph, noise, n_max)
            psi = _apply_mode_diag(psi, op, 1 + a)
        nrm = math.sqrt(float(np.sum(np.abs(psi) ** 2)))
        if nrm == 0.0:
            raise RuntimeError("trajectory weight vanished; raise n_max")
        psi = psi / nrm

        phis = np.empty(M - 1)
        for i in range(M - 1):
            G = _mode_gram(psi, 1 + i)
            s = phase_series_rho(povm.H, G)
            phi = float(rejection_sample(s, density_envelope(s), rng, 1)[0])
            phis[i] = phi
            psi = _collapse(psi, 1 + i, kraus, phi)
            psi = psi / math.sqrt(float(np.sum(np.abs(psi) ** 2)))

        if cfg.qsi == "binning":
            mus = [int(bin_phase(p % (2 * math.pi), code.N)) for p in phis]
        elif cfg.qsi == "ml":
            i1, i2 = ml_qsi_2q(phis[0], phis[1], tables)
            mus = [int(i1[0]), int(i2[0])]
        else:
            mus = []
            noiseless = np.array([1.0])
            for i in range(M - 1):
                resolved = (mus[i - 1],) if i > 0 else ()
                n_unres = 1 if i + 1 < M - 1 else 0
                extra = (noiseless,) if i + 1 == M - 1 else ()
                fp, fm = local_ml_likelihood(
                    phis[i], tables, neighbor_outcomes=resolved,
                    n_unresolved=n_unres, extra_priors=extra)
                mus.append(int(harden(fp, fm)))

        # decoder frame: Π_i H·D(δ_i)·Z^{b_i}, inverted (adjoint) on the output
        W = np.eye(2, dtype=np.complex128)
        for i in range(M - 1):
            delta = _chain_delta(phis[i], g0c, g1c, even_K)
            z = -1.0 if mus[i] == -1 else 1.0
            V = _H2 @ np.diag([1.0, z * np.exp(1j * delta)])
            W = V @ W
        R = W.conj().T

        q = np.tensordot(psi, proj, axes=(M, 1))   # last mode → logical index
        q = np.tensordot(q, R, axes=(M, 1))
        amp = (np.take(q, 0, axis=0)[..., 0] + np.take(q, 1, axis=0)[..., 1])
        fid[shot] = float(np.sum(np.abs(amp) ** 2)) / 2.0

    f = float(np.mean(fid))
    se = float(np.std(fid, ddof=1) / math.sqrt(cfg.shots)) if cfg.shots > 1 else 0.0
    return f, se
