"""Planar-code cluster geometry and the twirled per-shot measurement pipeline.

One 2D timeslice of plaquette stabilizers: primal qubits sit on the edges of
an L×L patch (rough boundaries left/right, smooth top/bottom), dual qubits
mediate the CROT entanglement, and the decoding graph is the (L−1)×L grid of
plaquettes plus TOP/BOT virtual nodes.

The shot pipeline never forms a lattice-wide state: the X-basis twirl makes
every qubit's outcome density that of the maximally mixed logical state under
its own error operator, and the ideal reference outcome μ̄ is a Bernoulli draw
from p(±|φ, 𝐭).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codes import Code, xbasis_state
from .fock import ModeOperator
from .loss import GateGraph, NoiseParams, sample_emission_times, tau
from .povm import PhasePOVM, eval_density, phase_series, rejection_sample
from .qsi import QsiTables, bin_phase, get_tables, harden

TOP, BOT = -1, -2  # virtual decoding nodes


@dataclass(frozen=True)
class Lattice:
    L: int
    pos: np.ndarray                 # (n_qubits, 2) geometric (x, y), raster-sorted
    is_primal: np.ndarray           # bool per raster qubit
    labels: tuple                   # ("H", r, c) / ("V", r, c) / ("D", k)
    primal_ids: np.ndarray          # raster ids of primal qubits (slot order)
    plaquettes: tuple               # tuple of tuples of primal slots
    plaq_rc: tuple                  # (r, c) grid coordinate per plaquette
    incidence: np.ndarray           # (n_plaq, n_primal) uint8
    neighbors: tuple                # CROT partners per raster qubit
    top_row: np.ndarray             # primal slots of the chosen smooth boundary
    edge_of_primal: tuple           # decoding edge (u, v) per primal slot
    primal_is_h: np.ndarray         # bool per primal slot
    primal_rc: tuple                # (r, c) per primal slot

    @property
    def n_qubits(self) -> int:
        return len(self.pos)

    @property
    def n_primal(self) -> int:
        return len(self.primal_ids)

    @property
    def n_plaq(self) -> int:
        return len(self.plaquettes)

    def gate_graph(self) -> GateGraph:
        edges = []
        for a, nb in enumerate(self.neighbors):
            edges.extend((a, b) for b in nb if a < b)
        return GateGraph(self.n_qubits, tuple(edges))


def build_lattice(L: int) -> Lattice:
    """Distance-L planar timeslice; L odd and ≥ 3."""
    if L < 3 or L % 2 == 0:
        raise ValueError(f"lattice distance must be odd and >= 3, got {L}")
    raw = []  # (label, x, y)
    hs, vs = {}, {}
    for r in range(L):
        for c in range(L):
            raw.append((("H", r, c), 2 * c + 1, 2 * r))
    for r in range(L - 1):
        for c in range(L - 1):
            raw.append((("V", r, c), 2 * c + 2, 2 * r + 1))
    # one dual qubit per vertex-sharing (H, V) pair
    n_dual = 0
    dual_links = []
    for r in range(L - 1):
        for c in range(L - 1):
            vx, vy = 2 * c + 2, 2 * r + 1
            for (hr, hc) in ((r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)):
                hx, hy = 2 * hc + 1, 2 * hr
                raw.append((("D", n_dual), (vx + hx) / 2, (vy + hy) / 2))
                dual_links.append((("H", hr, hc), ("V", r, c)))
                n_dual += 1
    order = sorted(range(len(raw)), key=lambda i: (raw[i][2], raw[i][1]))
    where = {raw[i][0]: slot for slot, i in enumerate(order)}
    labels = tuple(raw[i][0] for i in order)
    pos = np.array([(raw[i][1], raw[i][2]) for i in order], dtype=np.float64)
    is_primal = np.array([lab[0] != "D" for lab in labels])

    neighbors = [[] for _ in range(len(labels))]
    for k, (hlab, vlab) in enumerate(dual_links):
        d = where[("D", k)]
        for lab in (hlab, vlab):
            neighbors[d].append(where[lab])
            neighbors[where[lab]].append(d)
    neighbors = tuple(tuple(sorted(nb)) for nb in neighbors)

    primal_ids = np.array([i for i, p in enumerate(is_primal) if p])
    slot_of = {rid: s for s, rid in enumerate(primal_ids)}
    for r in range(L):
        for c in range(L):
            hs[(r, c)] = slot_of[where[("H", r, c)]]
    for r in range(L - 1):
        for c in range(L - 1):
            vs[(r, c)] = slot_of[where[("V", r, c)]]

    plaquettes, plaq_rc = [], []
    for r in range(L - 1):
        for c in range(L):
            members = [hs[(r, c)], hs[(r + 1, c)]]
            if c > 0:
                members.append(vs[(r, c - 1)])
            if c < L - 1:
                members.append(vs[(r, c)])
            plaquettes.append(tuple(sorted(members)))
            plaq_rc.append((r, c))
    incidence = np.zeros((len(plaquettes), len(primal_ids)), dtype=np.uint8)
    for p, members in enumerate(plaquettes):
        incidence[p, list(members)] = 1

    node = lambda r, c: r * L + c
    edge_of_primal = [None] * len(primal_ids)
    primal_is_h = np.zeros(len(primal_ids), dtype=bool)
    primal_rc = [None] * len(primal_ids)
    for (r, c), s in hs.items():
        primal_is_h[s] = True
        primal_rc[s] = (r, c)
        lo = TOP if r == 0 else node(r - 1, c)
        hi = BOT if r == L - 1 else node(r, c)
        edge_of_primal[s] = (lo, hi)
    for (r, c), s in vs.items():
        primal_rc[s] = (r, c)
        edge_of_primal[s] = (node(r, c), node(r, c + 1))

    top_row = np.array(sorted(hs[(0, c)] for c in range(L)))
    return Lattice(L=L, pos=pos, is_primal=is_primal, labels=labels,
                   primal_ids=primal_ids, plaquettes=tuple(plaquettes),
                   plaq_rc=tuple(plaq_rc), incidence=incidence,
                   neighbors=neighbors, top_row=top_row,
                   edge_of_primal=tuple(edge_of_primal),
                   primal_is_h=primal_is_h, primal_rc=tuple(primal_rc))


# ---------------------------------------------------------------------------
# syndrome and parity
# ---------------------------------------------------------------------------

def extract_syndrome(bitflips: np.ndarray, lattice: Lattice) -> np.ndarray:
    """Violated plaquettes (bool per plaquette): odd flip count on the boundary."""
    flips = np.asarray(bitflips, dtype=np.uint8)
    syn = (lattice.incidence @ flips) % 2
    return syn.astype(bool)


def logical_parity(bitflips: np.ndarray, lattice: Lattice) -> int:
    """±1 parity of flips along the chosen smooth-boundary row."""
    return -1 if int(np.sum(np.asarray(bitflips)[lattice.top_row])) % 2 else 1


# ---------------------------------------------------------------------------
# ideal-outcome (twirl) sampling
# ---------------------------------------------------------------------------

def sample_ideal_outcome(phi: float, err_op: ModeOperator, code: Code,
                         povm: PhasePOVM, rng: np.random.Generator) -> int:
    """μ̄ drawn from p(±|φ,𝐭) = ⟨±|Ê†F(φ)Ê|±⟩ / Σ_± ⟨±|Ê†F(φ)Ê|±⟩."""
    n_max = povm.n_max
    weights = []
    for sign in (+1, -1):
        v = err_op.apply(xbasis_state(code, sign, n_max))
        weights.append(max(float(eval_density(phase_series(povm.H, v), phi)[0]), 0.0))
    tot = weights[0] + weights[1]
    if tot <= 0.0:
        raise RuntimeError("degenerate outcome density: both hypotheses vanish")
    return 1 if rng.random() < weights[0] / tot else -1


# ---------------------------------------------------------------------------
# per-shot pipeline
# ---------------------------------------------------------------------------

@dataclass
class ShotOutcome:
    phi: np.ndarray            # per raster qubit
    mu_hat: np.ndarray         # per raster qubit, ±1
    mu_bar: np.ndarray         # per primal slot, ±1
    flips: np.ndarray          # per primal slot, bool
    syndrome: np.ndarray       # per plaquette, bool
    pre_parity: int            # logical parity before correction
    soft: np.ndarray | None    # (n_primal, 2) f± for soft weights, or None
    emissions: list = field(default_factory=list, repr=False)
    thetas: np.ndarray | None = None


class ShotContext:
    """Per-(lattice, code, noise, povm, qsi) caches shared across shots."""

    def __init__(self, lattice: Lattice, code: Code, noise: NoiseParams,
                 povm: PhasePOVM, qsi_kind: str, u: int = 3):
        if qsi_kind not in ("binning", "local-ml"):
            raise ValueError(f"lattice qsi must be binning or local-ml, got {qsi_kind!r}")
        if noise.N != code.N:
            raise ValueError("noise rotation order must match the code")
        self.lattice, self.code, self.noise = lattice, code, noise
        self.povm, self.qsi_kind = povm, qsi_kind
        self.tables: QsiTables = get_tables(code, povm, noise.gamma, u)
        self.pops = np.real(xbasis_state(code, +1, povm.n_max)) ** 2
        self.degrees = np.array([len(nb) for nb in lattice.neighbors])
        for d in sorted(set(self.degrees.tolist())):
            self.tables.P_for_degree(d)


def run_shot(lattice: Lattice, code: Code, noise: NoiseParams,
             povm: PhasePOVM, qsi_kind: str, rng: np.random.Generator,
             ctx: ShotContext | None = None,
             forced_flips: np.ndarray | None = None) -> ShotOutcome:
    """One twirled Monte Carlo shot.  `forced_flips` replaces the whole
    sampling stage with a prescribed primal flip pattern (test hook)."""
    if forced_flips is not None:
        flips = np.asarray(forced_flips, dtype=bool)
        if flips.shape != (lattice.n_primal,):
            raise ValueError("forced flip pattern has the wrong length")
        n = lattice.n_qubits
        mu_hat = np.ones(n, dtype=np.int64)
        mu_bar = np.where(flips, -1, 1)
        syn = extract_syndrome(flips, lattice)
        return ShotOutcome(phi=np.zeros(n), mu_hat=mu_hat, mu_bar=mu_bar,
                           flips=flips, syndrome=syn,
                           pre_parity=logical_parity(flips, lattice), soft=None)

    if ctx is None:
        ctx = ShotContext(lattice, code, noise, povm, qsi_kind)
    tab = ctx.tables
    n = lattice.n_qubits
    shift = 2 * math.pi
    # (1) emissions per qubit, independently
    times = sample_emission_times(ctx.pops, noise.gamma, noise.t_gate, rng, n)
    js = np.array([len(t) for t in times])
    taus = np.array([tau(t, noise.t_gate) for t in times])
    thetas = np.array([-noise.omega * sum(taus[b] for b in lattice.neighbors[a])
                       for a in range(n)])
    # (2) sample φ from the mixed-state density, grouped by own loss count
    phi = np.empty(n)
    for j in sorted(set(js.tolist())):
        sel = np.flatnonzero(js == j)
        s, env = tab.mix_density(j)
        x = rejection_sample(s, env, rng, len(sel))
        phi[sel] = np.mod(x + thetas[sel], shift)
    # (3) raster QSI
    if qsi_kind == "binning":
        mu_hat = bin_phase(phi, code.N)
        soft = None
    else:
        fp = np.empty(n)
        fm = np.empty(n)
        for d in sorted(set(ctx.degrees.tolist())):
            sel = np.flatnonzero(ctx.degrees == d)
            a, b = tab.local_likelihoods(phi[sel], tab.P_for_degree(d))
            fp[sel], fm[sel] = a, b
        mu_hat = harden(fp, fm)
        soft = np.stack([fp[lattice.primal_ids], fm[lattice.primal_ids]], axis=1)
    # (4) ideal outcomes and flips on primal qubits
    pids = lattice.primal_ids
    mu_bar = np.empty(lattice.n_primal, dtype=np.int64)
    ang = phi[pids] - thetas[pids]
    for j in sorted(set(js[pids].tolist())):
        sel = np.flatnonzero(js[pids] == j)
        sp, sm = tab.sign_series(j)
        wp = np.clip(eval_density(sp, ang[sel]), 0.0, None)
        wm = np.clip(eval_density(sm, ang[sel]), 0.0, None)
        tot = wp + wm
        if np.any(tot <= 0.0):
            raise RuntimeError("degenerate outcome density: both hypotheses vanish")
        mu_bar[sel] = np.where(rng.random(len(sel)) < wp / tot, 1, -1)
    flips = mu_hat[pids] != mu_bar
    # (5)–(6) parity and syndrome, with the product-rule self-check
    syn = extract_syndrome(flips, lattice)
    check = np.array([bool(np.bitwise_xor.reduce(flips[list(p)]))
                      for p in lattice.plaquettes])
    if not np.array_equal(syn, check):
        raise AssertionError("syndrome self-consistency check failed")
    return ShotOutcome(phi=phi, mu_hat=np.asarray(mu_hat), mu_bar=mu_bar,
                       flips=flips, syndrome=syn,
                       pre_parity=logical_parity(flips, lattice), soft=soft,
                       emissions=times, thetas=thetas)


def format_shot(out: ShotOutcome, lattice: Lattice) -> str:
    """Small-L debug dump: one line per qubit plus the syndrome set."""
    lines = [f"lattice L={lattice.L}  qubits={lattice.n_qubits} "
             f"primal={lattice.n_primal}"]
    slot_of = {rid: s for s, rid in enumerate(lattice.primal_ids)}
    for i, lab in enumerate(lattice.labels):
        tag = "".join(str(x) for x in lab)
        row = f"{i:3d} {tag:8s} phi={out.phi[i]:+.4f} mu_hat={out.mu_hat[i]:+d}"
        if i in slot_of:
            s = slot_of[i]
            row += f" mu_bar={out.mu_bar[s]:+d} flip={int(out.flips[s])}"
        lines.append(row)
    viol = np.flatnonzero(out.syndrome)
    lines.append(f"syndrome: {viol.tolist()}  pre_parity={out.pre_parity:+d}")
    return "\n".join(lines)
