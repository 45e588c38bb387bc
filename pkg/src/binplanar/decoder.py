"""Syndrome decoding: MWPM over violated plaquettes with boundary partners.

Edge weights follow the hybrid rule: node pairs within Manhattan distance
log₂(L) get exact Dijkstra sums of per-qubit soft weights −log L(φ); farther
pairs use Manhattan × (−log[p_e/(1−p_e)]).  Unit weights (all ones) reduce
the whole construction to plain Manhattan MWPM.

Matching is exact: a bitmask DP (which doubles as the brute-force oracle)
for small syndromes, blossom via networkx beyond that.
"""

from __future__ import annotations

import heapq
import math

import networkx as nx
import numpy as np

from .lattice import BOT, TOP, Lattice, ShotOutcome
from .qsi import soft_weight

_SMALL_SYNDROME = 6


# ---------------------------------------------------------------------------
# weighted shortest paths on the decoding graph
# ---------------------------------------------------------------------------

def _adjacency(lattice: Lattice):
    """node -> list of (neighbor node, primal slot).  Virtual nodes included."""
    adj: dict = {TOP: [], BOT: []}
    for r in range(lattice.L - 1):
        for c in range(lattice.L):
            adj[r * lattice.L + c] = []
    for s, (u, v) in enumerate(lattice.edge_of_primal):
        adj[u].append((v, s))
        adj[v].append((u, s))
    return adj


def path_weight(u: int, v: int, lattice: Lattice, weights: np.ndarray,
                through_boundary: bool = False):
    """Cheapest path u→v over per-qubit weights; ties broken by lexicographic
    node sequence.  Interior searches keep off the virtual nodes unless the
    target is one (`through_boundary` admits them as via points)."""
    adj = _adjacency(lattice)
    dist = {u: 0.0}
    best_path = {u: (u,)}
    heap = [(0.0, (u,))]
    while heap:
        d, path = heapq.heappop(heap)
        node = path[-1]
        if d > dist.get(node, math.inf) or path != best_path.get(node):
            continue
        if node == v:
            qubits = [q for a, b, q in _path_edges(path, adj)]
            return d, tuple(path), tuple(qubits)
        if node in (TOP, BOT) and node != u:
            continue  # absorbing: no routing through a boundary
        for nbr, slot in adj[node]:
            if nbr in (TOP, BOT) and nbr != v and not through_boundary:
                continue
            nd = d + float(weights[slot])
            cand = path + (nbr,)
            old = dist.get(nbr, math.inf)
            if nd < old - 1e-12 or (abs(nd - old) <= 1e-12
                                    and cand < best_path.get(nbr, cand + (0,))):
                dist[nbr] = nd
                best_path[nbr] = cand
                heapq.heappush(heap, (nd, cand))
    raise RuntimeError(f"no path between {u} and {v}")


def _path_edges(path, adj):
    out = []
    for a, b in zip(path[:-1], path[1:]):
        slot = next(s for n, s in adj[a] if n == b)
        out.append((a, b, slot))
    return out


def manhattan(lattice: Lattice, u: int, v: int) -> int:
    """Grid distance between decoding nodes (virtuals at their nearest row)."""
    L = lattice.L
    if u in (TOP, BOT) and v in (TOP, BOT):
        return 0 if u == v else L
    if v in (TOP, BOT):
        u, v = v, u
    if u in (TOP, BOT):
        r = v // L
        return r + 1 if u == TOP else (L - 1) - r
    ru, cu = divmod(u, L)
    rv, cv = divmod(v, L)
    return abs(ru - rv) + abs(cu - cv)


def hybrid_weights(u: int, v: int, lattice: Lattice, soft_w: np.ndarray,
                   p_e: float, L: int | None = None) -> float:
    """Pair weight under the soft/hard hybrid rule."""
    if not 0.0 < p_e < 0.5:
        raise ValueError(f"hard weights need 0 < p_e < 1/2, got {p_e}")
    L = lattice.L if L is None else L
    d = manhattan(lattice, u, v)
    if d <= math.log2(L):
        return path_weight(u, v, lattice, soft_w)[0]
    return d * (-math.log(p_e / (1.0 - p_e)))


# ---------------------------------------------------------------------------
# minimum-weight perfect matching
# ---------------------------------------------------------------------------

def mwpm_bruteforce(pair_w: np.ndarray, bnd_w: np.ndarray):
    """Exact minimum pairing by bitmask DP: each real node pairs with another
    real or its own boundary partner; boundary-boundary edges are free."""
    k = len(bnd_w)
    full = (1 << k) - 1
    memo = {0: (0.0, ())}

    def solve(mask):
        if mask in memo:
            return memo[mask]
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        w, m = solve(rest)
        best = (w + float(bnd_w[i]), m + ((i, -1),))
        for j in range(i + 1, k):
            if rest & (1 << j):
                w2, m2 = solve(rest & ~(1 << j))
                cand = (w2 + float(pair_w[i, j]), m2 + ((i, j),))
                if cand[0] < best[0] - 1e-12:
                    best = cand
        memo[mask] = best
        return best

    return solve(full)


def mwpm(pair_w: np.ndarray, bnd_w: np.ndarray):
    """Minimum-weight perfect matching of k real nodes with boundary partners.

    Returns (total weight, tuple of (i, j) real pairs and (i, -1) boundary
    assignments).  Exact; small instances use the DP, larger ones blossom.
    """
    k = len(bnd_w)
    if k == 0:
        return 0.0, ()
    if k <= _SMALL_SYNDROME:
        return mwpm_bruteforce(pair_w, bnd_w)
    G = nx.Graph()
    scale = max(float(np.max(pair_w)) if k > 1 else 0.0, float(np.max(bnd_w))) + 1.0
    for i in range(k):
        G.add_edge(("r", i), ("v", i), weight=scale - float(bnd_w[i]))
        for j in range(i + 1, k):
            G.add_edge(("r", i), ("r", j), weight=scale - float(pair_w[i, j]))
            G.add_edge(("v", i), ("v", j), weight=scale)
    mate = nx.max_weight_matching(G, maxcardinality=True)
    pairs = []
    total = 0.0
    for a, b in mate:
        if a[0] == "v" and b[0] == "v":
            continue
        if a[0] == "v":
            a, b = b, a
        if b[0] == "r":
            i, j = sorted((a[1], b[1]))
            pairs.append((i, j))
            total += float(pair_w[i, j])
        else:
            pairs.append((a[1], -1))
            total += float(bnd_w[a[1]])
    return total, tuple(sorted(pairs))


# ---------------------------------------------------------------------------
# end-to-end decoding
# ---------------------------------------------------------------------------

def decode(out: ShotOutcome, lattice: Lattice, mode: str = "unit",
           p_e: float | None = None) -> bool:
    """Decode one shot; returns the logical_error flag.

    mode: 'unit' (all weights 1), 'hard' (uniform −log[p_e/(1−p_e)]), or
    'soft' (hybrid per-qubit −log L(φ) weights from the shot's QSI records).
    """
    nodes = np.flatnonzero(out.syndrome).tolist()
    k = len(nodes)
    corr_parity = 1
    if k:
        if mode == "unit":
            qw = np.ones(lattice.n_primal)
            hard_factor = 1.0
        elif mode == "hard":
            if p_e is None:
                raise ValueError("hard decoding needs a calibrated p_e")
            if not 0.0 < p_e < 0.5:
                raise ValueError(f"hard weights need 0 < p_e < 1/2, got {p_e}")
            hard_factor = -math.log(p_e / (1.0 - p_e))
            qw = np.full(lattice.n_primal, hard_factor)
        elif mode == "soft":
            if out.soft is None:
                raise ValueError("soft decoding needs local-ml soft records")
            if p_e is None:
                raise ValueError("soft decoding needs a calibrated p_e")
            if not 0.0 < p_e < 0.5:
                raise ValueError(f"hard weights need 0 < p_e < 1/2, got {p_e}")
            hard_factor = -math.log(p_e / (1.0 - p_e))
            mu = out.mu_hat[lattice.primal_ids]
            qw = np.asarray(soft_weight(out.soft[:, 0], out.soft[:, 1], mu))
        else:
            raise ValueError(f"unknown decoder mode {mode!r}")
        cut = math.log2(lattice.L)
        plq = [lattice.plaq_rc[n][0] * lattice.L + lattice.plaq_rc[n][1]
               for n in nodes]
        pair_w = np.zeros((k, k))
        for i in range(k):
            for j in range(i + 1, k):
                d = manhattan(lattice, plq[i], plq[j])
                if d <= cut:
                    w = path_weight(plq[i], plq[j], lattice, qw)[0]
                else:
                    w = d * hard_factor
                pair_w[i, j] = pair_w[j, i] = w
        bnd_w = np.zeros(k)
        bnd_side = []
        for i in range(k):
            sides = {}
            for b in (TOP, BOT):
                d = manhattan(lattice, plq[i], b)
                if d <= cut:
                    sides[b] = path_weight(plq[i], b, lattice, qw)[0]
                else:
                    sides[b] = d * hard_factor
            pick = TOP if sides[TOP] <= sides[BOT] else BOT
            bnd_w[i] = sides[pick]
            bnd_side.append(pick)
        _, pairs = mwpm(pair_w, bnd_w)
        for i, j in pairs:
            if j == -1 and bnd_side[i] == TOP:
                corr_parity = -corr_parity
    post = out.pre_parity * corr_parity
    return post == -1
