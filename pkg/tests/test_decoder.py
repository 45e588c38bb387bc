"""Decoder internals: metric, shortest paths, matching, and end-to-end parity."""

import math

import numpy as np
import pytest

from binplanar.codes import Code
from binplanar.decoder import (decode, hybrid_weights, manhattan, mwpm,
                               mwpm_bruteforce, path_weight)
from binplanar.lattice import BOT, TOP, build_lattice, run_shot
from binplanar.loss import NoiseParams
from binplanar.povm import build_povm

from conftest import rng_for


def _forced(lat, flips):
    code = Code(2, 2)
    povm = build_povm("canonical", code.n_max)
    return run_shot(lat, code, NoiseParams(0.0, 2), povm, "binning",
                    rng_for("dec-forced"), forced_flips=flips)


# ---------------------------------------------------------------------------
# metric and paths
# ---------------------------------------------------------------------------

def test_manhattan_values():
    lat = build_lattice(5)
    node = lambda r, c: r * 5 + c
    assert manhattan(lat, node(1, 1), node(3, 4)) == 5
    assert manhattan(lat, TOP, node(1, 2)) == 2
    assert manhattan(lat, node(3, 0), BOT) == 1
    assert manhattan(lat, TOP, BOT) == 5
    assert manhattan(lat, TOP, TOP) == 0


def test_unit_path_weight_is_manhattan():
    lat = build_lattice(5)
    ones = np.ones(lat.n_primal)
    rng = rng_for("dec-paths")
    nodes = [r * 5 + c for r in range(4) for c in range(5)]
    for _ in range(30):
        u, v = rng.choice(nodes, size=2, replace=False)
        w, path, qubits = path_weight(int(u), int(v), lat, ones)
        assert w == manhattan(lat, int(u), int(v))
        assert len(qubits) == w and path[0] == u and path[-1] == v
    for b in (TOP, BOT):
        u = int(rng.choice(nodes))
        assert path_weight(u, b, lat, ones)[0] == manhattan(lat, u, b)


def test_path_routes_around_heavy_qubit():
    lat = build_lattice(5)
    qw = np.ones(lat.n_primal)
    u, v = 1 * 5 + 1, 1 * 5 + 2
    direct = path_weight(u, v, lat, qw)[2]
    assert len(direct) == 1
    qw[direct[0]] = 100.0
    w, _, qubits = path_weight(u, v, lat, qw)
    assert w == 3.0 and direct[0] not in qubits


def test_paths_never_route_through_boundary():
    # top-row detour TOP-in-TOP-out would cost 2; the legal path costs 4
    lat = build_lattice(5)
    ones = np.ones(lat.n_primal)
    w, path, _ = path_weight(0 * 5 + 0, 0 * 5 + 4, lat, ones)
    assert w == 4.0
    assert TOP not in path and BOT not in path


def test_hybrid_weight_rule():
    lat = build_lattice(5)
    soft_w = np.full(lat.n_primal, 0.7)
    p_e = 0.1
    near = hybrid_weights(1 * 5 + 1, 1 * 5 + 2, lat, soft_w, p_e)
    assert near == pytest.approx(0.7)  # d=1 ≤ log2(5): exact path
    far = hybrid_weights(0 * 5 + 0, 3 * 5 + 4, lat, soft_w, p_e)
    assert far == pytest.approx(7 * (-math.log(p_e / (1 - p_e))))
    with pytest.raises(ValueError):
        hybrid_weights(0, 1, lat, soft_w, 0.6)


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------

def test_mwpm_empty_and_tiny():
    assert mwpm(np.zeros((0, 0)), np.zeros(0)) == (0.0, ())
    pair = np.array([[0.0, 5.0], [5.0, 0.0]])
    w, m = mwpm(pair, np.array([1.0, 1.0]))
    assert w == 2.0 and sorted(m) == [(0, -1), (1, -1)]
    w, m = mwpm(pair, np.array([4.0, 4.0]))
    assert w == 5.0 and sorted(m) == [(0, 1)]


def test_blossom_agrees_with_bruteforce():
    rng = rng_for("dec-blossom")
    for k in (7, 8, 9):
        for _ in range(25):
            a = rng.random((k, k)) * 4 + 0.1
            pair = (a + a.T) / 2
            np.fill_diagonal(pair, 0.0)
            bnd = rng.random(k) * 4 + 0.1
            w_dp, _ = mwpm_bruteforce(pair, bnd)
            w_bl, m_bl = mwpm(pair, bnd)
            assert w_bl == pytest.approx(w_dp, abs=1e-9)
            touched = sorted(i for p in m_bl for i in p if i != -1)
            assert touched == list(range(k))


# ---------------------------------------------------------------------------
# end-to-end decode
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("L", [3, 5])
def test_single_flips_never_cause_logical_error(L):
    lat = build_lattice(L)
    for s in range(lat.n_primal):
        flips = np.zeros(lat.n_primal, dtype=bool)
        flips[s] = True
        assert decode(_forced(lat, flips), lat, "unit") is False


def test_full_column_is_an_undetected_logical():
    lat = build_lattice(5)
    flips = np.zeros(lat.n_primal, dtype=bool)
    col = [s for s in range(lat.n_primal)
           if lat.primal_is_h[s] and lat.primal_rc[s][1] == 2]
    flips[col] = True
    out = _forced(lat, flips)
    assert not out.syndrome.any() and out.pre_parity == -1
    assert decode(out, lat, "unit") is True


def test_partial_column_decoded_by_nearest_boundary():
    lat = build_lattice(5)
    h_at = {lat.primal_rc[s]: s for s in range(lat.n_primal)
            if lat.primal_is_h[s]}
    short = np.zeros(lat.n_primal, dtype=bool)
    short[h_at[(0, 1)]] = True           # one step from TOP: corrected
    assert decode(_forced(lat, short), lat, "unit") is False
    long = np.zeros(lat.n_primal, dtype=bool)
    long[[h_at[(r, 1)] for r in range(4)]] = True  # ends nearer BOT: mismatched
    assert decode(_forced(lat, long), lat, "unit") is True


def test_hard_mode_matches_unit_on_uniform_weights():
    # a uniform −log[p/(1−p)] rescale cannot change any matching decision
    lat = build_lattice(5)
    rng = rng_for("dec-hard")
    for _ in range(60):
        flips = rng.random(lat.n_primal) < 0.12
        out = _forced(lat, flips)
        assert decode(out, lat, "unit") == decode(out, lat, "hard", p_e=0.2)


def test_decode_mode_validation():
    lat = build_lattice(3)
    flips = np.zeros(lat.n_primal, dtype=bool)
    flips[0] = True
    out = _forced(lat, flips)
    with pytest.raises(ValueError):
        decode(out, lat, "fancy")
    with pytest.raises(ValueError):
        decode(out, lat, "hard")
    with pytest.raises(ValueError):
        decode(out, lat, "hard", p_e=0.7)
    with pytest.raises(ValueError):
        decode(out, lat, "soft", p_e=0.1)  # forced shots carry no soft record


def test_soft_decode_runs_on_live_shot():
    lat = build_lattice(3)
    code = Code(3, 4)
    povm = build_povm("ahd", code.n_max)
    out = run_shot(lat, code, NoiseParams(0.05, 3), povm, "local-ml",
                   rng_for("dec-soft"))
    assert decode(out, lat, "soft", p_e=0.09) in (False, True)
