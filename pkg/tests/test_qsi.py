"""Qubit state inference: binning, likelihood tables, local and joint ML."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from binplanar.codes import Code, xbasis_state
from binplanar.fock import annihilate
from binplanar.povm import build_povm, eval_density
from binplanar.qsi import (QsiTables, adaptive_u, bin_phase,
                           completeness_defect, get_tables, harden,
                           local_ml_likelihood, ml_qsi_2q, soft_weight)

from conftest import dense_density, midpoint_grid, outer_rho, rng_for


def periodic_integral(values):
    """Rectangle rule on a midpoint grid — exact for smooth 2π-periodic f."""
    return float(np.mean(values) * 2 * math.pi)


# ---------------------------------------------------------------------------
# binning
# ---------------------------------------------------------------------------

def test_bin_phase_sectors_n2():
    assert bin_phase(0.0, 2) == 1
    assert bin_phase(math.pi / 2, 2) == -1      # odd lobe centre
    assert bin_phase(math.pi, 2) == 1
    assert bin_phase(3 * math.pi / 2, 2) == -1
    assert bin_phase(0.1, 2) == 1
    assert bin_phase(math.pi / 2 + 0.1, 2) == -1


def test_bin_phase_boundary_goes_plus():
    # φ = π/(2N) sits exactly between lobes
    for N in (1, 2, 3, 4):
        assert bin_phase(math.pi / (2 * N), N) == 1


def test_bin_phase_array_matches_scalar():
    phis = midpoint_grid(64)
    arr = bin_phase(phis, 3)
    assert arr.shape == (64,)
    assert all(arr[i] == bin_phase(float(phis[i]), 3) for i in range(64))


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.0, max_value=2 * math.pi, exclude_max=True),
       st.integers(min_value=1, max_value=4))
def test_bin_phase_alternates_by_one_lobe(phi, N):
    # shifting by a lobe width π/N flips the sign (away from boundaries)
    x = phi * N / math.pi + 0.5
    if abs(x - round(x)) < 1e-9:
        return  # boundary: tie-break masks the alternation
    assert bin_phase((phi + math.pi / N) % (2 * math.pi), N) == -bin_phase(phi, N)


# ---------------------------------------------------------------------------
# truncation bookkeeping
# ---------------------------------------------------------------------------

def test_completeness_defect_binomial_tail():
    code = Code(2, 2)  # top support level n = 4
    gamma = 0.3
    p = 1 - math.exp(-gamma)
    want = sum(math.comb(4, k) * p ** k * (1 - p) ** (4 - k) for k in (3, 4))
    assert completeness_defect(code, gamma, u=2) == pytest.approx(want)


def test_adaptive_u_limits():
    assert adaptive_u(Code(2, 2), 0.0) == 0
    u = adaptive_u(Code(2, 2), 0.2, tol=1e-8)
    assert completeness_defect(Code(2, 2), 0.2, u) <= 1e-8
    assert completeness_defect(Code(2, 2), 0.2, u - 1) > 1e-8


def test_harden_and_soft_weight():
    mu = harden([2.0, 1.0, 1.0], [1.0, 2.0, 1.0])
    np.testing.assert_array_equal(mu, [1, -1, 1])  # tie goes to +1
    w = soft_weight([2.0, 1.0, 1.0], [1.0, 2.0, 1.0], mu)
    assert w[0] == pytest.approx(math.log(2))
    assert w[1] == pytest.approx(math.log(2))
    assert w[2] == 0.0
    assert np.all(w >= 0)


def test_soft_weight_degenerate_caps():
    mu = harden([1.0, 0.0], [0.0, 0.0])
    w = soft_weight([1.0, 0.0], [0.0, 0.0], mu, cap=50.0)
    assert w[0] == 50.0  # other vanished
    assert w[1] == 50.0  # chosen vanished


# ---------------------------------------------------------------------------
# likelihood tables
# ---------------------------------------------------------------------------

def test_q_series_integrates_to_kraus_trace():
    code = Code(2, 4)
    povm = build_povm("heterodyne", code.n_max)
    tab = QsiTables(code, povm, gamma=0.15, u=3)
    phis = midpoint_grid(1024)
    for s in (+1, -1):
        got = periodic_integral(eval_density(tab.Q_series[s], phis))
        assert got == pytest.approx(tab.prior_raw.sum(), abs=1e-10)


def test_tables_match_dense_density_no_loss():
    code = Code(3, 2)
    povm = build_povm("ahd", code.n_max)
    tab = QsiTables(code, povm, gamma=0.0, u=2)
    phis = midpoint_grid(97)
    plus = np.real(xbasis_state(code, +1, povm.n_max))
    rho = outer_rho(plus)
    want = np.array([dense_density(povm.H, rho, p) for p in phis])
    got = eval_density(tab.Q_series[+1], phis)
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_mix_density_is_normalized_conditional():
    code = Code(2, 4)
    povm = build_povm("canonical", code.n_max)
    tab = QsiTables(code, povm, gamma=0.25, u=3)
    phis = midpoint_grid(96)
    decay = np.exp(-0.5 * 0.25 * np.arange(povm.n_max + 1))
    for j in (0, 1, 2):
        series, env = tab.mix_density(j)
        vals = eval_density(series, phis)
        assert periodic_integral(vals) == pytest.approx(1.0, abs=1e-9)
        assert np.all(vals <= env + 1e-12)
        rho = sum(outer_rho(annihilate(np.real(xbasis_state(code, s, povm.n_max)),
                                       j) * decay) for s in (+1, -1))
        want = np.array([dense_density(povm.H, rho, p) for p in phis])
        np.testing.assert_allclose(vals, want / periodic_integral(want),
                                   atol=1e-9)


def test_received_kick_shifts_density_forward():
    # Ĉ_J = e^{−iπJn̂/N²} on the state moves the density to smaller φ, so the
    # likelihood reads the shifted outcome at φ + πJ/N².  Dense-POVM check.
    code = Code(3, 2)
    povm = build_povm("heterodyne", code.n_max)
    tab = QsiTables(code, povm, gamma=0.0, u=0)
    J = 2
    theta = -math.pi * J / code.N ** 2
    plus = np.real(xbasis_state(code, +1, povm.n_max)).astype(complex)
    kicked = np.exp(1j * theta * np.arange(povm.n_max + 1)) * plus
    phis = midpoint_grid(101)
    rho = outer_rho(kicked)
    dens = np.array([dense_density(povm.H, rho, p) for p in phis])
    fp, _ = tab.local_likelihoods(phis, np.eye(J + 1)[J])
    np.testing.assert_allclose(fp, dens, atol=1e-10)


def test_P_for_degree_convolves_prior():
    code = Code(2, 2)
    povm = build_povm("canonical", code.n_max)
    tab = QsiTables(code, povm, gamma=0.2, u=2)
    assert np.array_equal(tab.P_for_degree(0), [1.0])
    p1 = tab.prior_raw
    p2 = tab.P_for_degree(2)
    assert len(p2) == 2 * len(p1) - 1
    direct = np.zeros(len(p2))
    for a, wa in enumerate(p1):
        for b, wb in enumerate(p1):
            direct[a + b] += wa * wb
    np.testing.assert_allclose(p2, direct, atol=1e-15)
    assert tab.P_for_degree(3).sum() == pytest.approx(p1.sum() ** 3)


def test_get_tables_caches():
    code = Code(2, 2)
    povm = build_povm("canonical", code.n_max)
    assert get_tables(code, povm, 0.1) is get_tables(code, povm, 0.1)
    assert get_tables(code, povm, 0.1) is not get_tables(code, povm, 0.2)


# ---------------------------------------------------------------------------
# local ML
# ---------------------------------------------------------------------------

def test_local_ml_validates_neighbours():
    code = Code(2, 2)
    povm = build_povm("canonical", code.n_max)
    tab = get_tables(code, povm, 0.1)
    with pytest.raises(ValueError, match="raster order"):
        local_ml_likelihood(0.3, tab, neighbor_outcomes=(1, 0))
    with pytest.raises(ValueError):
        local_ml_likelihood(0.3, tab, n_unresolved=-1)


def test_local_ml_degree_zero_is_bare_density():
    code = Code(2, 4)
    povm = build_povm("ahd", code.n_max)
    tab = get_tables(code, povm, 0.12)
    phis = midpoint_grid(99)
    fp, fm = local_ml_likelihood(phis, tab)
    np.testing.assert_allclose(fp, eval_density(tab.Q_series[+1], phis),
                               atol=1e-12)
    np.testing.assert_allclose(fm, eval_density(tab.Q_series[-1], phis),
                               atol=1e-12)


def test_local_ml_trivial_extra_prior_is_noop():
    code = Code(2, 2)
    povm = build_povm("canonical", code.n_max)
    tab = get_tables(code, povm, 0.15)
    fp0, fm0 = local_ml_likelihood(0.7, tab, neighbor_outcomes=(1, -1))
    fp1, fm1 = local_ml_likelihood(0.7, tab, neighbor_outcomes=(1, -1),
                                   extra_priors=([1.0],))
    assert (fp0, fm0) == (fp1, fm1)


def test_local_ml_beats_binning_on_average():
    # deterministic comparison: integrate each rule's error over the exact
    # kick-marginalized outcome density of a degree-2 qubit
    code = Code(3, 4)
    povm = build_povm("ahd", code.n_max)
    tab = get_tables(code, povm, 0.08)
    phis = midpoint_grid(2048)
    P = tab.P_for_degree(2)
    P = P / P.sum()
    fp, fm = tab.local_likelihoods(phis, P)
    Z = periodic_integral(fp)  # same for both signs by symmetry
    mu_ml = harden(fp, fm)
    mu_bin = bin_phase(phis, code.N)
    err_ml = (periodic_integral(np.where(mu_ml != 1, fp, 0.0)) +
              periodic_integral(np.where(mu_ml != -1, fm, 0.0))) / (2 * Z)
    err_bin = (periodic_integral(np.where(mu_bin != 1, fp, 0.0)) +
               periodic_integral(np.where(mu_bin != -1, fm, 0.0))) / (2 * Z)
    assert err_ml <= err_bin + 1e-12
    assert 0.0 < err_ml < 0.5


# ---------------------------------------------------------------------------
# joint two-qubit ML
# ---------------------------------------------------------------------------

def test_ml_2q_separates_without_loss():
    code = Code(2, 6)
    povm = build_povm("heterodyne", code.n_max)
    tab = get_tables(code, povm, 0.0, u=0)
    rng = rng_for("qsi-2q")
    phi1 = rng.uniform(0, 2 * math.pi, 40)
    phi2 = rng.uniform(0, 2 * math.pi, 40)
    i1, i2 = ml_qsi_2q(phi1, phi2, tab)
    f1p = eval_density(tab.Q_series[+1], phi1)
    f1m = eval_density(tab.Q_series[-1], phi1)
    f2p = eval_density(tab.Q_series[+1], phi2)
    f2m = eval_density(tab.Q_series[-1], phi2)
    np.testing.assert_array_equal(i1, harden(f1p, f1m))
    np.testing.assert_array_equal(i2, harden(f2p, f2m))


def test_ml_2q_swap_symmetry():
    code = Code(2, 4)
    povm = build_povm("heterodyne", code.n_max)
    tab = get_tables(code, povm, 0.1)
    rng = rng_for("qsi-2q-swap")
    phi1 = rng.uniform(0, 2 * math.pi, 60)
    phi2 = rng.uniform(0, 2 * math.pi, 60)
    i1, i2 = ml_qsi_2q(phi1, phi2, tab)
    j2, j1 = ml_qsi_2q(phi2, phi1, tab)
    np.testing.assert_array_equal(i1, j1)
    np.testing.assert_array_equal(i2, j2)
