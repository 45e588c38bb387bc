"""1D teleportation chain: frames, mode operators, and fidelity limits."""

import math

import numpy as np
import pytest

from binplanar.chain import (ChainConfig, _apply_mode_diag, _chain_delta,
                             recovery_frame, run_chain)
from binplanar.codes import Code, codeword
from binplanar.fock import ModeOperator
from binplanar.loss import NoiseParams
from binplanar.povm import build_povm
from binplanar.povm import measurement_error_rate

from conftest import rng_for

_H2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_Z = np.diag([1.0, -1.0])


# ---------------------------------------------------------------------------
# frames and helpers
# ---------------------------------------------------------------------------

def test_recovery_frame_single_outcomes():
    np.testing.assert_allclose(recovery_frame([1]), _H2.T, atol=1e-15)
    np.testing.assert_allclose(recovery_frame([-1]), (_H2 @ _Z).conj().T,
                               atol=1e-15)


def test_recovery_frame_composes_in_order():
    want = (_H2 @ _Z @ _H2).conj().T  # first +1 then −1
    np.testing.assert_allclose(recovery_frame([1, -1]), want, atol=1e-15)


def test_recovery_frame_rejects_bad_outcome():
    with pytest.raises(ValueError):
        recovery_frame([0])


def test_apply_mode_diag_matches_dense_matrix():
    rng = rng_for("chain-mode")
    D = 6
    psi = rng.normal(size=(2, D, D)) + 1j * rng.normal(size=(2, D, D))
    for k in (0, 1, 2):
        diag = rng.normal(size=D) + 1j * rng.normal(size=D)
        op = ModeOperator(diag=diag, k=k)
        Mx = op.as_matrix()
        for axis in (1, 2):
            got = _apply_mode_diag(psi, op, axis)
            want = np.tensordot(Mx, psi, axes=(1, axis))
            want = np.moveaxis(want, 0, axis)
            np.testing.assert_allclose(got, want, atol=1e-12)


def test_chain_delta_even_K_vanishes():
    code = Code(2, 4)
    g0 = np.real(codeword(code, 0))
    g1 = np.real(codeword(code, 1))
    assert _chain_delta(0.7, g0, g1, even_K=True) == 0.0


def test_chain_delta_trivial_code_tracks_phase():
    # |0⟩, |1⟩: arg⟨φ|1⟩⟨φ|0⟩* = −φ, folded into (−π/2, π/2]
    code = Code(1, 1)
    g0 = np.real(codeword(code, 0, 4))
    g1 = np.real(codeword(code, 1, 4))
    for phi in (0.3, 1.2, 2.9):
        want = -phi - math.pi * math.floor(-phi / math.pi + 0.5)
        got = _chain_delta(phi, g0, g1, even_K=False)
        assert got == pytest.approx(want, abs=1e-12)


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_chain_config_validation():
    code = Code(2, 2)
    with pytest.raises(ValueError):
        ChainConfig(code, NoiseParams(0.0, 2), M=1)
    with pytest.raises(ValueError):
        ChainConfig(code, NoiseParams(0.0, 2), shots=0)
    with pytest.raises(ValueError):
        ChainConfig(code, NoiseParams(0.0, 2), qsi="guess")


def test_chain_rejects_oversized_state():
    cfg = ChainConfig(Code(2, 6), NoiseParams(0.0, 2), M=6, shots=1)
    with pytest.raises(MemoryError):
        run_chain(cfg, rng_for("chain-big"))


def test_full_ml_requires_three_qubits():
    cfg = ChainConfig(Code(2, 2), NoiseParams(0.0, 2), qsi="ml", M=4, shots=1)
    with pytest.raises(ValueError):
        run_chain(cfg, rng_for("chain-m4"))


# ---------------------------------------------------------------------------
# fidelity behaviour
# ---------------------------------------------------------------------------

def test_chain_is_deterministic_given_rng():
    cfg = ChainConfig(Code(2, 2), NoiseParams(0.05, 2), povm="canonical",
                      shots=64)
    a = run_chain(cfg, rng_for("chain-det"))
    b = run_chain(cfg, rng_for("chain-det"))
    assert a == b


def test_no_loss_fidelity_is_measurement_floor():
    # two independent sign misassignments at rate q: F = (1 − q)²
    code = Code(2, 2)
    povm = build_povm("canonical", code.n_max)
    q, _ = measurement_error_rate(code, povm, "binning", 40_000,
                                  rng_for("chain-floor-q"))
    cfg = ChainConfig(code, NoiseParams(0.0, 2), povm="canonical",
                      qsi="binning", shots=4000)
    f, se = run_chain(cfg, rng_for("chain-floor"))
    assert f == pytest.approx((1 - q) ** 2, abs=3 * se + 3e-3)


def test_loss_degrades_fidelity():
    code = Code(2, 2)
    base = ChainConfig(code, NoiseParams(0.0, 2), povm="canonical", shots=1500)
    noisy = ChainConfig(code, NoiseParams(0.15, 2), povm="canonical", shots=1500)
    f0, se0 = run_chain(base, rng_for("chain-clean"))
    f1, se1 = run_chain(noisy, rng_for("chain-noisy"))
    assert f0 - f1 > 2 * math.hypot(se0, se1)


def test_local_ml_no_worse_than_binning_with_loss():
    code = Code(2, 6)
    noise = NoiseParams(0.1, 2)
    fb, seb = run_chain(ChainConfig(code, noise, povm="heterodyne",
                                    qsi="binning", shots=2500),
                        rng_for("chain-qsi"))
    fl, sel = run_chain(ChainConfig(code, noise, povm="heterodyne",
                                    qsi="local-ml", shots=2500),
                        rng_for("chain-qsi"))
    assert fl - fb > -2 * math.hypot(seb, sel)
