import math

import numpy as np
import pytest

from binplanar.fock import (ModeOperator, annihilate, apply_number_function,
                            basis_state, falling_factorial, inner,
                            lowering_matrix, n_max_for, norm2,
                            number_expectation)
from conftest import rng_for


def test_cutoff_formula():
    assert n_max_for(2, 2) == 12
    assert n_max_for(1, 1) == 7
    assert n_max_for(3, 4) == 22


def test_basis_inner_products():
    v0 = basis_state(0, 5)
    v1 = basis_state(1, 5)
    assert inner(v0, v0) == 1
    assert inner(v0, v1) == 0
    assert norm2(v1) == 1.0


def test_annihilate_matches_matrix():
    rng = rng_for("fock-annihilate")
    a = lowering_matrix(9)
    v = rng.normal(size=10) + 1j * rng.normal(size=10)
    for k in (1, 2, 3):
        direct = annihilate(v, k)
        mat = np.linalg.matrix_power(a, k) @ v
        assert np.allclose(direct, mat, atol=1e-12)


def test_annihilate_on_number_state():
    # â|n> = √n |n−1>
    for n in (1, 4, 7):
        v = annihilate(basis_state(n, 8))
        expect = math.sqrt(n) * basis_state(n - 1, 8)
        assert np.allclose(v, expect)
    assert np.allclose(annihilate(basis_state(0, 4)), np.zeros(5))


def test_falling_factorial_values():
    n = np.array([0, 1, 2, 5, 9])
    assert np.array_equal(falling_factorial(n, 0), np.ones(5))
    assert np.array_equal(falling_factorial(n, 1), n)
    # n(n−1)(n−2)
    assert np.array_equal(falling_factorial(n, 3), np.array([0, 0, 0, 60, 504]))


def test_number_function_identity():
    rng = rng_for("fock-numfun")
    v = rng.normal(size=7)
    assert np.allclose(apply_number_function(v, lambda n: np.ones_like(n, dtype=float)), v)
    w = apply_number_function(v, lambda n: n**2)
    assert np.allclose(w, np.arange(7) ** 2 * v)


def test_number_expectation():
    v = (basis_state(0, 6) + basis_state(4, 6)) / math.sqrt(2)
    assert number_expectation(v) == pytest.approx(2.0)


def test_mode_operator_apply_equals_matrix():
    rng = rng_for("fock-modeop")
    n_max = 11
    diag = rng.normal(size=n_max + 1) + 1j * rng.normal(size=n_max + 1)
    for k in (0, 1, 2):
        op = ModeOperator(diag=diag, k=k)
        v = rng.normal(size=n_max + 1) + 1j * rng.normal(size=n_max + 1)
        assert np.allclose(op.apply(v), op.as_matrix() @ v, atol=1e-12)


def test_mode_operator_compose_is_matrix_product():
    rng = rng_for("fock-compose")
    n_max = 10
    d1 = rng.normal(size=n_max + 1) + 1j * rng.normal(size=n_max + 1)
    d2 = rng.normal(size=n_max + 1) + 1j * rng.normal(size=n_max + 1)
    op1 = ModeOperator(diag=d1, k=1)
    op2 = ModeOperator(diag=d2, k=2)
    both = op1.compose(op2)
    assert np.allclose(both.as_matrix(), op1.as_matrix() @ op2.as_matrix(),
                       atol=1e-12)
