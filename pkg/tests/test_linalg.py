import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_normal_matrix
from normspec.errors import ConvergenceError, DimensionError, NotNormalError, PreconditionError
from normspec.linalg import (
    decompose_normal,
    hermitian_eigen,
    matrix_from_json,
    matrix_to_json,
    normality_residual,
    random_unitary,
)


def sorted_multiset(values):
    return sorted(np.round(np.asarray(values, dtype=complex), 9), key=lambda z: (z.real, z.imag))


def test_normality_residual_examples():
    assert normality_residual(np.diag([1j, -1j])) == 0.0
    assert normality_residual([[0, 1], [0, 0]]) == pytest.approx(math.sqrt(2), abs=1e-15)
    u = random_unitary(2, np.random.default_rng(1))
    assert normality_residual(u @ np.diag([0.3, 0.7j]) @ u.conj().T) <= 1e-10


def test_non_square_and_bad_input():
    with pytest.raises(DimensionError):
        normality_residual(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        decompose_normal(np.zeros((0, 0)))
    with pytest.raises(ValueError):
        decompose_normal([[np.nan]])


def test_hermitian_examples():
    d = hermitian_eigen(np.diag([2.0, -1.0]))
    assert np.allclose(d.eigenvalues, [-1, 2])
    assert np.allclose(np.abs(d.unitary), [[0, 1], [1, 0]])
    d = hermitian_eigen([[0, 1], [1, 0]])
    assert np.allclose(d.eigenvalues, [-1, 1])


def test_hermitian_against_numpy():
    rng = np.random.default_rng(2)
    for n in (1, 2, 5, 8, 13):
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a = (z + z.conj().T) / 2
        d = hermitian_eigen(a)
        assert np.allclose(d.eigenvalues.real, np.linalg.eigvalsh(a), atol=1e-10)
        assert np.max(np.abs(d.eigenvalues.imag)) == 0.0
        assert d.reconstruction_error(a) <= 1e-8
        assert np.max(np.abs(d.unitary.conj().T @ d.unitary - np.eye(n))) <= 1e-10


def test_hermitian_rejects_non_hermitian():
    with pytest.raises(PreconditionError):
        hermitian_eigen([[0, 1], [0, 0]])


def test_sweep_budget_exhaustion():
    rng = np.random.default_rng(3)
    z = rng.standard_normal((8, 8))
    with pytest.raises(ConvergenceError):
        hermitian_eigen(z + z.T, max_sweeps=0)


def test_sort_order_with_repeats():
    d = decompose_normal(np.diag([0.5, 0.5, -0.3j]))
    assert np.allclose(d.eigenvalues, [-0.3j, 0.5, 0.5])


def test_rotation_is_unitary_with_conjugate_pair():
    th = 0.7
    r = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    d = decompose_normal(r)
    assert np.allclose(d.eigenvalues, [np.exp(-1j * th), np.exp(1j * th)], atol=1e-12)


def test_fourth_roots_of_unity():
    rng = np.random.default_rng(4)
    u = random_unitary(4, rng)
    t = u @ np.diag([1, 1j, -1, -1j]) @ u.conj().T
    d = decompose_normal(t)
    assert np.allclose(d.eigenvalues, [-1, -1j, 1j, 1], atol=1e-8)
    assert d.reconstruction_error(t) <= 1e-8


def test_not_normal_carries_residual():
    with pytest.raises(NotNormalError) as info:
        decompose_normal([[0, 1], [0, 0]])
    assert info.value.residual == pytest.approx(math.sqrt(2))


def test_against_numpy_eigvals():
    rng = np.random.default_rng(5)
    for trial in range(40):
        n = int(rng.integers(1, 12))
        t, lam = random_normal_matrix(rng, n, repeat=trial % 3 == 0)
        d = decompose_normal(t)
        assert np.allclose(sorted_multiset(d.eigenvalues), sorted_multiset(np.linalg.eigvals(t)), atol=1e-7)
        assert d.reconstruction_error(t) <= 1e-8 * max(1.0, np.linalg.norm(t))
        assert d.orthonormality_error() <= 1e-9 * n


def test_zero_matrix():
    d = decompose_normal(np.zeros((3, 3)))
    assert np.allclose(d.eigenvalues, 0)
    assert d.orthonormality_error() == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_spectrum_invariant_under_conjugation(n, seed):
    rng = np.random.default_rng(seed)
    t, _ = random_normal_matrix(rng, n, repeat=seed % 2 == 0)
    v = random_unitary(n, rng)
    a = decompose_normal(t).eigenvalues
    b = decompose_normal(v @ t @ v.conj().T).eigenvalues
    assert np.allclose(sorted_multiset(a), sorted_multiset(b), atol=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_residual_bounds_spectrum_distance(n, seed):
    rng = np.random.default_rng(seed)
    t, _ = random_normal_matrix(rng, n)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    mu = complex(*rng.uniform(-1.2, 1.2, 2))
    lam = decompose_normal(t).eigenvalues
    assert np.min(np.abs(lam - mu)) <= np.linalg.norm(t @ x - mu * x) + 1e-9


def test_matrix_json_round_trip():
    a = np.array([[1 + 2j, 3], [0.5j, -1]])
    obj = matrix_to_json(a)
    assert obj["rows"] == 2 and obj["re"] == [1.0, 3.0, 0.0, -1.0]
    assert np.array_equal(matrix_from_json(obj), a)
    with pytest.raises(DimensionError):
        matrix_from_json({"rows": 2, "cols": 2, "re": [1, 2, 3], "im": [0, 0, 0]})
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 2})
