import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from normspec.errors import PositivityError, SizeError
from normspec.measure import (
    AtomicMeasure,
    abs_continuous,
    hellinger_sq,
    partition_sum,
    partition_sup_oracle,
    set_partitions,
    total_variation,
    weakstar_converged,
)
from normspec.model import build_model, scalar_measure

seeds = st.integers(0, 2**32 - 1)
BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]


def random_positive(rng, pool, k):
    idx = rng.choice(len(pool), size=k, replace=False)
    return AtomicMeasure({pool[i]: rng.random() * (rng.random() < 0.9) for i in idx})


def test_normalization():
    mu = AtomicMeasure([(0.1, 1), (0.1 + 1e-14, 2), (0.5, 0)])
    assert mu.items() == [(0.1 + 0j, 3 + 0j)]
    assert AtomicMeasure({1: 1, -1: -1}) + AtomicMeasure({-1: 1}) == AtomicMeasure({1: 1})


def test_total_variation_examples():
    assert total_variation(AtomicMeasure({1: 0.5, -1: 0.5})) == 1.0
    assert total_variation(AtomicMeasure()) == 0.0
    assert total_variation(AtomicMeasure({0: 0.5j, 1: -0.5})) == 1.0


def test_hellinger_examples():
    half = AtomicMeasure({1: 0.5, -1: 0.5})
    assert hellinger_sq(half, half) == 0.0
    assert hellinger_sq(AtomicMeasure({1: 1}), AtomicMeasure({-1: 1})) == 2.0
    assert hellinger_sq(half, AtomicMeasure({1: 1})) == pytest.approx(2 - math.sqrt(2), abs=1e-15)
    with pytest.raises(PositivityError):
        hellinger_sq(AtomicMeasure({1: -0.1}), half)
    with pytest.raises(PositivityError):
        hellinger_sq(AtomicMeasure({1: 0.1j}), half)


def test_set_partitions_counts():
    for n in range(8):
        parts = list(set_partitions(list(range(n))))
        assert len(parts) == BELL[n]
        canon = {tuple(sorted(tuple(c) for c in p)) for p in parts}
        assert len(canon) == BELL[n]
        for p in parts:
            assert sorted(x for c in p for x in c) == list(range(n))


def test_oracle_examples():
    a, b = AtomicMeasure({1: 1}), AtomicMeasure({-1: 1})
    assert partition_sum(a, b, [[1, -1]]) == 0.0
    assert partition_sum(a, b, [[1], [-1]]) == 2.0
    assert partition_sup_oracle(a, b) == 2.0
    half = AtomicMeasure({1: 0.5, -1: 0.5})
    for p in set_partitions([1, -1]):
        assert partition_sum(half, half, p) == 0.0


def test_oracle_size_limit():
    mu = AtomicMeasure({k: 1 for k in range(11)})
    with pytest.raises(SizeError):
        partition_sup_oracle(mu, mu)
    assert partition_sup_oracle(AtomicMeasure({k: 1 for k in range(10)}), AtomicMeasure()) == pytest.approx(10.0)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_oracle_equals_closed_form(seed):
    rng = np.random.default_rng(seed)
    pool = [complex(x, y) for x, y in rng.uniform(-1, 1, (9, 2))]
    mu = random_positive(rng, pool, int(rng.integers(0, 6)))
    nu = random_positive(rng, pool, int(rng.integers(0, 6)))
    assert abs(partition_sup_oracle(mu, nu) - hellinger_sq(mu, nu)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_refinement_never_decreases(seed):
    rng = np.random.default_rng(seed)
    pool = [complex(k, 0) for k in range(7)]
    mu, nu = random_positive(rng, pool, 5), random_positive(rng, pool, 5)
    pts = sorted(set(mu.support()) | set(nu.support()), key=lambda z: z.real)
    labels = rng.integers(0, 3, len(pts))
    coarse = [[p for p, l in zip(pts, labels) if l == k] for k in range(3)]
    coarse = [c for c in coarse if c]
    fine = []
    for c in coarse:
        cut = int(rng.integers(0, len(c) + 1))
        fine += [x for x in (c[:cut], c[cut:]) if x]
    assert partition_sum(mu, nu, fine) >= partition_sum(mu, nu, coarse) - 1e-15


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    pool = [complex(x, y) for x, y in rng.uniform(-1, 1, (6, 2))]
    a, b, c = (random_positive(rng, pool, 4) for _ in range(3))
    d = lambda x, y: math.sqrt(hellinger_sq(x, y))
    assert d(a, b) == d(b, a)
    assert d(a, a) == 0.0
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-12
    assert hellinger_sq(a, b) <= total_variation(a - b) + 1e-12


def test_weakstar_examples():
    mu = AtomicMeasure({0.3: 1})
    assert weakstar_converged([mu] * 3, mu, 4, 1e-12).converged
    seq = [AtomicMeasure({1 / n: 1}) for n in range(1, 400)]
    for level in range(1, 9):
        assert weakstar_converged(seq, AtomicMeasure({0: 1}), level, 1e-12).converged
    r = weakstar_converged([AtomicMeasure({1: 1})], AtomicMeasure({0: 1}), 3, 1e-12)
    assert not r.converged and r.max_residual == 1.0
    assert r.residuals[(3, 8, 0)] == 1.0 and r.residuals[(3, 0, 0)] == 1.0


def test_weakstar_squares_are_half_open():
    # 0.5 lies on a level-1 grid line and belongs to the square on its right
    r = weakstar_converged([AtomicMeasure({0.5: 1})], AtomicMeasure({0.4999: 1}), 1, 1e-12)
    assert r.residuals[(1, 1, 0)] == 1.0 and r.residuals[(1, 0, 0)] == 1.0
    with pytest.raises(ValueError):
        weakstar_converged([AtomicMeasure()], AtomicMeasure(), 9, 0.1)


def test_abs_continuous():
    M = build_model([1, 2, 3j], [2, 1, 1])
    rng = np.random.default_rng(3)
    for _ in range(30):
        h = M.coordinates()
        v = M.vector({x: complex(*rng.standard_normal(2)) for x in h if rng.random() < 0.5})
        w = M.vector({x: complex(*rng.standard_normal(2)) for x in h if rng.random() < 0.5})
        assert abs_continuous(scalar_measure(v, w), scalar_measure(v, v))
    assert not abs_continuous(AtomicMeasure({1: 1}), AtomicMeasure({0: 1}))
    assert abs_continuous(AtomicMeasure(), AtomicMeasure({0: 1}))
