import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import disk_points, random_model, random_normal_matrix, random_vector, unit
from normspec.errors import CapacityError, DuplicateEigenvalueError, ModelMismatchError, PartitionError
from normspec.model import (
    INF,
    Region,
    adjoint_predicate,
    allocate_fresh,
    apply_T,
    apply_Tstar,
    ball,
    build_model,
    direct_sum,
    direct_sum_maps,
    eigen_residual,
    integrate_pvm,
    model_from_matrix,
    pseudocompact_witness,
    scalar_measure,
    spectral_projection,
    spectrum_distance,
)
from normspec.measure import total_variation

seeds = st.integers(0, 2**32 - 1)


def block_of(model, lam):
    return model.block_index(lam)


def test_apply_T_examples():
    M = build_model([0.5, 1, -1], [2, 1, 1])
    e = M.basis_vector(0, 1)
    assert apply_T(e).close_to(0.5 * e)
    assert apply_T(M.zero()).coords == {}
    v = M.vector({(1, 0): 2 + 1j, (2, 0): 3})
    assert apply_T(v).coords == {(1, 0): 2 + 1j, (2, 0): -3}


def test_apply_Tstar_examples():
    M = build_model([1j], [1])
    e = M.basis_vector(0, 0)
    assert apply_Tstar(e).close_to(-1j * e)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_normality_on_vectors(seed):
    rng = np.random.default_rng(seed)
    M = random_model(rng)
    v = random_vector(M, rng)
    assert apply_Tstar(apply_T(v)).close_to(apply_T(apply_Tstar(v)), 1e-14)
    assert abs(apply_T(v).norm() - apply_Tstar(v).norm()) <= 1e-12


def test_adjoint_predicate():
    M = build_model([1j, 0.3], [1, 2])
    x = M.basis_vector(0, 0)
    assert adjoint_predicate(x, apply_Tstar(x)) == 0.0
    assert adjoint_predicate(x, M.zero()) == pytest.approx(1.0)
    other = build_model([1j], [1])
    with pytest.raises(ModelMismatchError):
        adjoint_predicate(x, other.basis_vector(0, 0))


def test_adjoint_predicate_matches_sup_definition():
    # sup over unit z of |<Tz, x> - <z, y>| is attained at z parallel to T*x - y
    rng = np.random.default_rng(7)
    for _ in range(30):
        M = random_model(rng)
        x, y = random_vector(M, rng), random_vector(M, rng)
        h = M.coordinates()
        lam = np.array([M.blocks[b].lam for b, _ in h])
        X, Y = x.to_array(h), y.to_array(h)
        best = 0.0
        for _ in range(300):
            z = rng.standard_normal(len(h)) + 1j * rng.standard_normal(len(h))
            z /= np.linalg.norm(z)
            best = max(best, abs(np.vdot(X, lam * z) - np.vdot(Y, z)))
        val = adjoint_predicate(x, y)
        assert best <= val + 1e-12
        w = np.conj(lam) * X - Y
        if np.linalg.norm(w):
            z = w / np.linalg.norm(w)
            assert abs(np.vdot(X, lam * z) - np.vdot(Y, z)) == pytest.approx(val, rel=1e-12)


def test_pvm_examples():
    M = build_model([1, -1, 0.5j], [1, 1, INF], allocated=[1, 1, 2])
    v = M.vector({(0, 0): 1, (1, 0): 2, (2, 1): 3j})
    assert spectral_projection(v, Region.plane()).close_to(v, 0)
    assert spectral_projection(v, Region.empty()).coords == {}
    A, B = Region.points([1]), Region.box(-2, 0, -1, 1)
    assert (spectral_projection(v, A) + spectral_projection(v, B)).close_to(spectral_projection(v, A | B), 0)


def random_region(rng, model):
    atoms = [lam for lam in model.spectrum() if rng.random() < 0.3]
    boxes = []
    for _ in range(int(rng.integers(0, 3))):
        x0, y0 = rng.uniform(-1, 1, 2)
        boxes.append((x0, x0 + rng.uniform(0, 1), y0, y0 + rng.uniform(0, 1)))
    return Region(frozenset(atoms), tuple(boxes))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_pvm_axioms(seed):
    rng = np.random.default_rng(seed)
    M = random_model(rng, n_inf=2, n_fin=3)
    v = random_vector(M, rng)
    A, B = random_region(rng, M), random_region(rng, M)
    E = spectral_projection
    assert E(E(v, A), B).close_to(E(v, A & B), 0)
    assert E(E(v, A), A).close_to(E(v, A), 0)
    w = random_vector(M, rng)
    assert abs(E(v, A).inner(w) - v.inner(E(w, A))) <= 1e-12
    # disjoint pieces: A and the part of B outside A
    rest = Region.points(lam for lam in M.spectrum() if lam in B and lam not in A)
    assert (E(v, A) + E(v, rest)).close_to(E(v, A | rest), 1e-15)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_reducing_subspaces(seed):
    rng = np.random.default_rng(seed)
    M = random_model(rng)
    v = random_vector(M, rng)
    A = random_region(rng, M)
    inside = spectral_projection(v, A)
    outside = v - inside
    for op in (apply_T, apply_Tstar):
        assert spectral_projection(op(inside), A).close_to(op(inside), 0)
        assert spectral_projection(op(outside), A).norm() == 0.0


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_residual_bounds_distance_to_spectrum(seed):
    rng = np.random.default_rng(seed)
    M = random_model(rng)
    v = unit(random_vector(M, rng))
    mu = complex(*rng.uniform(-1.2, 1.2, 2))
    assert spectrum_distance(M, mu) <= eigen_residual(v, mu) + 1e-12


@settings(max_examples=150, deadline=None)
@given(seeds, st.sampled_from([0.05, 0.1, 0.3]), st.sampled_from([0.05, 0.1, 0.3]))
def test_almost_eigenvector_is_near_eigenspace(seed, eps, eta):
    rng = np.random.default_rng(seed)
    M = random_model(rng, n_inf=3, n_fin=3)
    lam = M.blocks[int(rng.integers(len(M.blocks)))].lam + complex(*rng.normal(0, eta / 4, 2))
    v = unit(random_vector(M, rng))
    # push most of the mass onto blocks near lam
    near = ball(M, lam, eta)
    v = unit(spectral_projection(v, near) * 10 + v) if spectral_projection(v, near).norm() else v
    delta = eps * (eta / 2)
    if eigen_residual(v, lam) < delta:
        assert (v - spectral_projection(v, near)).norm() < eps


def test_scalar_measure_examples():
    M = build_model([1, -1], [1, 1])
    v = M.vector({(0, 0): math.sqrt(0.5), (1, 0): math.sqrt(0.5)})
    mu = scalar_measure(v, v)
    assert mu.mass(1) == pytest.approx(0.5) and mu.mass(-1) == pytest.approx(0.5)
    assert mu.total() == pytest.approx(1.0)
    w = M.vector({(0, 0): 1, (1, 0): -1})
    u = M.vector({(0, 0): 1, (1, 0): 1})
    assert len(scalar_measure(u, w)) == 2  # orthogonal vectors still have a nonzero measure
    x = M.vector({(1, 0): 1.0})
    y = M.vector({(0, 0): 1.0})
    assert len(scalar_measure(x, y)) == 0


def test_scalar_measure_linear_in_first_argument():
    M = build_model([1, 2j], [2, 1])
    v = M.vector({(0, 0): 1, (0, 1): 1j, (1, 0): 2})
    w = M.vector({(0, 0): 1j, (1, 0): 1})
    assert scalar_measure(2j * v, w).close_to(2j * scalar_measure(v, w), 1e-15)
    assert scalar_measure(v, 2j * w).close_to(-2j * scalar_measure(v, w), 1e-15)
    assert scalar_measure(v, w).close_to(scalar_measure(w, v).conj(), 1e-15)
    assert scalar_measure(v, w).total() == pytest.approx(v.inner(w))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_scalar_measure_bounds(seed):
    rng = np.random.default_rng(seed)
    M = random_model(rng)
    v, w = random_vector(M, rng), random_vector(M, rng)
    assert total_variation(scalar_measure(v, w)) <= v.norm() * w.norm() + 1e-12
    assert abs(scalar_measure(v, v).total() - v.norm() ** 2) <= 1e-12
    assert scalar_measure(v, v).is_positive()


def test_integrate_identity_and_constants():
    M = build_model([0, 0.5, 1], [1, 2, 1])
    cells = [Region.points([z]) for z in M.spectrum()]
    R = integrate_pvm(M, lambda z: z, cells, M.spectrum())
    assert R.error == 0.0
    v = M.vector({(0, 0): 1, (1, 1): 2, (2, 0): 3})
    assert R.apply(v).close_to(apply_T(v), 0)
    R = integrate_pvm(M, lambda z: 3.0, [Region.plane()], [0.25])
    assert R.apply(v).close_to(3 * v, 0) and R.error == 0.0


def test_integrate_square_on_grid():
    M = build_model([0, 0.5, 1], [1, 1, 1])
    d = 0.1
    side = d / math.sqrt(2)
    cells, samples = [], []
    for lam in M.spectrum():
        k = math.floor(lam.real / side)
        box = Region.box(k * side, (k + 1) * side, -side / 2, side / 2)
        cells.append(box)
        samples.append(complex((k + 0.5) * side, 0))
    R = integrate_pvm(M, lambda z: z * z, cells, samples, eps=1.0)
    exact = max(abs(lam**2 - s**2) for lam, s in zip(M.spectrum(), samples))
    assert R.error == pytest.approx(exact, abs=1e-15)
    assert R.error <= R.oscillation + 1e-15
    assert R.certified


def test_integrate_partition_errors():
    M = build_model([0, 1], [1, 1])
    with pytest.raises(PartitionError):
        integrate_pvm(M, abs, [Region.points([0])], [0])
    with pytest.raises(PartitionError):
        integrate_pvm(M, abs, [Region.plane(), Region.points([1])], [0, 1])
    with pytest.raises(PartitionError):
        integrate_pvm(M, abs, [Region.plane()], [complex(5, 0) + 1j * math.inf])


def test_build_model_examples():
    M = build_model([1, -1], [INF, INF])
    assert [b.mult for b in M.blocks] == [INF, INF] and M.fin_blocks() == []
    M = build_model([0.5], [3])
    assert M.fin_blocks() == [0] and M.blocks[0].allocated == 3
    K = [0.1, 0.2j, -0.3]
    assert build_model(K, [1, 1, 1]).spectrum() == K
    with pytest.raises(DuplicateEigenvalueError):
        build_model([0.1, 0.1 + 1e-14], [1, 1])
    assert build_model([1, 2], [0, 1]).spectrum() == [2]


def test_direct_sum_examples():
    A = build_model([1, 2], [2, INF])
    Z = build_model([], [])
    assert [(b.lam, b.mult) for b in direct_sum(A, Z).blocks] == [(b.lam, b.mult) for b in A.blocks]
    assert direct_sum(build_model([1], [2]), build_model([1], [3])).blocks[0].mult == 5
    assert direct_sum(build_model([1], [2]), build_model([1], [INF])).blocks[0].mult == INF
    S = direct_sum(build_model([1], [1]), build_model([3j], [1]))
    assert set(S.spectrum()) == {1, 3j}


def test_direct_sum_inclusions_are_isometric():
    rng = np.random.default_rng(11)
    A = random_model(rng, label="A")
    B = random_model(rng, label="B")
    B.blocks[0].lam = A.blocks[0].lam  # shared eigenvalue exercises the offset
    B._index = {b.lam: i for i, b in enumerate(B.blocks)}
    S, left, right = direct_sum_maps(A, B)
    a, b = random_vector(A, rng), random_vector(B, rng)
    assert left(a).norm() == pytest.approx(a.norm())
    assert right(b).norm() == pytest.approx(b.norm())
    assert left(a).inner(right(b)) == 0
    assert apply_T(right(b)).close_to(right(apply_T(b)), 1e-15)


def test_pseudocompact_witness_examples():
    W = pseudocompact_witness([0], None, [INF], 3)
    assert [(b.lam, b.mult) for b in W.blocks] == [(0, 3)]
    W = pseudocompact_witness([], lambda k: list(np.linspace(0, 1, 2 * k + 1)), [], 2)
    assert all(b.mult == 1 for b in W.blocks)
    assert len(W.blocks) == 5
    pts = np.array(W.spectrum())
    for x in np.linspace(0, 1, 101):
        assert np.min(np.abs(pts - x)) <= 0.5
    W = pseudocompact_witness([1, 2, 3], None, [5, 1, 2], 2)
    assert [(b.lam, b.mult) for b in W.blocks] == [(1, 2), (2, 1)]


def test_allocate_fresh():
    M = build_model([1, 2], [INF, 2])
    assert allocate_fresh(M, 0) == 0
    assert allocate_fresh(M, 0) == 1
    with pytest.raises(CapacityError):
        allocate_fresh(M, 1)
    e0, e1 = M.basis_vector(0, 0), M.basis_vector(0, 1)
    assert e0.inner(e0) == 1 and e0.inner(e1) == 0


def test_vector_validation_and_mismatch():
    M = build_model([1], [INF])
    with pytest.raises(IndexError):
        M.vector({(0, 0): 1})
    N = build_model([1], [1])
    with pytest.raises(ModelMismatchError):
        N.basis_vector(0, 0) + build_model([1], [1]).basis_vector(0, 0)


def test_region_membership():
    R = Region.box(0, 1, 0, 1) | Region.points([2])
    assert 0 in R and 0.999 in R and 1 not in R and 2 in R and 1j not in R
    assert (R & Region.box(0.5, 3, -1, 0.5)).boxes == ((0.5, 1.0, 0.0, 0.5),)
    assert 2 in (R & Region.box(1.5, 3, -1, 1))


def test_ball_is_strict():
    M = build_model([0, 0.1, 0.3], [1, 1, 1])
    assert ball(M, 0, 0.1).atoms == frozenset({0})
    assert ball(M, 0, 0.1000001).atoms == frozenset({0, 0.1})


def test_model_from_matrix_groups_repeats():
    rng = np.random.default_rng(12)
    for _ in range(10):
        t, lam = random_normal_matrix(rng, 6, repeat=True)
        M, u, handles = model_from_matrix(t)
        assert M.dimension() == 6
        assert sum(b.mult for b in M.blocks) == 6
        assert len(M.blocks) == len(set(lam.tolist()))
        # the columns of u are eigenvectors for the eigenvalue of their block
        for col, (bi, _) in enumerate(handles):
            x = u[:, col]
            assert np.linalg.norm(t @ x - M.blocks[bi].lam * x) <= 1e-8


def test_model_from_matrix_merges_rounding_splits():
    M, U, handles = model_from_matrix(np.diag([0.2, 0.2 + 1e-12, -0.5j]))
    assert [b.mult for b in M.blocks] == [1, 2]
    assert M.blocks[1].lam == pytest.approx(0.2, abs=1e-12)
    assert sorted(handles) == [(0, 0), (1, 0), (1, 1)]
