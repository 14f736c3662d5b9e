"""Random generators shared by the tests."""

from __future__ import annotations

import numpy as np

from normspec.model import INF, SpectralModel, build_model


def disk_points(rng: np.random.Generator, n: int, radius: float = 1.0) -> list[complex]:
    r = radius * np.sqrt(rng.random(n))
    t = 2 * np.pi * rng.random(n)
    return [complex(round(x, 6), round(y, 6)) for x, y in zip(r * np.cos(t), r * np.sin(t))]


def random_model(
    rng: np.random.Generator,
    n_inf: int = 2,
    n_fin: int = 2,
    inf_alloc: int = 4,
    max_mult: int = 3,
    label: str = "M",
) -> SpectralModel:
    pts = []
    while len(set(pts)) < n_inf + n_fin:
        pts = disk_points(rng, n_inf + n_fin, 0.95)
    mults = [INF] * n_inf + [int(rng.integers(1, max_mult + 1)) for _ in range(n_fin)]
    alloc = [inf_alloc] * n_inf + mults[n_inf:]
    return build_model(pts, mults, label, allocated=alloc)


def random_vector(model: SpectralModel, rng: np.random.Generator, density: float = 0.6, handles=None):
    handles = model.coordinates() if handles is None else handles
    coords = {}
    for h in handles:
        if rng.random() < density:
            coords[h] = complex(rng.standard_normal(), rng.standard_normal())
    if not coords and handles:
        coords[handles[int(rng.integers(len(handles)))]] = 1.0
    return model.vector(coords)


def unit(v):
    n = v.norm()
    return v / n if n else v


def random_normal_matrix(rng: np.random.Generator, n: int, repeat: bool = False) -> tuple[np.ndarray, np.ndarray]:
    from normspec.linalg import random_unitary

    lam = np.array(disk_points(rng, n, 1.0), dtype=complex)
    if repeat and n > 2:
        k = int(rng.integers(2, n))
        lam[:k] = lam[0]
    u = random_unitary(n, rng)
    return (u * lam) @ u.conj().T, lam


def grouped_instance(rng):
    """A model with >= 2 infinite blocks whose infinite coordinates are split into groups.

    Parameter vectors are coordinate vectors of the first groups, so their
    algebraic closure is known exactly; other vectors draw on a random
    selection of groups, which makes both outcomes of the independence test
    common.
    """
    M = random_model(rng, int(rng.integers(2, 4)), int(rng.integers(0, 3)), inf_alloc=8)
    inf = [h for h in M.coordinates() if not M.blocks[h[0]].finite]
    fin = [h for h in M.coordinates() if M.blocks[h[0]].finite]
    order = rng.permutation(len(inf))
    groups = [[inf[i] for i in order[k::5]] for k in range(5)]
    return M, groups, fin


def vec_on(M, rng, handles):
    return random_vector(M, rng, 0.7, handles) if handles else M.zero()


def coordinate_vectors(M, handles):
    return [M.basis_vector(*h) for h in handles]
