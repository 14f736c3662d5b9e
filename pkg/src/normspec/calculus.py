"""Continuous functional calculus on spectral models and separated projections."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from numpy.polynomial import chebyshev as C

from ._util import canon
from .errors import SeparationError
from .model import Block, ModelVector, Region, SpectralModel, spectral_projection

WITNESS_TARGET = 1e-6
MAX_DEGREE = 512


def functional_calculus(M: SpectralModel, f: Callable[[complex], complex], label: str | None = None) -> SpectralModel:
    """``f(T)``: every eigenvalue replaced by its image, colliding images merged."""
    blocks: list[Block] = []
    index: dict[complex, int] = {}
    for b in M.blocks:
        lam = canon(f(b.lam))
        if lam in index:
            t = blocks[index[lam]]
            t.mult = t.mult + b.mult
            t.allocated += b.allocated
        else:
            index[lam] = len(blocks)
            blocks.append(Block(lam, b.mult, b.allocated))
    return SpectralModel(blocks, label or f"f({M.label})", M.normality_residual)


def apply_function(v: ModelVector, f: Callable[[complex], complex]) -> ModelVector:
    """``f(T) v`` computed in the model of ``v``."""
    vals = [complex(f(b.lam)) for b in v.model.blocks]
    return v.model.vector({k: vals[k[0]] * c for k, c in v.coords.items()})


@dataclass(frozen=True)
class StarPolynomial:
    """``p(z, zbar) = sum c[j, k] z**j zbar**k``."""

    coeffs: Mapping[tuple[int, int], complex]

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        zb = z.conjugate()
        return sum((c * z**j * zb**k for (j, k), c in self.coeffs.items()), 0j)

    @property
    def degree(self) -> int:
        return max((j + k for j, k in self.coeffs), default=0)


def polynomial_approx_check(M: SpectralModel, f: Callable[[complex], complex], p: Callable[[complex], complex]) -> float:
    """``||f(T) - p(T, T*)||_op``, the sup of ``|f - p|`` over the spectrum."""
    return max((abs(complex(f(lam)) - complex(p(lam))) for lam in M.spectrum()), default=0.0)


def bernstein(f: Callable[[float], float], n: int, a: float = 0.0, b: float = 1.0) -> StarPolynomial:
    """Degree-``n`` Bernstein polynomial of ``f`` on ``[a, b]`` as a polynomial in ``z``."""
    coeffs = np.zeros(n + 1, dtype=complex)  # power basis in s = (z - a)/(b - a)
    for k in range(n + 1):
        fk = complex(f(a + (b - a) * k / n))
        # C(n,k) s^k (1-s)^(n-k) expanded
        for i in range(n - k + 1):
            coeffs[k + i] += fk * math.comb(n, k) * math.comb(n - k, i) * (-1) ** i
    # substitute s = (z - a)/(b - a)
    w = b - a
    out: dict[tuple[int, int], complex] = {}
    for d, c in enumerate(coeffs):
        for j in range(d + 1):
            term = c * math.comb(d, j) * (-a) ** (d - j) / w**d
            if term:
                out[(j, 0)] = out.get((j, 0), 0j) + term
    return StarPolynomial(out)


def _evaluate(f: Callable, grid: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(grid), dtype=complex)
        if out.shape == grid.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([[complex(f(complex(z))) for z in row] for row in grid])


@dataclass(frozen=True)
class ChebyshevWitness:
    """Tensor Chebyshev interpolant in the real and imaginary parts on a box."""

    coeffs: np.ndarray
    box: tuple[float, float, float, float]

    @property
    def degree(self) -> int:
        return int(self.coeffs.shape[0] - 1)

    def __call__(self, z: complex) -> complex:
        x0, x1, y0, y1 = self.box
        z = complex(z)
        u = (2 * z.real - x0 - x1) / (x1 - x0)
        v = (2 * z.imag - y0 - y1) / (y1 - y0)
        return complex(C.chebval2d(u, v, self.coeffs))


def chebyshev_witness(
    f: Callable[[complex], complex],
    points: list[complex],
    target: float = WITNESS_TARGET,
    max_degree: int = MAX_DEGREE,
) -> tuple[ChebyshevWitness, float]:
    """Interpolate ``f`` on a box around ``points``, doubling the degree until the error there is at most ``target``.

    A polynomial in ``x = (z + zbar)/2`` and ``y = (z - zbar)/2i`` is a
    polynomial in ``z`` and ``zbar``.
    """
    xs = [z.real for z in points]
    ys = [z.imag for z in points]
    pad = 0.05 * max(1.0, max(xs) - min(xs), max(ys) - min(ys))
    box = (min(xs) - pad, max(xs) + pad, min(ys) - pad, max(ys) + pad)
    deg = 4
    best = None
    while True:
        nodes = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
        X = 0.5 * (box[0] + box[1]) + 0.5 * (box[1] - box[0]) * nodes
        Y = 0.5 * (box[2] + box[3]) + 0.5 * (box[3] - box[2]) * nodes
        vals = _evaluate(f, X[:, None] + 1j * Y[None, :])
        V = C.chebvander(nodes, deg)
        coeffs = np.linalg.solve(V, np.linalg.solve(V, vals).T).T
        w = ChebyshevWitness(coeffs, box)
        err = max(abs(w(z) - complex(f(z))) for z in points)
        if best is None or err < best[1]:
            best = (w, err)
        if err <= target or deg * 2 > max_degree:
            return best
        deg *= 2


@dataclass(frozen=True)
class SeparatedProjection:
    model: SpectralModel
    values: tuple[float, ...]  # 1 on blocks of K1, 0 on K2
    bump: Callable[[complex], complex]
    witness: ChebyshevWitness
    witness_error: float

    def apply(self, v: ModelVector) -> ModelVector:
        return v.model.vector({k: self.values[k[0]] * c for k, c in v.coords.items()})

    def exact(self, v: ModelVector, region: Region) -> ModelVector:
        return spectral_projection(v, region)


def separated_projection(M: SpectralModel, K1: Region, K2: Region, eps: float) -> SeparatedProjection:
    """``E(K1)`` as ``f(T)`` for a smooth bump equal to 1 on ``K1`` and 0 on ``K2``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    in1, in2 = [], []
    for lam in M.spectrum():
        a, b = lam in K1, lam in K2
        if a == b:
            raise SeparationError(f"eigenvalue {lam} must lie in exactly one of the two regions", pair=(lam, lam))
        (in1 if a else in2).append(lam)
    for x in in1:
        for y in in2:
            if abs(x - y) <= eps:
                raise SeparationError(f"{x} and {y} are within {eps}", pair=(x, y))
    atoms = np.array(in1 + in2, dtype=complex)
    n1 = len(in1)

    def bump(z):
        """Inverse-square-distance weights of the K1 atoms; a rational function of x and y."""
        z = np.asarray(z, dtype=complex)
        logd = np.log(np.maximum(np.abs(z[..., None] - atoms) ** 2, 1e-300))
        # weight of atom a is the product of the squared distances to every other atom
        lw = logd.sum(axis=-1)[..., None] - logd
        w = np.exp(lw - lw.max(axis=-1)[..., None])
        return w[..., :n1].sum(axis=-1) / w.sum(axis=-1)

    values = tuple(1.0 if lam in K1 else 0.0 for lam in M.spectrum())
    pts = M.spectrum()
    if pts:
        witness, _ = chebyshev_witness(bump, pts)
        err = max(abs(witness(z) - v) for z, v in zip(pts, values))
    else:
        witness, err = ChebyshevWitness(np.zeros((1, 1)), (0.0, 1.0, 0.0, 1.0)), 0.0
    return SeparatedProjection(M, values, bump, witness, float(err))
