"""Types over parameters, encoded by projections and residual spectral measures.

A tuple ``a`` over a parameter set ``B`` is described by the projections of
its entries onto the reducing span of ``B`` together with the matrix of
scalar measures of the residuals.  Two tuples have the same type over ``B``
exactly when these descriptors agree.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._util import canon
from .closure import Subspace, dcl_span, project, span
from .errors import (
    ArityError,
    BudgetError,
    InconsistentTypeError,
    ModelMismatchError,
    ParameterMismatchError,
)
from .measure import AtomicMeasure, abs_continuous, hellinger_sq
from .model import ModelVector, SpectralModel, allocate_fresh, block_projection, scalar_measure
from .theory import TheoryDescriptor

EMPTY_LABEL = "∅"
TYPE_TOL = 1e-9
NET_BUDGET = 200_000


@dataclass(frozen=True)
class TypeDescriptor:
    n: int
    base: tuple[ModelVector, ...]
    gram: tuple[tuple[AtomicMeasure, ...], ...]
    param_label: str
    model: SpectralModel

    def residual_measure(self, i: int = 0) -> AtomicMeasure:
        return self.gram[i][i]

    def restrict(self, i: int) -> "TypeDescriptor":
        """The 1-type of the ``i``-th coordinate."""
        return TypeDescriptor(1, (self.base[i],), ((self.gram[i][i],),), self.param_label, self.model)

    def check(self, tol: float = TYPE_TOL) -> None:
        """Raise if the measure matrix violates Hermitian symmetry, positivity or absolute continuity."""
        for i in range(self.n):
            if not self.gram[i][i].is_positive(tol):
                raise InconsistentTypeError(f"diagonal measure {i} is not positive")
            for j in range(self.n):
                if not self.gram[i][j].close_to(self.gram[j][i].conj(), tol):
                    raise InconsistentTypeError(f"measure matrix is not Hermitian at ({i}, {j})")
                if not abs_continuous(self.gram[i][j], self.gram[i][i]):
                    raise InconsistentTypeError(f"measure ({i}, {j}) charges a null set of measure ({i}, {i})")


def param_label(B: Sequence[ModelVector]) -> str:
    """Deterministic label for a parameter list; ``"∅"`` when empty."""
    if not B:
        return EMPTY_LABEL
    h = hashlib.sha1()
    for v in B:
        for (bi, j), c in sorted(v.coords.items()):
            z = canon(c)
            h.update(f"{bi},{j},{z.real!r},{z.imag!r};".encode())
        h.update(b"|")
    return "B:" + h.hexdigest()[:12]


def type_of(
    tup: Sequence[ModelVector],
    B: Sequence[ModelVector] = (),
    label: str | None = None,
    model: SpectralModel | None = None,
) -> TypeDescriptor:
    if not tup:
        raise ArityError("a type needs at least one coordinate")
    model = model or tup[0].model
    for v in list(tup) + list(B):
        if v.model is not model:
            raise ModelMismatchError("type_of needs every vector in one model")
    s = dcl_span(B, model)
    base = tuple(project(a, s) for a in tup)
    res = [a - b for a, b in zip(tup, base)]
    gram = tuple(tuple(scalar_measure(ci, cj) for cj in res) for ci in res)
    return TypeDescriptor(len(tup), base, gram, label if label is not None else param_label(B), model)


def _vector_gap(u: ModelVector, w: ModelVector) -> float:
    if u.model is w.model:
        return (u - w).norm()
    if u.model.extends(w.model):
        return (u - u.model.embed(w)).norm()
    if w.model.extends(u.model):
        return (w.model.embed(u) - w).norm()
    if not u.coords and not w.coords:
        return 0.0
    raise ModelMismatchError(f"cannot compare vectors of {u.model.label!r} and {w.model.label!r}")


def _same_params(p: TypeDescriptor, q: TypeDescriptor) -> None:
    if p.n != q.n:
        raise ArityError(f"arity {p.n} vs {q.n}")
    if p.param_label != q.param_label:
        raise ParameterMismatchError(f"parameters {p.param_label!r} vs {q.param_label!r}")


def same_type(p: TypeDescriptor, q: TypeDescriptor, tol: float = TYPE_TOL) -> bool:
    _same_params(p, q)
    if any(_vector_gap(a, b) > tol for a, b in zip(p.base, q.base)):
        return False
    return all(p.gram[i][j].close_to(q.gram[i][j], tol) for i in range(p.n) for j in range(p.n))


def phi1(p: TypeDescriptor) -> AtomicMeasure:
    """The spectral measure of a 1-type over the empty set."""
    if p.n != 1:
        raise ArityError(f"expected a 1-type, got arity {p.n}")
    if p.param_label != EMPTY_LABEL:
        raise ParameterMismatchError("phi1 is defined for types over the empty set")
    return p.gram[0][0]


def type_distance(p: TypeDescriptor, q: TypeDescriptor) -> float:
    """``sqrt(||P_B a - P_B b||**2 + hellinger_sq(mu_res(a), mu_res(b)))`` for 1-types."""
    _same_params(p, q)
    if p.n != 1:
        raise ArityError("type distance is defined for 1-types only")
    gap = _vector_gap(p.base[0], q.base[0])
    return math.sqrt(gap**2 + hellinger_sq(p.gram[0][0], q.gram[0][0]))


def realize_measure(model: SpectralModel, mu: AtomicMeasure) -> ModelVector:
    """A vector whose spectral measure is ``mu``: one coordinate of size ``sqrt(mass)`` per atom.

    Infinite blocks with nothing materialized receive a fresh coordinate.
    """
    if not mu.is_positive(TYPE_TOL):
        raise InconsistentTypeError("only positive measures are realized")
    coords = {}
    for lam, mass in mu.items():
        bi = model.block_index(lam)
        if bi is None:
            raise InconsistentTypeError(f"atom {lam} is not an eigenvalue of {model.label!r}")
        if model.blocks[bi].allocated == 0:
            allocate_fresh(model, bi)
        coords[(bi, 0)] = math.sqrt(max(mass.real, 0.0))
    return model.vector(coords)


def is_principal(p: TypeDescriptor, theory: TheoryDescriptor, tol: float = TYPE_TOL) -> bool:
    """Every coordinate's spectral measure lives on isolated points of K."""
    if p.param_label != EMPTY_LABEL:
        raise ParameterMismatchError("principality is decided for types over the empty set")
    iso = theory.isolated_points()
    for i in range(p.n):
        mu = p.gram[i][i]
        for lam in mu.support():
            if not theory.contains(lam, tol):
                raise InconsistentTypeError(f"atom {lam} of the type lies outside K")
        r2 = mu.total().real
        on_iso = sum((m.real for lam, m in mu.items() if lam in iso), 0.0)
        if abs(on_iso - r2) > tol:
            return False
    return True


def omega_categorical(theory: TheoryDescriptor) -> bool:
    """True iff K is finite: no perfect part and every listed point isolated."""
    return theory.is_finite()


def _room(model: SpectralModel, s: Subspace) -> list[int]:
    # blocks where a residual orthogonal to s can still carry mass
    out = []
    for bi, b in enumerate(model.blocks):
        used = span([block_projection(v, bi) for v in s.basis], model).dim
        if not b.finite or used < b.mult:
            out.append(bi)
    return out


def _grid(step: float, cap: float) -> np.ndarray:
    k = int(math.floor(cap / step + 1e-12))
    return step * np.arange(k + 1)


def _count_points(levels: Sequence[np.ndarray], cap2: float, budget: int) -> int:
    # number of grid points with sum of squares <= cap2, aborting past the budget
    count = 0

    def walk(i: int, used: float) -> bool:
        nonlocal count
        if i == len(levels):
            count += 1
            return count <= budget
        for x in levels[i]:
            if used + x * x > cap2 + 1e-12:
                break
            if not walk(i + 1, used + x * x):
                return False
        return True

    walk(0, 0.0)
    return count


def epsilon_net(
    model: SpectralModel,
    B: Sequence[ModelVector],
    eps: float,
    cap: float = 1.0,
    budget: int = NET_BUDGET,
) -> list[TypeDescriptor]:
    """Finitely many 1-types over ``B`` within ``eps`` of every type of norm at most ``cap``.

    Square-root masses on blocks with room and the real and imaginary parts of
    the base coordinates are rounded toward zero on grids fine enough that the
    total rounding error stays below ``eps``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    label = param_label(B)
    s = dcl_span(B, model)
    zero_base = model.zero()
    if eps > cap:
        return [TypeDescriptor(1, (zero_base,), ((AtomicMeasure(),),), label, model)]
    room = _room(model, s)
    lams = [model.blocks[bi].lam for bi in room]
    d = s.dim

    def layout(e: float) -> list[np.ndarray]:
        levels = []
        if room:
            levels += [_grid(e / (2 * math.sqrt(len(room))), cap)] * len(room)
        if d:
            g = _grid(e / (2 * math.sqrt(2 * d)), cap)
            signed = np.concatenate([g, -g[1:]])
            signed = signed[np.argsort(np.abs(signed), kind="stable")]
            levels += [signed] * (2 * d)
        return levels

    levels = layout(eps)
    n = _count_points(levels, cap * cap, budget)
    if n > budget:
        e = eps
        while _count_points(layout(e), cap * cap, budget) > budget:
            e *= 1.25
        raise BudgetError(f"an eps={eps} net exceeds the budget of {budget} types; eps={e:.6g} fits", achievable=e)

    out: list[TypeDescriptor] = []
    pt = [0.0] * len(levels)
    L = len(room)

    def emit() -> None:
        mu = AtomicMeasure({lam: r * r for lam, r in zip(lams, pt[:L])})
        base = zero_base
        for k, b in enumerate(s.basis):
            c = complex(pt[L + 2 * k], pt[L + 2 * k + 1])
            if c:
                base = base + c * b
        out.append(TypeDescriptor(1, (base,), ((mu,),), label, model))

    def walk(i: int, used: float) -> None:
        if i == len(levels):
            emit()
            return
        for x in levels[i]:
            if used + x * x > cap * cap + 1e-12:
                break
            pt[i] = float(x)
            walk(i + 1, used + x * x)
        pt[i] = 0.0

    walk(0, 0.0)
    return out


class NetIndex:
    """Vectorized nearest-element search over a net of 1-types in one model."""

    def __init__(self, net: Sequence[TypeDescriptor]):
        if not net:
            raise ValueError("empty net")
        self.net = list(net)
        first = self.net[0]
        for q in self.net:
            _same_params(first, q)
            if q.model is not first.model or q.n != 1:
                raise ModelMismatchError("a net index needs 1-types of one model")
        self.model = first.model
        self.handles = sorted({h for q in self.net for h in q.base[0].coords})
        self.atoms = sorted({lam for q in self.net for lam in q.gram[0][0].support()}, key=lambda z: (z.real, z.imag))
        hpos = {h: i for i, h in enumerate(self.handles)}
        apos = {lam: i for i, lam in enumerate(self.atoms)}
        self.base = np.zeros((len(self.net), len(self.handles)), dtype=complex)
        self.root = np.zeros((len(self.net), len(self.atoms)))
        for k, q in enumerate(self.net):
            for h, c in q.base[0].coords.items():
                self.base[k, hpos[h]] = c
            for lam, m in q.gram[0][0].items():
                self.root[k, apos[lam]] = math.sqrt(max(m.real, 0.0))

    def nearest(self, p: TypeDescriptor) -> tuple[int, float]:
        _same_params(self.net[0], p)
        if p.model is not self.model:
            return _nearest_slow(p, self.net)
        mu = p.gram[0][0]
        extra = 0.0
        root = np.zeros(len(self.atoms))
        apos = {lam: i for i, lam in enumerate(self.atoms)}
        for lam, m in mu.items():
            r = math.sqrt(max(m.real, 0.0))
            if lam in apos:
                root[apos[lam]] = r
            else:
                extra += r * r
        hpos = {h: i for i, h in enumerate(self.handles)}
        base = np.zeros(len(self.handles), dtype=complex)
        for h, c in p.base[0].coords.items():
            if h in hpos:
                base[hpos[h]] = c
            else:
                extra += abs(c) ** 2
        d2 = np.sum(np.abs(self.base - base) ** 2, axis=1) + np.sum((self.root - root) ** 2, axis=1) + extra
        k = int(np.argmin(d2))
        return k, type_distance(p, self.net[k])


def _nearest_slow(p: TypeDescriptor, net: Sequence[TypeDescriptor]) -> tuple[int, float]:
    best = min(range(len(net)), key=lambda i: type_distance(p, net[i]))
    return best, type_distance(p, net[best])


def nearest_in_net(p: TypeDescriptor, net: Sequence[TypeDescriptor]) -> tuple[int, float]:
    """Index of the net element closest to ``p`` and its distance."""
    return _nearest_slow(p, net)


__all__ = [
    "EMPTY_LABEL",
    "NetIndex",
    "TypeDescriptor",
    "epsilon_net",
    "is_principal",
    "nearest_in_net",
    "omega_categorical",
    "param_label",
    "phi1",
    "realize_measure",
    "same_type",
    "type_distance",
    "type_of",
]
