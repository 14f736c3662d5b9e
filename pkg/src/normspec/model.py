"""Spectral models: eigenvalue blocks, finitely supported vectors, and the PVM.

A model is a direct sum of eigenspaces.  Each block carries an eigenvalue and a
multiplicity that is either a positive integer or :data:`INF`.  Coordinates of
infinite blocks are materialized lazily through :func:`allocate_fresh`, so a
model only ever stores finitely many numbers while keeping the finite/infinite
distinction exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ._util import canon, sort_key
from .errors import (
    CapacityError,
    DuplicateEigenvalueError,
    ModelMismatchError,
    PartitionError,
)
from .measure import AtomicMeasure

INF = math.inf


def is_inf(m) -> bool:
    return m == INF


def _check_mult(m, allow_zero: bool = False):
    if is_inf(m):
        return INF
    if isinstance(m, str) and m.lower() in ("inf", "infinity", "∞"):
        return INF
    if isinstance(m, bool) or int(m) != m:
        raise ValueError(f"multiplicity must be a nonnegative integer or INF, got {m!r}")
    m = int(m)
    if m < 0 or (m == 0 and not allow_zero):
        raise ValueError(f"multiplicity must be positive inside a model, got {m}")
    return m


@dataclass
class Block:
    lam: complex
    mult: int | float
    allocated: int = 0

    def __post_init__(self):
        self.lam = canon(self.lam)
        self.mult = _check_mult(self.mult)
        if self.allocated < 0 or (not is_inf(self.mult) and self.allocated > self.mult):
            raise ValueError(f"block {self.lam}: allocated {self.allocated} exceeds multiplicity {self.mult}")

    @property
    def finite(self) -> bool:
        return not is_inf(self.mult)


class SpectralModel:
    """A diagonal normal operator presented as a list of eigenvalue blocks."""

    def __init__(self, blocks: Iterable[Block], label: str = "model", normality_residual: float = 0.0):
        self.blocks: list[Block] = list(blocks)
        self.label = label
        self.normality_residual = float(normality_residual)
        self._index: dict[complex, int] = {}
        for i, b in enumerate(self.blocks):
            if b.lam in self._index:
                raise DuplicateEigenvalueError(f"eigenvalue {b.lam} appears twice in model {label!r}")
            self._index[b.lam] = i

    def __repr__(self) -> str:
        parts = ", ".join(f"{b.lam}:{'inf' if not b.finite else b.mult}" for b in self.blocks)
        return f"SpectralModel({self.label!r}, [{parts}])"

    def spectrum(self) -> list[complex]:
        return [b.lam for b in self.blocks]

    def multiplicities(self) -> dict[complex, int | float]:
        return {b.lam: b.mult for b in self.blocks}

    def block_index(self, lam) -> int | None:
        return self._index.get(canon(lam))

    def fin_blocks(self) -> list[int]:
        """Indices of the blocks spanning H_fin."""
        return [i for i, b in enumerate(self.blocks) if b.finite]

    def dimension(self) -> int | float:
        return sum((b.mult for b in self.blocks), 0)

    def norm(self) -> float:
        """Operator norm, the largest ``|lambda|`` in the spectrum."""
        return max((abs(b.lam) for b in self.blocks), default=0.0)

    def copy(self, label: str | None = None) -> "SpectralModel":
        blocks = [Block(b.lam, b.mult, b.allocated) for b in self.blocks]
        return SpectralModel(blocks, label or self.label, self.normality_residual)

    def extends(self, other: "SpectralModel") -> bool:
        """True iff every coordinate of ``other`` is also a coordinate of ``self``."""
        if len(other.blocks) > len(self.blocks):
            return False
        for b, c in zip(other.blocks, self.blocks):
            if b.lam != c.lam or c.allocated < b.allocated:
                return False
        return True

    def vector(self, coords: Mapping[tuple[int, int], complex] | None = None) -> "ModelVector":
        return ModelVector(self, coords)

    def zero(self) -> "ModelVector":
        return ModelVector(self)

    def basis_vector(self, block: int, index: int) -> "ModelVector":
        return ModelVector(self, {(block, index): 1.0})

    def embed(self, v: "ModelVector") -> "ModelVector":
        """Carry ``v`` into this model, which must extend the model owning ``v``."""
        if v.model is self:
            return v
        if not self.extends(v.model):
            raise ModelMismatchError(f"model {self.label!r} does not extend {v.model.label!r}")
        return ModelVector(self, v.coords)

    def coordinates(self) -> list[tuple[int, int]]:
        """All materialized coordinate handles, block by block."""
        return [(i, j) for i, b in enumerate(self.blocks) for j in range(b.allocated)]


class ModelVector:
    """A finitely supported element of a model, stored as ``(block, index) -> value``."""

    __slots__ = ("model", "coords")

    def __init__(self, model: SpectralModel, coords: Mapping[tuple[int, int], complex] | None = None):
        self.model = model
        clean: dict[tuple[int, int], complex] = {}
        for (bi, j), val in (coords or {}).items():
            bi, j = int(bi), int(j)
            if not 0 <= bi < len(model.blocks):
                raise IndexError(f"block {bi} out of range for model {model.label!r}")
            if not 0 <= j < model.blocks[bi].allocated:
                raise IndexError(f"coordinate {j} not allocated in block {bi} of {model.label!r}")
            val = complex(val)
            if val != 0:
                clean[(bi, j)] = val
        self.coords = clean

    @classmethod
    def _raw(cls, model: SpectralModel, coords: dict) -> "ModelVector":
        v = cls.__new__(cls)
        v.model = model
        v.coords = {k: c for k, c in coords.items() if c != 0}
        return v

    def _same(self, other: "ModelVector") -> None:
        if other.model is not self.model:
            raise ModelMismatchError(f"vectors live in different models ({self.model.label!r}, {other.model.label!r})")

    def __add__(self, other: "ModelVector") -> "ModelVector":
        self._same(other)
        out = dict(self.coords)
        for k, c in other.coords.items():
            out[k] = out.get(k, 0j) + c
        return ModelVector._raw(self.model, out)

    def __neg__(self) -> "ModelVector":
        return ModelVector._raw(self.model, {k: -c for k, c in self.coords.items()})

    def __sub__(self, other: "ModelVector") -> "ModelVector":
        return self + (-other)

    def __mul__(self, scalar) -> "ModelVector":
        scalar = complex(scalar)
        return ModelVector._raw(self.model, {k: scalar * c for k, c in self.coords.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "ModelVector":
        return self * (1.0 / complex(scalar))

    def inner(self, other: "ModelVector") -> complex:
        """``<self, other>``, linear in ``self``."""
        self._same(other)
        small, large = (self.coords, other.coords) if len(self.coords) <= len(other.coords) else (other.coords, self.coords)
        total = 0j
        for k in small:
            if k in large:
                total += self.coords[k] * other.coords[k].conjugate()
        return total

    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.coords.values()))

    def close_to(self, other: "ModelVector", tol: float = 1e-12) -> bool:
        return (self - other).norm() <= tol

    def blocks(self) -> list[int]:
        return sorted({bi for bi, _ in self.coords})

    def to_array(self, handles: Sequence[tuple[int, int]]) -> np.ndarray:
        return np.array([self.coords.get(h, 0j) for h in handles], dtype=complex)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {c:.6g}" for k, c in sorted(self.coords.items()))
        return f"ModelVector({self.model.label!r}, {{{body}}})"


def _scaled(v: ModelVector, factor: Callable[[complex], complex]) -> ModelVector:
    blocks = v.model.blocks
    return ModelVector._raw(v.model, {(bi, j): factor(blocks[bi].lam) * c for (bi, j), c in v.coords.items()})


def apply_T(v: ModelVector) -> ModelVector:
    return _scaled(v, lambda lam: lam)


def apply_Tstar(v: ModelVector) -> ModelVector:
    return _scaled(v, lambda lam: lam.conjugate())


def adjoint_predicate(x: ModelVector, y: ModelVector) -> float:
    """``sup_{|z|<=1} |<Tz, x> - <z, y>|``, which equals ``||T*x - y||``."""
    x._same(y)
    return (apply_Tstar(x) - y).norm()


def eigen_residual(v: ModelVector, mu) -> float:
    """``||Tv - mu v||``."""
    return (apply_T(v) - complex(mu) * v).norm()


def spectrum_distance(model: SpectralModel, mu) -> float:
    return min((abs(lam - complex(mu)) for lam in model.spectrum()), default=math.inf)


Box = tuple[float, float, float, float]


@dataclass(frozen=True)
class Region:
    """Finite set of atoms together with half-open boxes ``[x0,x1) x [y0,y1)``."""

    atoms: frozenset = field(default_factory=frozenset)
    boxes: tuple[Box, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", frozenset(canon(z) for z in self.atoms))
        object.__setattr__(self, "boxes", tuple(tuple(float(t) for t in b) for b in self.boxes))

    @classmethod
    def empty(cls) -> "Region":
        return cls()

    @classmethod
    def plane(cls) -> "Region":
        return cls(boxes=((-math.inf, math.inf, -math.inf, math.inf),))

    @classmethod
    def points(cls, zs: Iterable[complex]) -> "Region":
        return cls(atoms=frozenset(zs))

    @classmethod
    def box(cls, x0: float, x1: float, y0: float, y1: float) -> "Region":
        return cls(boxes=((x0, x1, y0, y1),))

    def __contains__(self, z) -> bool:
        z = canon(z)
        if z in self.atoms:
            return True
        return any(x0 <= z.real < x1 and y0 <= z.imag < y1 for x0, x1, y0, y1 in self.boxes)

    def __or__(self, other: "Region") -> "Region":
        return Region(self.atoms | other.atoms, self.boxes + other.boxes)

    union = __or__

    def __and__(self, other: "Region") -> "Region":
        atoms = {z for z in self.atoms if z in other} | {z for z in other.atoms if z in self}
        boxes = []
        for a in self.boxes:
            for b in other.boxes:
                x0, x1 = max(a[0], b[0]), min(a[1], b[1])
                y0, y1 = max(a[2], b[2]), min(a[3], b[3])
                if x0 < x1 and y0 < y1:
                    boxes.append((x0, x1, y0, y1))
        return Region(frozenset(atoms), tuple(boxes))

    intersection = __and__

    def restrict(self, model: SpectralModel) -> frozenset:
        """The block eigenvalues of ``model`` lying in this region."""
        return frozenset(lam for lam in model.spectrum() if lam in self)


def ball(model: SpectralModel, lam, eta: float) -> Region:
    """Open ball ``B(lam; eta)`` intersected with the spectrum of ``model``."""
    lam = complex(lam)
    return Region.points(mu for mu in model.spectrum() if abs(mu - lam) < eta)


def spectral_projection(v: ModelVector, region: Region) -> ModelVector:
    """``E(region) v``: drop every coordinate whose eigenvalue lies outside ``region``."""
    blocks = v.model.blocks
    keep = {bi for bi in v.blocks() if blocks[bi].lam in region}
    return ModelVector._raw(v.model, {k: c for k, c in v.coords.items() if k[0] in keep})


def block_projection(v: ModelVector, block: int) -> ModelVector:
    return ModelVector._raw(v.model, {k: c for k, c in v.coords.items() if k[0] == block})


def scalar_measure(v: ModelVector, w: ModelVector) -> AtomicMeasure:
    """``mu_{v,w}(A) = <E(A) v, w>``."""
    v._same(w)
    masses: dict[complex, complex] = {}
    blocks = v.model.blocks
    for k, c in v.coords.items():
        d = w.coords.get(k)
        if d is not None:
            lam = blocks[k[0]].lam
            masses[lam] = masses.get(lam, 0j) + c * d.conjugate()
    return AtomicMeasure(masses)


@dataclass(frozen=True)
class RiemannSum:
    """The operator ``sum_i phi(a_i) E(A_i)`` together with its exact distance to ``phi(T)``."""

    model: SpectralModel
    values: tuple[complex, ...]  # per block
    cells: tuple[int, ...]  # per block, index of its partition cell
    error: float  # ||phi(T) - sum||_op
    oscillation: float  # max over cells of the spread of phi on the atoms and sample
    certified: bool | None = None

    def apply(self, v: ModelVector) -> ModelVector:
        if v.model is not self.model:
            raise ModelMismatchError("vector does not belong to the integrated model")
        vals = self.values
        return ModelVector._raw(v.model, {k: vals[k[0]] * c for k, c in v.coords.items()})

    def matrix(self) -> np.ndarray:
        """Diagonal matrix on the materialized coordinates."""
        handles = self.model.coordinates()
        return np.diag([self.values[bi] for bi, _ in handles]).astype(complex)


def integrate_pvm(
    model: SpectralModel,
    phi: Callable[[complex], complex],
    partition: Sequence[Region],
    samples: Sequence[complex],
    eps: float | None = None,
) -> RiemannSum:
    """Riemann-sum approximation of ``integral phi dE`` over a partition of the spectrum.

    When ``eps`` is given, ``certified`` records whether the operator-norm
    error is at most ``eps``.  An oscillation of ``phi`` below ``eps`` on every
    cell always yields a certificate.
    """
    if len(partition) != len(samples):
        raise PartitionError("partition and samples differ in length")
    for i, (cell, a) in enumerate(zip(partition, samples)):
        if complex(a) not in cell:
            raise PartitionError(f"sample {a} does not lie in cell {i}")
    cells = []
    for lam in model.spectrum():
        hits = [i for i, cell in enumerate(partition) if lam in cell]
        if not hits:
            raise PartitionError(f"eigenvalue {lam} is not covered by the partition")
        if len(hits) > 1:
            raise PartitionError(f"eigenvalue {lam} lies in overlapping cells {hits}")
        cells.append(hits[0])
    sample_vals = [complex(phi(complex(a))) for a in samples]
    values = tuple(sample_vals[c] for c in cells)
    exact = [complex(phi(lam)) for lam in model.spectrum()]
    error = max((abs(e - v) for e, v in zip(exact, values)), default=0.0)
    osc = 0.0
    for i in set(cells):
        pts = [sample_vals[i]] + [e for e, c in zip(exact, cells) if c == i]
        osc = max(osc, max(abs(p - q) for p in pts for q in pts))
    certified = None if eps is None else bool(error <= eps)
    return RiemannSum(model, values, tuple(cells), float(error), float(osc), certified)


def build_model(
    K: Sequence[complex],
    m: Sequence[int | float],
    label: str = "model",
    allocated: Sequence[int] | None = None,
) -> SpectralModel:
    """One block per ``(lambda, m(lambda))``; zero multiplicities are dropped.

    Finite blocks are fully materialized; infinite ones start with
    ``allocated[i]`` coordinates (default none).
    """
    if len(K) != len(m):
        raise ValueError(f"{len(K)} eigenvalues but {len(m)} multiplicities")
    if allocated is not None and len(allocated) != len(K):
        raise ValueError("allocated must align with K")
    blocks = []
    seen: set[complex] = set()
    for i, (lam, mult) in enumerate(zip(K, m)):
        key = canon(lam)
        if key in seen:
            raise DuplicateEigenvalueError(f"eigenvalue {lam} is repeated after rounding to 12 digits")
        seen.add(key)
        mult = _check_mult(mult, allow_zero=True)
        if mult == 0:
            continue
        if is_inf(mult):
            alloc = int(allocated[i]) if allocated is not None else 0
        else:
            alloc = mult if allocated is None else int(allocated[i])
        blocks.append(Block(key, mult, alloc))
    return SpectralModel(blocks, label)


def direct_sum_maps(
    a: SpectralModel, b: SpectralModel, label: str | None = None
) -> tuple[SpectralModel, Callable[[ModelVector], ModelVector], Callable[[ModelVector], ModelVector]]:
    """``a (+) b`` with its two isometric inclusions."""
    blocks = [Block(x.lam, x.mult, x.allocated) for x in a.blocks]
    index = {x.lam: i for i, x in enumerate(blocks)}
    b_place: list[tuple[int, int]] = []  # (target block, coordinate offset)
    for y in b.blocks:
        if y.lam in index:
            t = blocks[index[y.lam]]
            b_place.append((index[y.lam], t.allocated))
            t.mult = t.mult + y.mult
            t.allocated += y.allocated
        else:
            index[y.lam] = len(blocks)
            b_place.append((len(blocks), 0))
            blocks.append(Block(y.lam, y.mult, y.allocated))
    s = SpectralModel(blocks, label or f"{a.label}+{b.label}", max(a.normality_residual, b.normality_residual))

    def left(v: ModelVector) -> ModelVector:
        if v.model is not a:
            raise ModelMismatchError("left inclusion expects a vector of the first summand")
        return ModelVector._raw(s, dict(v.coords))

    def right(v: ModelVector) -> ModelVector:
        if v.model is not b:
            raise ModelMismatchError("right inclusion expects a vector of the second summand")
        return ModelVector._raw(s, {(b_place[bi][0], b_place[bi][1] + j): c for (bi, j), c in v.coords.items()})

    return s, left, right


def direct_sum(a: SpectralModel, b: SpectralModel, label: str | None = None) -> SpectralModel:
    """Merge blocks by eigenvalue, adding multiplicities (INF absorbs)."""
    return direct_sum_maps(a, b, label)[0]


def pseudocompact_witness(
    K_atoms: Sequence[complex],
    K_perfect_net: Callable[[int], Iterable[complex]] | None,
    m: Sequence[int | float],
    k: int,
    label: str | None = None,
) -> SpectralModel:
    """The k-th finite-dimensional approximant of a compact spectrum.

    The first ``k`` isolated points get dimension ``min(k, m)``; each point of
    a ``1/k``-net of the perfect part adds a one-dimensional block.  Net
    points that coincide with earlier blocks enlarge them.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if len(K_atoms) != len(m):
        raise ValueError("K_atoms and m must align")
    mults: dict[complex, int] = {}
    order: list[complex] = []

    def add(lam, d: int) -> None:
        key = canon(lam)
        if key not in mults:
            mults[key] = 0
            order.append(key)
        mults[key] += d

    for lam, mult in list(zip(K_atoms, m))[:k]:
        mult = _check_mult(mult)
        add(lam, int(min(k, mult)))
    if K_perfect_net is not None:
        for z in K_perfect_net(k):
            add(z, 1)
    return build_model(order, [mults[z] for z in order], label or f"witness_{k}")


def allocate_fresh(model: SpectralModel, block: int) -> int:
    """Materialize one new orthonormal coordinate in ``block`` and return its index."""
    b = model.blocks[block]
    if b.finite and b.allocated >= b.mult:
        raise CapacityError(f"block {block} (lambda={b.lam}) already holds all {b.mult} coordinates")
    b.allocated += 1
    return b.allocated - 1


def model_from_matrix(t, tol: float = 1e-8, label: str = "matrix") -> tuple[SpectralModel, np.ndarray, list[tuple[int, int]]]:
    """Diagonalize a normal matrix into a finite model.

    Returns the model, the unitary ``U`` and, for every column of ``U``, the
    coordinate handle it maps to.  Computed eigenvalues within the cluster
    tolerance of each other (transitively) form one block, placed at their
    rounded mean.
    """
    from .linalg import decompose_normal, normality_residual

    dec = decompose_normal(t, tol=tol)
    lam = np.asarray(dec.eigenvalues, dtype=complex)
    n = len(lam)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(lam[i] - lam[j]) <= dec.cluster_tolerance:
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    centers = {r: canon(complex(np.mean(lam[g]))) for r, g in groups.items()}
    keys = list(dict.fromkeys(centers[find(i)] for i in range(n)))
    model = build_model(keys, [len(groups[r]) for r in dict.fromkeys(find(i) for i in range(n))], label)
    handles: list[tuple[int, int]] = []
    used: dict[int, int] = {}
    for i in range(n):
        bi = model.block_index(centers[find(i)])
        handles.append((bi, used.get(bi, 0)))
        used[bi] = used.get(bi, 0) + 1
    model.normality_residual = normality_residual(t)
    return model, dec.unitary, handles


def sorted_spectrum(model: SpectralModel) -> list[complex]:
    return sorted(model.spectrum(), key=sort_key)
