"""Finitely supported complex measures on the plane.

Atoms are identified after rounding their location to 12 decimal digits.
The type-space metric on positive measures is the finest-partition
Hellinger sum; :func:`partition_sup_oracle` recomputes it by brute force over
every set partition of the combined support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._util import canon, sort_key
from .errors import PositivityError, SizeError

MAX_ORACLE_ATOMS = 10


class AtomicMeasure:
    """A finite sum of point masses ``sum_k m_k delta_{z_k}`` with complex ``m_k``."""

    __slots__ = ("_atoms",)

    def __init__(self, atoms: Mapping[complex, complex] | Iterable[tuple[complex, complex]] | None = None):
        acc: dict[complex, complex] = {}
        if atoms is not None:
            items = atoms.items() if isinstance(atoms, Mapping) else atoms
            for point, mass in items:
                key = canon(point)
                acc[key] = acc.get(key, 0j) + complex(mass)
        self._atoms = {k: v for k, v in acc.items() if v != 0}

    @classmethod
    def dirac(cls, point, mass=1.0) -> "AtomicMeasure":
        return cls({point: mass})

    def items(self) -> list[tuple[complex, complex]]:
        return sorted(self._atoms.items(), key=lambda kv: sort_key(kv[0]))

    def support(self) -> list[complex]:
        return sorted(self._atoms, key=sort_key)

    def mass(self, point) -> complex:
        return self._atoms.get(canon(point), 0j)

    def total(self) -> complex:
        return sum(self._atoms.values(), 0j)

    def measure_of(self, region) -> complex:
        """Mass of any set-like object supporting ``in``."""
        return sum((m for z, m in self._atoms.items() if z in region), 0j)

    def __len__(self) -> int:
        return len(self._atoms)

    def __bool__(self) -> bool:
        return bool(self._atoms)

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return AtomicMeasure(list(self._atoms.items()) + list(other._atoms.items()))

    def __neg__(self) -> "AtomicMeasure":
        return AtomicMeasure({z: -m for z, m in self._atoms.items()})

    def __sub__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return self + (-other)

    def __mul__(self, c) -> "AtomicMeasure":
        return AtomicMeasure({z: c * m for z, m in self._atoms.items()})

    __rmul__ = __mul__

    def conj(self) -> "AtomicMeasure":
        return AtomicMeasure({z: m.conjugate() for z, m in self._atoms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, AtomicMeasure):
            return NotImplemented
        return self._atoms == other._atoms

    def __hash__(self):
        return hash(tuple(self.items()))

    def close_to(self, other: "AtomicMeasure", tol: float = 1e-9) -> bool:
        """Atomwise comparison at absolute tolerance ``tol``."""
        keys = set(self._atoms) | set(other._atoms)
        return all(abs(self.mass(z) - other.mass(z)) <= tol for z in keys)

    def is_positive(self, tol: float = 0.0) -> bool:
        return all(abs(m.imag) <= tol and m.real >= -tol for m in self._atoms.values())

    def __repr__(self) -> str:
        body = " + ".join(f"{m:.6g}*delta({z:.6g})" for z, m in self.items())
        return f"AtomicMeasure({body or '0'})"


def total_variation(mu: AtomicMeasure) -> float:
    return float(sum(abs(m) for _, m in mu.items()))


def _positive_masses(mu: AtomicMeasure, points: Sequence[complex]) -> np.ndarray:
    if not mu.is_positive(tol=1e-12):
        raise PositivityError(f"measure is not positive: {mu!r}")
    return np.array([max(mu.mass(z).real, 0.0) for z in points])


def hellinger_sq(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    """``sum_z (sqrt(mu{z}) - sqrt(nu{z}))**2`` over the union of supports."""
    points = sorted(set(mu.support()) | set(nu.support()), key=sort_key)
    p = _positive_masses(mu, points)
    q = _positive_masses(nu, points)
    return float(np.sum((np.sqrt(p) - np.sqrt(q)) ** 2))


def hellinger(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    return math.sqrt(hellinger_sq(mu, nu))


@lru_cache(maxsize=None)
def _rgs_table(n: int) -> np.ndarray:
    """Every restricted growth string of length ``n``, one per row."""
    if n <= 1:
        return np.zeros((1, n), dtype=np.int8)
    rows: list[tuple[int, ...]] = []
    a = [0] * n

    def grow(i: int, top: int) -> None:
        # top = 1 + largest label used so far
        if i == n:
            rows.append(tuple(a))
            return
        for v in range(top + 1):
            a[i] = v
            grow(i + 1, max(top, v + 1))

    grow(1, 1)
    return np.array(rows, dtype=np.int8)


def set_partitions(items: Sequence) -> Iterable[list[list]]:
    """Yield every set partition of ``items`` (Bell-number many)."""
    for row in _rgs_table(len(items)):
        cells: dict[int, list] = {}
        for label, item in zip(row, items):
            cells.setdefault(int(label), []).append(item)
        yield [cells[k] for k in sorted(cells)]


def partition_sum(mu: AtomicMeasure, nu: AtomicMeasure, cells: Iterable[Iterable[complex]]) -> float:
    """``sum_cells |sqrt(mu(cell)) - sqrt(nu(cell))|**2`` for an explicit partition."""
    total = 0.0
    for cell in cells:
        cell = [canon(z) for z in cell]
        a = sum((mu.mass(z) for z in cell), 0j)
        b = sum((nu.mass(z) for z in cell), 0j)
        total += (math.sqrt(max(a.real, 0.0)) - math.sqrt(max(b.real, 0.0))) ** 2
    return total


def partition_sup_oracle(mu: AtomicMeasure, nu: AtomicMeasure, max_atoms: int = MAX_ORACLE_ATOMS) -> float:
    """Maximize the partition sum over all set partitions of the combined support."""
    points = sorted(set(mu.support()) | set(nu.support()), key=sort_key)
    n = len(points)
    if n > max_atoms:
        raise SizeError(f"combined support has {n} atoms; the oracle enumerates at most {max_atoms}")
    if n == 0:
        return 0.0
    p = _positive_masses(mu, points)
    q = _positive_masses(nu, points)
    table = _rgs_table(n)
    cell_p = np.zeros((table.shape[0], n))
    cell_q = np.zeros((table.shape[0], n))
    for c in range(n):
        member = table == c
        cell_p[:, c] = member @ p
        cell_q[:, c] = member @ q
    values = np.sum((np.sqrt(cell_p) - np.sqrt(cell_q)) ** 2, axis=1)
    return float(values.max())


def abs_continuous(mu: AtomicMeasure, nu: AtomicMeasure) -> bool:
    """True iff every atom charged by ``mu`` is charged by ``nu``."""
    return all(nu.mass(z) != 0 for z in mu.support())


def dyadic_square(level: int, point) -> tuple[int, int, int]:
    """Index ``(level, k, l)`` of the half-open dyadic square containing ``point``."""
    z = complex(point)
    scale = 2.0**level
    return (level, math.floor(z.real * scale), math.floor(z.imag * scale))


def in_dyadic_square(index: tuple[int, int, int], point) -> bool:
    return dyadic_square(index[0], point) == index


@dataclass(frozen=True)
class WeakStarReport:
    converged: bool
    max_residual: float
    residuals: dict = field(default_factory=dict)


def weakstar_converged(seq: Sequence[AtomicMeasure], limit: AtomicMeasure, level: int, tol: float) -> WeakStarReport:
    """Compare the tail element with ``limit`` on dyadic squares of resolution 1..level."""
    if not 1 <= level <= 8:
        raise ValueError("level must lie in 1..8")
    if not seq:
        raise ValueError("empty sequence")
    points = set(limit.support())
    for mu in seq:
        points.update(mu.support())
    tail = seq[-1]
    residuals = {}
    for n in range(1, level + 1):
        squares = sorted({dyadic_square(n, z) for z in points})
        for sq in squares:
            a = sum((m for z, m in tail.items() if in_dyadic_square(sq, z)), 0j)
            b = sum((m for z, m in limit.items() if in_dyadic_square(sq, z)), 0j)
            residuals[sq] = abs(a - b)
    worst = max(residuals.values(), default=0.0)
    return WeakStarReport(worst <= tol, float(worst), residuals)
