"""Descriptors of a compact spectrum with multiplicities on its isolated points."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._util import canon, sort_key
from .model import INF, SpectralModel, _check_mult, is_inf

Box = tuple[float, float, float, float]


@dataclass(frozen=True)
class TheoryAtom:
    lam: complex
    mult: int | float | None
    isolated: bool

    def __post_init__(self):
        object.__setattr__(self, "lam", canon(self.lam))
        if self.isolated:
            if self.mult is None:
                raise ValueError(f"isolated point {self.lam} needs a multiplicity")
            object.__setattr__(self, "mult", _check_mult(self.mult))
        elif self.mult is not None:
            raise ValueError(f"accumulation point {self.lam} cannot carry a multiplicity")


def _box_distance(z: complex, box: Box) -> float:
    x0, x1, y0, y1 = box
    dx = max(x0 - z.real, 0.0, z.real - x1)
    dy = max(y0 - z.imag, 0.0, z.imag - y1)
    return math.hypot(dx, dy)


@dataclass(frozen=True)
class TheoryDescriptor:
    """Finitely many atoms plus closed rectangles declared to be perfect spectrum.

    A box may degenerate to a segment but not to a single point.
    """

    atoms: tuple[TheoryAtom, ...] = ()
    perfect: tuple[Box, ...] = ()

    def __post_init__(self):
        atoms = tuple(sorted(self.atoms, key=lambda a: sort_key(a.lam)))
        boxes = tuple(tuple(float(t) for t in b) for b in self.perfect)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "perfect", boxes)
        seen = set()
        for a in atoms:
            if a.lam in seen:
                raise ValueError(f"point {a.lam} listed twice")
            seen.add(a.lam)
        for x0, x1, y0, y1 in boxes:
            if x0 > x1 or y0 > y1 or (x0 == x1 and y0 == y1):
                raise ValueError(f"perfect box {(x0, x1, y0, y1)} is empty or a single point")
        for a in atoms:
            if a.isolated and any(_box_distance(a.lam, b) == 0.0 for b in boxes):
                raise ValueError(f"isolated point {a.lam} lies on the perfect part")

    @classmethod
    def from_model(cls, model: SpectralModel) -> "TheoryDescriptor":
        """Every block becomes an isolated point with its multiplicity."""
        return cls(tuple(TheoryAtom(b.lam, b.mult, True) for b in model.blocks))

    @classmethod
    def finite(cls, K: Sequence[complex], m: Sequence[int | float]) -> "TheoryDescriptor":
        return cls(tuple(TheoryAtom(lam, mult, True) for lam, mult in zip(K, m)))

    def isolated(self) -> list[TheoryAtom]:
        return [a for a in self.atoms if a.isolated]

    def isolated_points(self) -> set[complex]:
        return {a.lam for a in self.atoms if a.isolated}

    def is_finite(self) -> bool:
        return not self.perfect and all(a.isolated for a in self.atoms)

    def distance(self, z) -> float:
        """Distance from ``z`` to the described set K."""
        z = complex(z)
        d = min((abs(z - a.lam) for a in self.atoms), default=math.inf)
        return min([d] + [_box_distance(z, b) for b in self.perfect])

    def contains(self, z, tol: float = 1e-9) -> bool:
        return self.distance(z) <= tol

    def perfect_net(self, r: float) -> list[complex]:
        """Grid points covering every box to within ``r``."""
        if r <= 0:
            raise ValueError("net radius must be positive")
        pts = []
        for x0, x1, y0, y1 in self.perfect:
            nx = max(1, math.ceil((x1 - x0) / r)) + 1
            ny = max(1, math.ceil((y1 - y0) / r)) + 1
            xs = np.linspace(x0, x1, nx) if x1 > x0 else np.array([x0])
            ys = np.linspace(y0, y1, ny) if y1 > y0 else np.array([y0])
            pts.extend(complex(x, y) for x in xs for y in ys)
        return sorted({canon(z) for z in pts}, key=sort_key)

    def multiplicity(self, lam) -> int | float | None:
        lam = canon(lam)
        for a in self.atoms:
            if a.lam == lam:
                return a.mult
        return None


def theory_atoms(entries: Iterable[tuple[complex, int | float | None, bool]]) -> tuple[TheoryAtom, ...]:
    return tuple(TheoryAtom(lam, mult, iso) for lam, mult, iso in entries)


__all__ = ["INF", "TheoryAtom", "TheoryDescriptor", "theory_atoms", "is_inf"]
