"""Forking independence by projections, free extensions and Morley sequences.

``a`` is independent from ``C`` over ``B`` when projecting ``a`` onto the
algebraic closure of ``B`` gives the same vector as projecting onto the
algebraic closure of ``B`` together with ``C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .closure import acl_span, project
from .errors import ModelMismatchError, PreconditionError
from .model import ModelVector, SpectralModel, allocate_fresh

INDEP_TOL = 1e-8


@dataclass(frozen=True)
class IndependenceReport:
    independent: bool
    witnesses: tuple[float, ...]
    tol: float


def _model_of(*groups: Sequence[ModelVector]) -> SpectralModel:
    model = None
    for g in groups:
        for v in g:
            if model is None:
                model = v.model
            elif v.model is not model:
                raise ModelMismatchError("independence needs every vector in one model")
    if model is None:
        raise ValueError("no vectors given")
    return model


def indep(
    A: Sequence[ModelVector],
    B: Sequence[ModelVector],
    C: Sequence[ModelVector],
    tol: float = INDEP_TOL,
    model: SpectralModel | None = None,
) -> IndependenceReport:
    """Compare ``P_<B>(a)`` with ``P_<B u C>(a)`` for every ``a`` in ``A``."""
    model = model or _model_of(A, B, C)
    sb = acl_span(list(B), model)
    sbc = acl_span(list(B) + list(C), model)
    w = tuple((project(a, sbc) - project(a, sb)).norm() for a in A)
    return IndependenceReport(all(x <= tol for x in w), w, tol)


def free_extension(
    a: ModelVector,
    B: Sequence[ModelVector],
    C: Sequence[ModelVector] = (),
    label: str | None = None,
) -> tuple[SpectralModel, ModelVector]:
    """Realize the type of ``a`` over ``B`` independently from ``C``.

    The part of ``a`` off the algebraic closure of ``B`` is copied onto fresh
    coordinates of the same blocks in a copy of the model.  Vectors of the
    original model carry over with ``new_model.embed``.
    """
    model = _model_of([a], B, C)
    s = acl_span(list(B), model)
    base = project(a, s)
    res = a - base
    if not res.coords:
        return model, a
    for bi in res.blocks():
        if model.blocks[bi].finite:
            raise PreconditionError(f"residual charges the finite block {bi}; parameters are not algebraically closed")
    new = model.copy(label or f"{model.label}'")
    coords = {}
    for (bi, j), c in sorted(res.coords.items()):
        coords[(bi, allocate_fresh(new, bi))] = c
    return new, new.embed(base) + new.vector(coords)


def morley_sequence(a: ModelVector, B: Sequence[ModelVector], length: int) -> list[ModelVector]:
    """``a`` followed by successive free extensions over ``B`` and the earlier terms.

    Every term is returned inside the last model of the chain.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    model = a.model
    seq = [a]
    for _ in range(length - 1):
        new, nxt = free_extension(model.embed(a), [model.embed(b) for b in B], [model.embed(x) for x in seq])
        if new is not model:
            seq = [new.embed(x) for x in seq]
            model = new
        seq.append(nxt)
    return [model.embed(x) for x in seq]


def canonical_base_estimate(a: ModelVector, B: Sequence[ModelVector], m: int) -> tuple[ModelVector, float]:
    """Cesàro mean of a Morley sequence of length ``m`` and its distance to ``P_<B>(a)``.

    The residuals of the terms are orthogonal copies of ``a - P_<B>(a)``,
    so the distance is ``||a - P_<B>(a)|| / sqrt(m)``.
    """
    seq = morley_sequence(a, B, m)
    model = seq[0].model
    mean = model.zero()
    for x in seq:
        mean = mean + x
    mean = mean / m
    target = project(model.embed(a), acl_span([model.embed(b) for b in B], model))
    return mean, (mean - target).norm()


def cesaro_bound(a: ModelVector, B: Sequence[ModelVector], m: int) -> float:
    """``||a - P_<B>(a)|| / sqrt(m)`` computed in the model of ``a``."""
    s = acl_span(list(B), a.model)
    return (a - project(a, s)).norm() / math.sqrt(m)


@dataclass(frozen=True)
class LocalCharacterWitness:
    prefix: int  # B_eps is B[:prefix]
    a_prime: ModelVector
    distance: float
    report: IndependenceReport


def local_character_witness(
    a: ModelVector, B: Sequence[ModelVector], eps: float, tol: float = INDEP_TOL
) -> LocalCharacterWitness:
    """Shortest prefix ``B_eps`` of ``B`` and ``a'`` within ``eps`` of ``a`` with ``a'`` independent from ``B`` over ``B_eps``.

    ``a' = P_<B_eps>(a) + (a - P_<B>(a))``, so ``||a - a'||`` is the gap
    between the two projections of ``a``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    model = _model_of([a], B)
    full = project(a, acl_span(list(B), model))
    res = a - full
    for k in range(len(B) + 1):
        part = project(a, acl_span(list(B[:k]), model))
        gap = (full - part).norm()
        if gap < eps:
            a2 = part + res
            return LocalCharacterWitness(k, a2, (a - a2).norm(), indep([a2], B[:k], B, tol, model))
    raise AssertionError("the full parameter list always qualifies")
