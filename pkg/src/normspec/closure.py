"""Generated subspaces: the reducing span of a set and its join with H_fin.

``dcl_span(B)`` is the smallest closed subspace containing ``B`` and invariant
under ``T`` and ``T*``.  On a model with finitely many blocks it is spanned by
the block components ``E({lambda}) b``, since polynomials in ``z`` separate the
distinct eigenvalues.  A Krylov iteration computes the same space without that
shortcut and serves as the cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BudgetError, ModelMismatchError, RouteMismatchError
from .model import ModelVector, SpectralModel, allocate_fresh, apply_T, apply_Tstar, block_projection

DROP_TOL = 1e-9
ACL_BUDGET = 64


@dataclass(frozen=True)
class Subspace:
    """A finite-dimensional subspace with an orthonormal basis."""

    model: SpectralModel
    basis: tuple[ModelVector, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def project(self, v: ModelVector) -> ModelVector:
        return project(v, self)

    def residual(self, v: ModelVector) -> float:
        """``||v - P v||``."""
        return (v - project(v, self)).norm()

    def contains(self, v: ModelVector, tol: float = 1e-9) -> bool:
        return self.residual(v) <= tol

    def inside(self, other: "Subspace") -> float:
        """Largest residual of this basis off ``other``; zero iff contained."""
        return max((other.residual(b) for b in self.basis), default=0.0)

    def invariance_residual(self) -> float:
        """Largest distance of ``T b`` or ``T* b`` from the subspace."""
        worst = 0.0
        for b in self.basis:
            worst = max(worst, self.residual(apply_T(b)), self.residual(apply_Tstar(b)))
        return worst

    def orthonormality_error(self) -> float:
        worst = 0.0
        for i, b in enumerate(self.basis):
            for j, c in enumerate(self.basis[i:], start=i):
                worst = max(worst, abs(b.inner(c) - (1.0 if i == j else 0.0)))
        return worst


def _common_model(vectors: Sequence[ModelVector], model: SpectralModel | None) -> SpectralModel:
    for v in vectors:
        if model is None:
            model = v.model
        elif v.model is not model:
            raise ModelMismatchError(f"vectors live in different models ({model.label!r}, {v.model.label!r})")
    if model is None:
        raise ValueError("an empty vector list needs an explicit model")
    return model


def project(v: ModelVector, s: Subspace) -> ModelVector:
    """Orthogonal projection ``sum_i <v, b_i> b_i``."""
    if v.model is not s.model:
        raise ModelMismatchError(f"vector of {v.model.label!r} projected onto a subspace of {s.model.label!r}")
    out = v.model.zero()
    for b in s.basis:
        c = v.inner(b)
        if c != 0:
            out = out + c * b
    return out


def _orthonormalize(basis: list[ModelVector], v: ModelVector, drop: float) -> ModelVector | None:
    # classical Gram-Schmidt applied twice
    w = v
    for _ in range(2):
        for b in basis:
            c = w.inner(b)
            if c != 0:
                w = w - c * b
    n = w.norm()
    if n <= drop:
        return None
    return w / n


def span(vectors: Iterable[ModelVector], model: SpectralModel | None = None, drop: float = DROP_TOL) -> Subspace:
    """Orthonormal basis for the span of ``vectors``."""
    vectors = list(vectors)
    model = _common_model(vectors, model)
    basis: list[ModelVector] = []
    for v in vectors:
        q = _orthonormalize(basis, v, drop)
        if q is not None:
            basis.append(q)
    return Subspace(model, tuple(basis))


def spectral_span(B: Sequence[ModelVector], model: SpectralModel | None = None, drop: float = DROP_TOL) -> Subspace:
    """Span of the block components ``E({lambda}) b`` for ``b`` in ``B``."""
    model = _common_model(B, model)
    parts = [block_projection(b, bi) for b in B for bi in b.blocks()]
    return span(parts, model, drop)


def krylov_span(B: Sequence[ModelVector], model: SpectralModel | None = None, drop: float = DROP_TOL) -> Subspace:
    """Close ``B`` under ``T`` and ``T*`` by repeated application and Gram-Schmidt."""
    model = _common_model(B, model)
    basis: list[ModelVector] = []
    queue = list(B)
    while queue:
        q = _orthonormalize(basis, queue.pop(0), drop)
        if q is None:
            continue
        basis.append(q)
        queue.append(apply_T(q))
        queue.append(apply_Tstar(q))
    return Subspace(model, tuple(basis))


def dcl_span(
    B: Sequence[ModelVector],
    model: SpectralModel | None = None,
    verify: bool = False,
    agree_tol: float = 1e-8,
) -> Subspace:
    """The reducing subspace generated by ``B``.

    With ``verify`` the Krylov closure is computed as well and the two bases
    must span the same space up to ``agree_tol``.
    """
    s = spectral_span(B, model)
    if verify:
        k = krylov_span(B, s.model)
        gap = max(s.inside(k), k.inside(s))
        if gap > agree_tol or s.dim != k.dim:
            raise RouteMismatchError(f"closure routes disagree: dims {s.dim} vs {k.dim}, residual {gap:.3e}")
    return s


def h_fin(model: SpectralModel, budget: int = ACL_BUDGET) -> Subspace:
    """Coordinate basis of every finite-multiplicity block.

    Finite blocks whose coordinates are not all materialized yet are
    completed in place.
    """
    basis = []
    for bi in model.fin_blocks():
        b = model.blocks[bi]
        if b.mult > budget:
            raise BudgetError(f"finite block at {b.lam} has dimension {b.mult} > budget {budget}")
        while b.allocated < b.mult:
            allocate_fresh(model, bi)
        basis.extend(model.basis_vector(bi, j) for j in range(b.allocated))
    return Subspace(model, tuple(basis))


def acl_span(B: Sequence[ModelVector], model: SpectralModel | None = None, budget: int = ACL_BUDGET) -> Subspace:
    """``dcl_span(B)`` joined with H_fin."""
    model = _common_model(B, model)
    fin = h_fin(model, budget)
    fin_blocks = set(model.fin_blocks())
    parts = [block_projection(b, bi) for b in B for bi in b.blocks() if bi not in fin_blocks]
    rest = span(parts, model)
    return Subspace(model, fin.basis + rest.basis)


def is_acl_closed(B: Sequence[ModelVector], model: SpectralModel | None = None, tol: float = 1e-9) -> bool:
    """True iff ``acl_span(B)`` equals the plain span of ``B``."""
    model = _common_model(B, model)
    return acl_span(B, model).inside(span(B, model)) <= tol
