"""Comparing spectral data: equivalence, alignment, axiom residuals and limits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._util import canon, sort_key
from .errors import DivergenceError, NoAlignmentError, RealizationError
from .matching import bottleneck_assignment, hopcroft_karp
from .model import INF, SpectralModel, is_inf, spectrum_distance
from .theory import TheoryAtom, TheoryDescriptor
from .typespace import TypeDescriptor, phi1


def _points(K) -> np.ndarray:
    if isinstance(K, SpectralModel):
        K = K.spectrum()
    return np.array([complex(z) for z in K], dtype=complex)


def hausdorff(K1, K2) -> float:
    """Two-sided Hausdorff distance between finite point sets."""
    a, b = _points(K1), _points(K2)
    if a.size == 0 or b.size == 0:
        raise ValueError("Hausdorff distance needs two nonempty sets")
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def _pair_costs(A: SpectralModel, B: SpectralModel) -> np.ndarray:
    return np.abs(_points(A)[:, None] - _points(B)[None, :])


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    distance: float  # bottleneck value over multiplicity-respecting block matchings
    pairs: tuple[tuple[int, int], ...]
    reason: str = ""


def spectrally_equivalent(A: SpectralModel, B: SpectralModel, tol: float = 0.0) -> EquivalenceReport:
    """Blocks match one-to-one within ``tol`` with equal multiplicities."""
    na, nb = len(A.blocks), len(B.blocks)
    if na != nb:
        return EquivalenceReport(False, math.inf, (), f"{na} blocks vs {nb} blocks")
    if na == 0:
        return EquivalenceReport(True, 0.0, ())
    cost = _pair_costs(A, B)
    for i, a in enumerate(A.blocks):
        for j, b in enumerate(B.blocks):
            if a.mult != b.mult:
                cost[i, j] = math.inf
    value, match = bottleneck_assignment(cost)
    if not match:
        return EquivalenceReport(False, math.inf, (), "no multiplicity-preserving matching")
    pairs = tuple((i, j) for i, j in enumerate(match))
    ok = value <= tol
    return EquivalenceReport(ok, value, pairs, "" if ok else f"bottleneck distance {value:.3e} exceeds {tol:.3e}")


@dataclass(frozen=True)
class AlignmentCertificate:
    """A coordinate assignment between two models and its operator-norm residual.

    ``unit_pairs`` maps finite coordinates ``(block, index)`` of ``A`` to
    finite coordinates of ``B``.  ``absorbed_a`` / ``absorbed_b`` send finite
    coordinates into an infinite block of the other side, and
    ``inf_pairs`` pairs every infinite block with an infinite block of the
    other side.
    """

    residual: float
    unit_pairs: tuple = ()
    absorbed_a: tuple = ()
    absorbed_b: tuple = ()
    inf_pairs_a: tuple = ()
    inf_pairs_b: tuple = ()

    def max_shift(self, A: SpectralModel, B: SpectralModel) -> float:
        """Largest eigenvalue displacement of the assignment, recomputed from the models."""
        la = lambda h: A.blocks[h[0]].lam
        lb = lambda h: B.blocks[h[0]].lam
        shifts = [abs(la(x) - lb(y)) for x, y in self.unit_pairs]
        shifts += [abs(la(x) - B.blocks[j].lam) for x, j in self.absorbed_a]
        shifts += [abs(A.blocks[i].lam - lb(y)) for i, y in self.absorbed_b]
        shifts += [abs(A.blocks[i].lam - B.blocks[j].lam) for i, j in self.inf_pairs_a]
        shifts += [abs(A.blocks[i].lam - B.blocks[j].lam) for i, j in self.inf_pairs_b]
        return max(shifts, default=0.0)


def _units(M: SpectralModel) -> list[tuple[int, int]]:
    return [(bi, j) for bi, b in enumerate(M.blocks) if b.finite for j in range(b.mult)]


def _try_align(A: SpectralModel, B: SpectralModel, cost: np.ndarray, t: float):
    inf_a = [i for i, b in enumerate(A.blocks) if not b.finite]
    inf_b = [j for j, b in enumerate(B.blocks) if not b.finite]
    pairs_a, pairs_b = [], []
    for i in inf_a:
        near = [j for j in inf_b if cost[i, j] <= t]
        if not near:
            return None
        pairs_a.append((i, min(near, key=lambda j: (cost[i, j], j))))
    for j in inf_b:
        near = [i for i in inf_a if cost[i, j] <= t]
        if not near:
            return None
        pairs_b.append((min(near, key=lambda i: (cost[i, j], i)), j))

    ua, ub = _units(A), _units(B)
    # an infinite neighbour within t may absorb a finite coordinate
    sink_a = [min((j for j in inf_b if cost[x[0], j] <= t), default=None, key=lambda j: (cost[x[0], j], j)) for x in ua]
    sink_b = [min((i for i in inf_a if cost[i, y[0]] <= t), default=None, key=lambda i: (cost[i, y[0]], i)) for y in ub]
    free_a = [k for k, s in enumerate(sink_a) if s is not None]
    free_b = [k for k, s in enumerate(sink_b) if s is not None]
    # perfect matching on L = ua + dummies(free_b) + pads, R = ub + dummies(free_a) + pads
    nl = len(ua) + len(free_b)
    nr = len(ub) + len(free_a)
    pad_l = max(0, nr - nl)
    pad_r = max(0, nl - nr)
    size_l, size_r = nl + pad_l, nr + pad_r
    dummy_a = {k: len(ub) + r for r, k in enumerate(free_a)}  # right-side dummy of a free A unit
    adj: list[list[int]] = []
    for k, x in enumerate(ua):
        row = [l for l, y in enumerate(ub) if cost[x[0], y[0]] <= t]
        if k in dummy_a:
            row.append(dummy_a[k])
        adj.append(row)
    a_dummies = list(dummy_a.values())
    b_pads = list(range(len(ub) + len(free_a), size_r))
    for l in free_b:
        adj.append([l] + a_dummies + b_pads)
    for _ in range(pad_l):
        adj.append(list(a_dummies))
    size, match = hopcroft_karp(adj, size_r)
    if size != size_l:
        return None
    unit_pairs, absorbed_a, absorbed_b = [], [], []
    matched_b = set()
    for k, x in enumerate(ua):
        r = match[k]
        if r < len(ub):
            unit_pairs.append((x, ub[r]))
            matched_b.add(r)
        else:
            absorbed_a.append((x, sink_a[k]))
    for l in free_b:
        if l not in matched_b:
            absorbed_b.append((sink_b[l], ub[l]))
    return AlignmentCertificate(t, tuple(unit_pairs), tuple(absorbed_a), tuple(absorbed_b), tuple(pairs_a), tuple(pairs_b))


def aue_align(A: SpectralModel, B: SpectralModel) -> AlignmentCertificate:
    """Bottleneck alignment of two diagonal models.

    The residual is the smallest threshold ``t`` at which every coordinate of
    either model can be sent to a coordinate of the other with eigenvalue
    shift at most ``t``.  Infinite blocks absorb any number of finite
    coordinates but must themselves face an infinite block within ``t``.
    """
    if not A.blocks or not B.blocks:
        if not A.blocks and not B.blocks:
            return AlignmentCertificate(0.0)
        raise NoAlignmentError("one model is zero-dimensional and the other is not")
    cost = _pair_costs(A, B)
    candidates = np.unique(np.concatenate([[0.0], cost.ravel()]))
    lo, hi = 0, len(candidates) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        cert = _try_align(A, B, cost, float(candidates[mid]))
        if cert is not None:
            best = cert
            hi = mid - 1
        else:
            lo = mid + 1
    if best is None:
        raise NoAlignmentError(
            f"no alignment: dimensions {A.dimension()} and {B.dimension()} cannot be matched",
            bound=_partial_bound(A, B, cost),
        )
    return best


def _partial_bound(A: SpectralModel, B: SpectralModel, cost: np.ndarray) -> float | None:
    # bottleneck value for saturating the smaller finite side
    ua, ub = _units(A), _units(B)
    if not ua or not ub:
        return None
    c = np.array([[cost[x[0], y[0]] for y in ub] for x in ua])
    if c.shape[0] > c.shape[1]:
        c = c.T
    value, _ = bottleneck_assignment(c)
    return value


@dataclass(frozen=True)
class AxiomReport:
    normality: float
    eigen: tuple[tuple[complex, float], ...]
    probes: tuple[tuple[complex, float], ...]
    multiplicity: tuple[tuple[complex, object, object, float], ...]
    max_residual: float
    holds: bool


def _probe_grid(points: Sequence[complex], step: float, limit: int = 64) -> list[complex]:
    xs = [z.real for z in points]
    ys = [z.imag for z in points]
    x0, x1, y0, y1 = min(xs) - step, max(xs) + step, min(ys) - step, max(ys) + step
    nx = min(limit, max(2, math.ceil((x1 - x0) / step) + 1))
    ny = min(limit, max(2, math.ceil((y1 - y0) / step) + 1))
    return [complex(x, y) for x in np.linspace(x0, x1, nx) for y in np.linspace(y0, y1, ny)]


def axiom_residuals(
    M: SpectralModel,
    theory: TheoryDescriptor,
    resolution: float,
    probes: Iterable[complex] = (),
) -> AxiomReport:
    """Closed-form residuals of the axioms for spectrum K with multiplicities m.

    * normality of the underlying operator,
    * ``dist(lambda, sigma(M))`` for each point of K and each point of a
      ``resolution``-net of the perfect part,
    * ``max(0, dist(z, K) - dist(z, sigma(M)))`` at probe points,
    * 1.0 for every isolated point whose multiplicity near it differs.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    eigen = [(a.lam, spectrum_distance(M, a.lam)) for a in theory.atoms]
    eigen += [(z, spectrum_distance(M, z)) for z in theory.perfect_net(resolution)]
    pts = list(M.spectrum()) + [complex(z) for z in probes]
    support = pts + [a.lam for a in theory.atoms] + theory.perfect_net(resolution)
    if support:
        pts += _probe_grid(support, resolution)
    seen, probe_vals = set(), []
    for z in pts:
        key = canon(z)
        if key in seen:
            continue
        seen.add(key)
        probe_vals.append((key, max(0.0, theory.distance(key) - spectrum_distance(M, key))))
    probe_vals.sort(key=lambda kv: sort_key(kv[0]))
    mult = []
    for a in theory.isolated():
        found = sum((b.mult for b in M.blocks if abs(b.lam - a.lam) <= resolution), 0)
        mult.append((a.lam, a.mult, found, 0.0 if found == a.mult else 1.0))
    values = [M.normality_residual] + [v for _, v in eigen] + [v for _, v in probe_vals] + [r for *_, r in mult]
    worst = max(values)
    return AxiomReport(M.normality_residual, tuple(eigen), tuple(probe_vals), tuple(mult), worst, worst <= resolution)


def _stabilized(values: Sequence[float]) -> float:
    if any(is_inf(v) for v in values):
        return INF
    if all(v == values[0] for v in values):
        return values[0]
    if all(b >= a for a, b in zip(values, values[1:])):
        return INF
    raise DivergenceError(f"ball multiplicities oscillate along the tail: {list(values)}", witness=list(values))


def limit_theory(
    seq: Sequence[SpectralModel],
    radii: Sequence[float],
    tol: float | None = None,
) -> TheoryDescriptor:
    """Spectrum and isolated multiplicities of the limit of a convergent sequence of models.

    The tail is the last third of the sequence.  Its spectra must lie within
    ``tol`` (default three times the finest radius) of each other in
    Hausdorff distance.  Candidate limit points are the eigenvalues of the
    tail, taken in order of their largest distance to a tail spectrum and
    thinned at half the finest radius, so the result does not depend on the
    order of the tail.  A point is isolated when no other representative lies
    within 1.5 radii.  The multiplicity of an isolated point is the smallest,
    over the radii, of the stabilized tail count of eigenvalues in the open
    ball.
    """
    if not seq:
        raise ValueError("empty sequence")
    if not radii or min(radii) <= 0:
        raise ValueError("radii must be positive")
    r = float(min(radii))
    tol = 3.0 * r if tol is None else tol
    start = len(seq) - max(1, math.ceil(len(seq) / 3))
    tail = list(seq[start:])
    if any(not M.blocks for M in tail):
        raise ValueError("a tail model has empty spectrum")
    worst, where = 0.0, (start, start)
    for i, M in enumerate(tail):
        for j in range(i + 1, len(tail)):
            g = hausdorff(M, tail[j])
            if g > worst:
                worst, where = g, (start + i, start + j)
    if worst > tol:
        raise DivergenceError(
            f"tail spectra oscillate: Hausdorff gap {worst:.3e} > {tol:.3e}",
            witness={"indices": list(where), "gap": worst},
        )
    cands = sorted({lam for M in tail for lam in M.spectrum()}, key=sort_key)
    c = np.array(cands, dtype=complex)
    far = np.max([np.abs(c[:, None] - _points(M)[None, :]).min(axis=1) for M in tail], axis=0)
    stability = dict(zip(cands, far.tolist()))
    reps: list[complex] = []
    for lam in sorted(stability, key=lambda z: (stability[z], sort_key(z))):
        if all(abs(lam - q) > r / 2 for q in reps):
            reps.append(lam)
    atoms = []
    for lam in reps:
        isolated = all(abs(lam - q) > 1.5 * r for q in reps if q != lam)
        if not isolated:
            atoms.append(TheoryAtom(lam, None, False))
            continue
        m = INF
        for rho in radii:
            counts = [sum((b.mult for b in M.blocks if abs(b.lam - lam) < rho), 0) for M in tail]
            m = min(m, _stabilized(counts))
        atoms.append(TheoryAtom(lam, m, True))
    return TheoryDescriptor(tuple(atoms))


@dataclass(frozen=True)
class PerturbationReport:
    bound: float
    threshold: float
    ell2: float
    pairs: tuple[tuple[complex, complex], ...]
    unmatched_p: tuple[complex, ...] = ()
    unmatched_q: tuple[complex, ...] = ()


def _atoms_in_model(p: TypeDescriptor, model: SpectralModel) -> tuple[list[complex], np.ndarray]:
    mu = phi1(p)
    pts, masses = [], []
    for lam, m in mu.items():
        if model.block_index(lam) is None:
            raise RealizationError(f"atom {lam} is not an eigenvalue of {model.label!r}")
        pts.append(lam)
        masses.append(max(m.real, 0.0))
    return pts, np.array(masses)


def _partial_assignment(sp: np.ndarray, sq: np.ndarray, allowed: np.ndarray) -> tuple[float, list[tuple[int, int]]]:
    # min over partial injections of sum over matched (sp-sq)^2 plus unmatched squared masses
    n, m = len(sp), len(sq)
    big = 1e6 + 4.0 * (float(np.sum(sp**2)) + float(np.sum(sq**2)) + 1.0)
    c = np.full((n + m, m + n), big)
    pair = (sp[:, None] - sq[None, :]) ** 2
    c[:n, :m] = np.where(allowed, pair, big)
    for i in range(n):
        c[i, m + i] = sp[i] ** 2
    for j in range(m):
        c[n + j, j] = sq[j] ** 2
    c[n:, m:] = 0.0
    rows, cols = linear_sum_assignment(c)
    pairs = [(i, j) for i, j in zip(rows, cols) if i < n and j < m]
    value = sum(pair[i, j] for i, j in pairs)
    matched_i = {i for i, _ in pairs}
    matched_j = {j for _, j in pairs}
    value += sum(sp[i] ** 2 for i in range(n) if i not in matched_i)
    value += sum(sq[j] ** 2 for j in range(m) if j not in matched_j)
    return float(value), pairs


def perturbation_distance(p: TypeDescriptor, q: TypeDescriptor, model: SpectralModel) -> PerturbationReport:
    """Upper bound on the perturbation distance between two 1-types over the empty set.

    Atoms of one type are partially matched to atoms of the other.  The
    bound for a matching is the larger of its worst eigenvalue shift and the
    l2 distance between the square-root masses, unmatched atoms counting
    in full.  The minimum is taken over every shift threshold.
    """
    xp, mp = _atoms_in_model(p, model)
    xq, mq = _atoms_in_model(q, model)
    sp, sq = np.sqrt(mp), np.sqrt(mq)
    if not xp and not xq:
        return PerturbationReport(0.0, 0.0, 0.0, ())
    dist = np.abs(np.array(xp, dtype=complex)[:, None] - np.array(xq, dtype=complex)[None, :]) if xp and xq else np.zeros((len(xp), len(xq)))
    best = None
    for t in np.unique(np.concatenate([[0.0], dist.ravel()])):
        if best is not None and t >= best[0]:
            break
        v, pairs = _partial_assignment(sp, sq, dist <= t)
        ell2 = math.sqrt(v)
        shift = max((dist[i, j] for i, j in pairs), default=0.0)
        bound = max(shift, ell2)
        if best is None or bound < best[0]:
            best = (bound, float(shift), ell2, pairs)
    bound, shift, ell2, pairs = best
    mi = {i for i, _ in pairs}
    mj = {j for _, j in pairs}
    return PerturbationReport(
        float(bound),
        shift,
        ell2,
        tuple((xp[i], xq[j]) for i, j in pairs),
        tuple(x for i, x in enumerate(xp) if i not in mi),
        tuple(x for j, x in enumerate(xq) if j not in mj),
    )
