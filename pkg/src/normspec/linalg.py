"""Dense complex linear algebra for numeric normal matrices.

The eigensolver is a cyclic complex Jacobi method; normal matrices are
diagonalized through their commuting Hermitian parts.  Output ordering is
deterministic: eigenvalues ascend lexicographically by (real, imag) after
rounding to 12 decimal places.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, NotNormalError, PreconditionError

MAX_SWEEPS = 30
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpectralDecomposition:
    """``T = U diag(eigenvalues) U*`` with ``U`` unitary."""

    eigenvalues: np.ndarray
    unitary: np.ndarray
    cluster_tolerance: float = 0.0

    def reconstruct(self) -> np.ndarray:
        u = self.unitary
        return (u * self.eigenvalues) @ u.conj().T

    def reconstruction_error(self, t) -> float:
        return float(np.linalg.norm(self.reconstruct() - as_matrix(t)))

    def orthonormality_error(self) -> float:
        u = self.unitary
        return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1])))


def as_matrix(t) -> np.ndarray:
    """Validate and convert ``t`` to a finite 2-d complex array."""
    a = np.array(t, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _square(t) -> np.ndarray:
    a = as_matrix(t)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got {a.shape[0]}x{a.shape[1]}")
    return a


def normality_residual(t) -> float:
    """Frobenius norm of the commutator ``TT* - T*T``."""
    a = _square(t)
    ah = a.conj().T
    return float(np.linalg.norm(a @ ah - ah @ a))


def _order(values: np.ndarray) -> np.ndarray:
    re = np.round(values.real, 12) + 0.0
    im = np.round(values.imag, 12) + 0.0
    return np.lexsort((im, re))


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # n - 1 rounds (n even) of disjoint index pairs covering every pair once
    m = n + (n % 2)
    ring = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            i, j = ring[k], ring[m - 1 - k]
            if i < n and j < n:
                ps.append(min(i, j))
                qs.append(max(i, j))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        ring = [ring[0], ring[-1]] + ring[1:-1]
    return rounds


def _jacobi(a: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    # a is Hermitian and is overwritten; each round applies disjoint rotations at once
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    frob = float(np.linalg.norm(a))
    target = n * _EPS * frob
    # rotations below this size cannot keep the sweep from converging
    skip = max(target / max(n, 1), 1e-300)
    rounds = _round_robin(n)
    for _ in range(max_sweeps + 1):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= target:
            return np.real(np.diag(a)).copy(), v
        for P, Q in rounds:
            b = a[P, Q]
            mod = np.abs(b)
            act = mod > skip
            if not act.any():
                continue
            P, Q, b, mod = P[act], Q[act], b[act], mod[act]
            ph = np.conj(b / mod)
            theta = (a[Q, Q].real - a[P, P].real) / (2.0 * mod)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            J = np.eye(n, dtype=complex)
            J[P, P] = c
            J[P, Q] = s
            J[Q, P] = -s * ph
            J[Q, Q] = c * ph
            a = J.conj().T @ a @ J
            a[P, Q] = 0.0
            a[Q, P] = 0.0
            d = np.arange(n)
            a[d, d] = a[d, d].real
            v = v @ J
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal {off:.3e})")


def hermitian_eigen(a, tol: float = 1e-10, max_sweeps: int = MAX_SWEEPS) -> SpectralDecomposition:
    """Eigen-decompose a Hermitian matrix by cyclic Jacobi rotations."""
    a = _square(a)
    scale = max(1.0, float(np.linalg.norm(a)))
    skew = float(np.linalg.norm(a - a.conj().T))
    if skew > tol * scale:
        raise PreconditionError(f"matrix is not Hermitian: ||A - A*||_F = {skew:.3e}")
    work = (a + a.conj().T) / 2.0
    w, v = _jacobi(work, max_sweeps)
    idx = np.argsort(w, kind="stable")
    return SpectralDecomposition(w[idx].astype(complex), v[:, idx], 0.0)


def _clusters(sorted_values: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, x in enumerate(sorted_values):
        if groups and x - sorted_values[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def decompose_normal(t, tol: float = 1e-8, cluster_tol: float | None = None) -> SpectralDecomposition:
    """Diagonalize a normal matrix by simultaneous diagonalization of its Hermitian parts.

    The real part ``A = (T + T*)/2`` is diagonalized first; inside every
    cluster of its eigenvalues (gap at most ``cluster_tol``) the imaginary part
    ``B = (T - T*)/2i`` is diagonalized on the corresponding invariant subspace.
    """
    t = _square(t)
    scale = max(1.0, float(np.linalg.norm(t)))
    res = normality_residual(t)
    if res > tol * scale:
        raise NotNormalError(f"matrix is not normal: ||TT* - T*T||_F = {res:.3e}", res)
    if cluster_tol is None:
        cluster_tol = 1e-7 * scale
    th = t.conj().T
    real_part = (t + th) / 2.0
    imag_part = (t - th) / 2j
    dec = hermitian_eigen(real_part, tol=1.0)
    u = dec.unitary.copy()
    for group in _clusters(dec.eigenvalues.real, cluster_tol):
        if len(group) < 2:
            continue
        block = u[:, group]
        restricted = block.conj().T @ imag_part @ block
        restricted = (restricted + restricted.conj().T) / 2.0
        inner = hermitian_eigen(restricted, tol=1.0)
        u[:, group] = block @ inner.unitary
    lam = np.einsum("ij,ik,kj->j", u.conj(), t, u)
    idx = _order(lam)
    return SpectralDecomposition(lam[idx], u[:, idx], float(cluster_tol))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def matrix_to_json(t) -> dict:
    a = as_matrix(t)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [float(x) for x in a.real.ravel()],
        "im": [float(x) for x in a.imag.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", [0.0] * (rows * cols)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
        raise DimensionError(f"matrix JSON has {re.size} entries for shape {rows}x{cols}")
    return as_matrix((re + 1j * im).reshape(rows, cols))
