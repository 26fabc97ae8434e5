"""Dense complex matrix kernels shared by every other module.

Matrices are plain ``numpy`` arrays of ``complex128``; this module provides
the validated entry points (Hermitian splits, eigensolves, rank-revealing
least squares) plus the JSON on-disk format used repo-wide:

    {"n": <int>, "entries": [[re, im], ...]}

with entries row-major of length n*n, written at full precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EigensolverFailure, NotHermitian

EPS = float(np.finfo(float).eps)

#: Relative singular-value cutoff used for every rank decision.
RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class ToleranceSet:
    """Relative thresholds threaded through all numeric decisions.

    tol_real   spectrum-reality threshold (|Im| relative to norm)
    tol_degen  eigenvalue-separation threshold
    tol_resid  residual acceptance threshold
    tol_pos    strict-positivity margin
    """

    tol_real: float = 1e-8
    tol_degen: float = 1e-8
    tol_resid: float = 1e-8
    tol_pos: float = 1e-9

    def __post_init__(self):
        for name in ("tol_real", "tol_degen", "tol_resid", "tol_pos"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie strictly in (0, 1), got {value!r}")

    def to_json(self) -> dict:
        return {
            "tol_real": self.tol_real,
            "tol_degen": self.tol_degen,
            "tol_resid": self.tol_resid,
            "tol_pos": self.tol_pos,
        }


DEFAULT_TOL = ToleranceSet()


def as_matrix(m) -> np.ndarray:
    """Coerce to a square, finite complex matrix (copies only if needed)."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    return arr


def frob(m) -> float:
    """Frobenius norm as a plain float."""
    return float(np.linalg.norm(m))


def hermiticity_gap(m) -> float:
    """Frobenius norm of M - M^dagger."""
    m = np.asarray(m)
    return frob(m - m.conj().T)


def require_hermitian(m, tol: ToleranceSet = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    """Validate Hermiticity within tol_resid relative to the matrix norm."""
    m = as_matrix(m)
    gap = hermiticity_gap(m)
    if gap > tol.tol_resid * max(frob(m), EPS):
        raise NotHermitian(f"{name} deviates from Hermiticity: |M - M^H| = {gap:.3e}")
    return m


def hermitian_split(m) -> tuple[np.ndarray, np.ndarray]:
    """Split M into Hermitian H and anti-Hermitian K with H + K = M.

    H = (M + M^H)/2 is exactly Hermitian and K = (M - M^H)/2 exactly
    anti-Hermitian; the sum reconstructs M to machine precision.
    """
    m = as_matrix(m)
    mh = m.conj().T
    return (m + mh) / 2.0, (m - mh) / 2.0


def real_imag_split(h, tol: ToleranceSet = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian H -> (S, A) with S = Re H symmetric, A = Im H antisymmetric.

    Raises NotHermitian when the input is not Hermitian within tol_resid.
    The round trip S + iA == H is exact.
    """
    h = require_hermitian(h, tol, name="real_imag_split input")
    return np.real(h).copy(), np.imag(h).copy()


def eigensolve_general(m) -> tuple[np.ndarray, np.ndarray]:
    """Dense eigensolve with a deterministic (Re, Im)-lexicographic order.

    Returns (eigenvalues, right_vectors) where column k of right_vectors
    belongs to eigenvalue k.  Raises EigensolverFailure when the
    underlying iteration does not converge.
    """
    m = as_matrix(m)
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        raise EigensolverFailure(f"dense eigensolve failed: {exc}") from exc
    order = np.lexsort((w.imag, w.real))
    return w[order], v[:, order]


def min_eigenvalue_hermitian(h, tol: ToleranceSet = DEFAULT_TOL) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector of a Hermitian matrix."""
    h = require_hermitian(h, tol, name="min_eigenvalue input")
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigensolverFailure(f"hermitian eigensolve failed: {exc}") from exc
    return float(w[0]), v[:, 0]


@dataclass
class RankedLinearSolution:
    """Minimum-norm least-squares solution with rank and nullspace bookkeeping.

    ``nullspace_basis`` rows are orthonormal vectors spanning the kernel of
    the system matrix; ``rank + len(nullspace_basis) == unknowns``.
    """

    solution: np.ndarray
    residual_norm: float
    rank: int
    nullspace_basis: np.ndarray

    @property
    def nullspace_dim(self) -> int:
        return self.nullspace_basis.shape[0]


def least_squares_with_nullspace(rows, rhs, rank_cutoff: float = RANK_CUTOFF) -> RankedLinearSolution:
    """SVD-based minimum-norm least squares over the reals.

    Rank counts singular values above ``rank_cutoff`` times the largest
    one; everything below is treated as kernel.
    """
    a = np.asarray(rows, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"system matrix must be 2-D, got shape {a.shape}")
    if b.shape != (a.shape[0],):
        raise DimensionMismatch(
            f"rhs length {b.shape} does not match {a.shape[0]} rows"
        )
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    cutoff = rank_cutoff * (float(s[0]) if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    coeff = (u[:, :rank].T @ b) / s[:rank]
    x = vt[:rank].T @ coeff
    residual = frob(a @ x - b)
    return RankedLinearSolution(x, residual, rank, vt[rank:].copy())


# --- JSON matrix format -----------------------------------------------------

def matrix_to_json(m) -> dict:
    """Encode a matrix as the repo-wide JSON dict (row-major [re, im] pairs)."""
    m = as_matrix(m)
    n = m.shape[0]
    flat = m.reshape(-1)
    return {"n": n, "entries": [[float(z.real), float(z.imag)] for z in flat]}


def matrix_from_json(obj) -> np.ndarray:
    """Decode the repo-wide JSON dict back into a complex matrix."""
    if not isinstance(obj, dict) or "n" not in obj or "entries" not in obj:
        raise ValueError("matrix JSON must be an object with 'n' and 'entries'")
    n = obj["n"]
    entries = obj["entries"]
    if not isinstance(n, int) or n <= 0:
        raise ValueError(f"matrix JSON field 'n' must be a positive integer, got {n!r}")
    if len(entries) != n * n:
        raise ValueError(
            f"matrix JSON needs {n * n} entries for n = {n}, got {len(entries)}"
        )
    flat = np.empty(n * n, dtype=complex)
    for k, pair in enumerate(entries):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValueError(f"entry {k} is not a [re, im] pair: {pair!r}")
        flat[k] = complex(float(pair[0]), float(pair[1]))
    return as_matrix(flat.reshape(n, n))


def save_matrix(path, m) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_json(m), fh)
        fh.write("\n")


def load_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return matrix_from_json(json.load(fh))
