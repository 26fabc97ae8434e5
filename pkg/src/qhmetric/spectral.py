"""Biorthogonal eigensystems and the metric family of a single observable.

A diagonalizable matrix A with real non-degenerate spectrum owns a pair of
bases: right eigenvectors |k> of A and left eigenvectors |k>> of A^dagger,
normalized to <<j|k> = delta_jk.  Every Hermitian positive-definite Theta
with Theta A = A^dagger Theta is of the form

    Theta(kappa) = sum_k kappa_k |k>> <<k|,   kappa_k > 0,

so the n-vector kappa coordinatizes the whole family of admissible metrics.
This module builds the bases, the family, and the residual diagnostics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ComplexSpectrum, DegenerateSpectrum, DimensionMismatch, EigensolverFailure, NotPositiveDefinite
from .linalg import (
    DEFAULT_TOL,
    EPS,
    ToleranceSet,
    as_matrix,
    eigensolve_general,
    frob,
    matrix_from_json,
    matrix_to_json,
    min_eigenvalue_hermitian,
    require_hermitian,
)


@dataclass(frozen=True)
class SpectrumReport:
    """Reality / non-degeneracy verdict for one observable."""

    is_real: bool
    is_nondegenerate: bool
    max_imag: float
    min_gap: float


def diagnose_spectrum(a, tol: ToleranceSet = DEFAULT_TOL) -> SpectrumReport:
    """Check whether the spectrum is real and non-degenerate.

    Reality means max |Im lambda| <= tol_real * |A|_F, non-degeneracy that
    the smallest pairwise eigenvalue distance exceeds tol_degen * |A|_F.
    """
    a = as_matrix(a)
    w, _ = eigensolve_general(a)
    scale = max(frob(a), EPS)
    max_imag = float(np.max(np.abs(w.imag))) if w.size else 0.0
    if w.size > 1:
        diffs = np.abs(w[:, None] - w[None, :])
        min_gap = float(np.min(diffs[~np.eye(w.size, dtype=bool)]))
    else:
        min_gap = float("inf")
    return SpectrumReport(
        is_real=max_imag <= tol.tol_real * scale,
        is_nondegenerate=min_gap > tol.tol_degen * scale,
        max_imag=max_imag,
        min_gap=min_gap,
    )


@dataclass
class BiorthogonalSystem:
    """Right/left eigenbases of A paired by (real) eigenvalue.

    Columns of ``right_kets`` are unit-norm eigenvectors of A with the first
    significant component rotated real positive; columns of ``left_ketkets``
    are the matching eigenvectors of A^dagger scaled so the overlap matrix
    is the identity.  Eigenvalues are in ascending order.
    """

    n: int
    eigenvalues: np.ndarray
    right_kets: np.ndarray
    left_ketkets: np.ndarray

    def condition_number(self) -> float:
        """Condition of the right eigenbasis; large values mean a fragile family."""
        return float(np.linalg.cond(self.right_kets))

    def reconstruct(self) -> np.ndarray:
        """Sum_k |k> E_k <<k|, which reproduces the diagonalized observable."""
        return (self.right_kets * self.eigenvalues) @ self.left_ketkets.conj().T

    def projector(self, k: int) -> np.ndarray:
        """Rank-one building block |k>> <<k| of the metric family."""
        l = self.left_ketkets[:, k]
        return np.outer(l, l.conj())

    def to_json(self) -> dict:
        return {
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "right_kets": matrix_to_json(self.right_kets),
            "left_ketkets": matrix_to_json(self.left_ketkets),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BiorthogonalSystem":
        right = matrix_from_json(obj["right_kets"])
        left = matrix_from_json(obj["left_ketkets"])
        eigenvalues = np.asarray(obj["eigenvalues"], dtype=float)
        return cls(n=right.shape[0], eigenvalues=eigenvalues, right_kets=right, left_ketkets=left)


def _fix_gauge(vectors: np.ndarray) -> np.ndarray:
    """Unit columns with the first significant component real positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        col = col / np.linalg.norm(col)
        idx = int(np.argmax(np.abs(col) > 1e-12))
        phase = col[idx] / abs(col[idx])
        out[:, k] = col * np.conj(phase)
    return out


def biorthogonalize(a, tol: ToleranceSet = DEFAULT_TOL) -> BiorthogonalSystem:
    """Build the biorthonormal right/left eigenbases of a real-spectrum matrix.

    Raises ComplexSpectrum or DegenerateSpectrum (naming the offending
    eigenvalues) when the preconditions fail, and EigensolverFailure when
    the eigenbasis is too ill-conditioned to satisfy the residual contract.
    """
    a = as_matrix(a)
    report = diagnose_spectrum(a, tol)
    scale = max(frob(a), EPS)
    w, v = eigensolve_general(a)
    if not report.is_real:
        k = int(np.argmax(np.abs(w.imag)))
        raise ComplexSpectrum(
            f"eigenvalue {w[k]:.6g} has |Im| = {report.max_imag:.3e} "
            f"> {tol.tol_real * scale:.3e}"
        )
    if not report.is_nondegenerate:
        diffs = np.abs(w[:, None] - w[None, :]) + np.diag(np.full(w.size, np.inf))
        i, j = np.unravel_index(int(np.argmin(diffs)), diffs.shape)
        raise DegenerateSpectrum(
            f"eigenvalues {w[i]:.6g} and {w[j]:.6g} separated by "
            f"{report.min_gap:.3e} <= {tol.tol_degen * scale:.3e}"
        )
    right = _fix_gauge(v)
    # Left eigenvectors of A^dagger paired by eigenvalue: the conjugated rows
    # of right^-1, rescaled so <<j|k> = delta_jk holds exactly.
    left = np.linalg.solve(right, np.eye(a.shape[0], dtype=complex)).conj().T
    system = BiorthogonalSystem(
        n=a.shape[0], eigenvalues=w.real.copy(), right_kets=right, left_ketkets=left
    )
    budget = tol.tol_resid * scale
    eig_gap = frob(a.conj().T @ left - left * system.eigenvalues)
    recon_gap = frob(system.reconstruct() - a)
    if eig_gap > budget or recon_gap > budget:
        raise EigensolverFailure(
            "eigenbasis too ill-conditioned for the biorthogonality contract: "
            f"left-eigen residual {eig_gap:.3e}, reconstruction residual {recon_gap:.3e}, "
            f"budget {budget:.3e} (condition {system.condition_number():.3e})"
        )
    return system


@dataclass
class MetricCandidate:
    """A Hermitian metric candidate with its family coordinates and diagnostics.

    ``kappa`` is None when the candidate was not built from a family;
    ``quasi_residuals`` holds (observable index, residual) pairs filled by
    whoever certifies the candidate against concrete observables.
    """

    theta: np.ndarray
    kappa: np.ndarray | None
    lambda_min: float
    quasi_residuals: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "theta": matrix_to_json(self.theta),
            "lambda_min": self.lambda_min,
            "quasi_residuals": [[int(j), float(r)] for j, r in self.quasi_residuals],
        }
        if self.kappa is not None:
            out["kappa"] = [float(k) for k in self.kappa]
        return out


def metric_from_kappa(system: BiorthogonalSystem, kappa) -> MetricCandidate:
    """Assemble Theta(kappa) = sum_k kappa_k |k>> <<k| for the given system.

    The result is Hermitian by construction and positive definite exactly
    when every kappa_k is positive (for an invertible left basis).
    """
    k = np.asarray(kappa, dtype=float)
    if k.shape != (system.n,):
        raise DimensionMismatch(
            f"kappa must have length {system.n}, got shape {k.shape}"
        )
    if not np.all(np.isfinite(k)):
        raise ValueError("kappa components must be finite")
    left = system.left_ketkets
    theta = (left * k) @ left.conj().T
    theta = (theta + theta.conj().T) / 2.0
    lambda_min, _ = min_eigenvalue_hermitian(theta)
    return MetricCandidate(theta=theta, kappa=k.copy(), lambda_min=lambda_min)


def quasi_hermiticity_residual(theta, lam) -> float:
    """Normalized size of Theta Lambda - Lambda^dagger Theta.

    Zero (below tol_resid) certifies that Lambda is Hermitian in the inner
    product weighted by Theta.
    """
    theta = as_matrix(theta)
    lam = as_matrix(lam)
    if theta.shape != lam.shape:
        raise DimensionMismatch(
            f"metric shape {theta.shape} does not match observable shape {lam.shape}"
        )
    mismatch = theta @ lam - lam.conj().T @ theta
    return frob(mismatch) / (frob(theta) * frob(lam) + EPS)


def factorize_metric(theta, tol: ToleranceSet = DEFAULT_TOL) -> np.ndarray:
    """Unique Hermitian positive square root Omega with Omega^dagger Omega = Theta."""
    theta = require_hermitian(theta, tol, name="metric")
    w, u = np.linalg.eigh(theta)
    if w[0] <= tol.tol_pos:
        raise NotPositiveDefinite(
            f"metric is not positive definite: lambda_min = {w[0]:.3e}"
        )
    omega = (u * np.sqrt(w)) @ u.conj().T
    return (omega + omega.conj().T) / 2.0


def system_to_json_str(system: BiorthogonalSystem) -> str:
    return json.dumps(system.to_json(), sort_keys=True)
