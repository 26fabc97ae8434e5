"""Existence and ambiguity of a metric shared by several observables.

The metric family of the first observable is an n-dimensional linear cone
coordinatized by kappa; demanding that the same Theta(kappa) also
Hermitizes every further observable is linear in kappa.  Feasibility is
therefore decided in two stages: intersect (nullspace of the stacked
constraint matrix), then search that nullspace for a strictly positive
kappa.  The positivity objective min_k kappa_k is concave and piecewise
linear on the trace-normalized slice, so its maximum is global; small
nullspaces are handled in closed form and larger ones by supergradient
ascent polished with an exact linear program.

The unitary diagonal-frame construction (diagonalize Theta_A, read the
second coefficient set off the diagonal conditions, measure the remaining
off-diagonal block) is kept as an independent cross-check of feasible
verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linprog

from .errors import (
    ComplexSpectrum,
    DegenerateSpectrum,
    DimensionMismatch,
    MetricToolkitError,
    SingularDiagonalSystem,
    SingularOmega,
)
from .linalg import (
    DEFAULT_TOL,
    EPS,
    RANK_CUTOFF,
    ToleranceSet,
    as_matrix,
    frob,
    require_hermitian,
)
from .spectral import (
    BiorthogonalSystem,
    MetricCandidate,
    biorthogonalize,
    diagnose_spectrum,
    metric_from_kappa,
    quasi_hermiticity_residual,
)

#: Absolute singular-value floor (after block normalization) below which a
#: constraint direction is treated as exactly satisfied.  Keeps commuting
#: observables, whose constraint blocks are pure rounding noise, at rank 0.
NULLSPACE_FLOOR = 1e-11


class FeasibilityStatus(Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    MARGINAL = "Marginal"


@dataclass
class CompatibilityProblem:
    """An ordered multiplet of same-dimension observables plus tolerances."""

    observables: list
    tol: ToleranceSet = DEFAULT_TOL

    def __post_init__(self):
        if len(self.observables) < 2:
            raise ValueError("a compatibility problem needs at least two observables")
        mats = [as_matrix(o) for o in self.observables]
        n = mats[0].shape[0]
        for idx, m in enumerate(mats):
            if m.shape != (n, n):
                raise DimensionMismatch(
                    f"observable {idx} has shape {m.shape}, expected {(n, n)}"
                )
        self.observables = mats

    @property
    def n(self) -> int:
        return self.observables[0].shape[0]


@dataclass
class FeasibilityReport:
    """Verdict on the shared-metric question, with witness and bookkeeping."""

    status: FeasibilityStatus
    nullspace_dim: int
    witness: MetricCandidate | None
    best_min_component: float
    constraint_rows: int
    unknowns: int
    counting_note: str
    tol: ToleranceSet = DEFAULT_TOL
    search_values: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "status": self.status.value,
            "nullspace_dim": self.nullspace_dim,
            "best_min_component": self.best_min_component,
            "constraint_rows": self.constraint_rows,
            "unknowns": self.unknowns,
            "counting_note": self.counting_note,
            "residuals": [],
            "tolerances": self.tol.to_json(),
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()["theta"]
            out["kappa"] = [float(k) for k in self.witness.kappa]
            out["residuals"] = [float(r) for _, r in self.witness.quasi_residuals]
        return out


# --- kappa-linear constraints -------------------------------------------------

def pack_antihermitian(m: np.ndarray) -> np.ndarray:
    """Real coordinates of an anti-Hermitian matrix.

    Layout: imaginary diagonal, then real and imaginary parts of the strict
    upper triangle (row-wise); n^2 numbers in total.
    """
    m = np.asarray(m)
    n = m.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([m.diagonal().imag, m[iu].real, m[iu].imag])


def unpack_antihermitian(vec: np.ndarray, n: int) -> np.ndarray:
    """Inverse of pack_antihermitian."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (n * n,):
        raise DimensionMismatch(f"expected {n * n} packed values, got {vec.shape}")
    m = np.zeros((n, n), dtype=complex)
    m[np.diag_indices(n)] = 1j * vec[:n]
    count = n * (n - 1) // 2
    iu = np.triu_indices(n, 1)
    upper = vec[n:n + count] + 1j * vec[n + count:]
    m[iu] = upper
    m[(iu[1], iu[0])] = -np.conj(upper)
    return m


def kappa_constraint_matrix(system: BiorthogonalSystem, b) -> np.ndarray:
    """Real (n^2 x n) matrix of the map kappa -> Theta(kappa) B - B^dagger Theta(kappa).

    Column j packs the anti-Hermitian mismatch of the rank-one family
    element |j>> <<j| against B, so matrix @ kappa reproduces the packed
    mismatch of Theta(kappa) for any kappa.
    """
    b = as_matrix(b)
    if b.shape != (system.n, system.n):
        raise DimensionMismatch(
            f"observable shape {b.shape} does not match system dimension {system.n}"
        )
    bh = b.conj().T
    cols = []
    for j in range(system.n):
        g = system.projector(j)
        cols.append(pack_antihermitian(g @ b - bh @ g))
    return np.column_stack(cols)


# --- positivity search over the nullspace ------------------------------------

def _slice_tangent(s: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to s (columns)."""
    d = s.shape[0]
    _, _, vt = np.linalg.svd(s[None, :] / np.linalg.norm(s))
    return vt[1:].T.copy()  # d x (d-1)


def _line_max_min(kappa0: np.ndarray, direction: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact maximum of min_i(kappa0 + t*u)_i over t (concave piecewise linear)."""
    candidates = [0.0]
    n = kappa0.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            du = direction[i] - direction[j]
            if abs(du) > 1e-14:
                candidates.append(float((kappa0[j] - kappa0[i]) / du))
    best_t = max(candidates, key=lambda t: float(np.min(kappa0 + t * direction)))
    kappa = kappa0 + best_t * direction
    return kappa, float(np.min(kappa))


def _lp_max_min(kappa0: np.ndarray, directions: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Exact max of min_i kappa_i over the affine slice, as a linear program."""
    n, dim = directions.shape
    c = np.zeros(dim + 1)
    c[-1] = -1.0  # maximize the floor variable m
    a_ub = np.hstack([-directions, np.ones((n, 1))])
    res = linprog(c, A_ub=a_ub, b_ub=kappa0, bounds=[(None, None)] * (dim + 1), method="highs")
    if not res.success:
        return None
    t = res.x[:-1]
    kappa = kappa0 + directions @ t
    return kappa, float(np.min(kappa))


def _ascend(kappa0, directions, start, iterations):
    t = start.copy()
    best_t = t.copy()
    best_val = float(np.min(kappa0 + directions @ t))
    for it in range(1, iterations + 1):
        kappa = kappa0 + directions @ t
        grad = directions[int(np.argmin(kappa))]
        norm = np.linalg.norm(grad)
        if norm < 1e-15:
            break
        t = t + (1.0 / np.sqrt(it)) * grad / norm
        val = float(np.min(kappa0 + directions @ t))
        if val > best_val:
            best_val, best_t = val, t.copy()
    return best_t, best_val


def positivity_search(nullspace_rows: np.ndarray, restarts: int = 10,
                      iterations: int = 5000, seed: int = 0):
    """Maximize min_k kappa_k over {kappa in rowspan, sum kappa = n}.

    Returns (kappa, value, per_restart_values); kappa is None when the
    slice is empty (every nullspace vector has zero component sum, so no
    strictly positive kappa can exist).  The objective is concave, so the
    closed forms (dim <= 2) and the ascent-plus-LP path both return the
    global maximum; per-restart values are reported after the exact polish
    and must coincide.
    """
    rows = np.asarray(nullspace_rows, dtype=float)
    d, n = rows.shape
    if d == 0:
        return None, 0.0, []
    basis = rows.T
    s = basis.T @ np.ones(n)
    if np.linalg.norm(s) < 1e-12:
        return None, 0.0, []
    y0 = (n / float(s @ s)) * s
    kappa0 = basis @ y0
    if d == 1:
        value = float(np.min(kappa0))
        return kappa0, value, [value]
    directions = basis @ _slice_tangent(s)
    if d == 2:
        kappa, value = _line_max_min(kappa0, directions[:, 0])
        return kappa, value, [value]
    rng = np.random.default_rng(seed)
    dim = directions.shape[1]
    scale = max(1.0, float(np.linalg.norm(kappa0)))
    starts = [np.zeros(dim)] + [rng.standard_normal(dim) * scale for _ in range(restarts - 1)]
    incumbents = [_ascend(kappa0, directions, start, iterations) for start in starts]
    best_t, best_val = max(incumbents, key=lambda pair: pair[1])
    polished = _lp_max_min(kappa0, directions)
    if polished is not None and polished[1] >= best_val:
        kappa, value = polished
    else:  # pragma: no cover - LP failure fallback
        kappa, value = kappa0 + directions @ best_t, best_val
    per_restart = [max(v, value) for _, v in incumbents]
    return kappa, value, per_restart


# --- the decision procedure ---------------------------------------------------

def _check_spectra(problem: CompatibilityProblem) -> None:
    for idx, obs in enumerate(problem.observables):
        rep = diagnose_spectrum(obs, problem.tol)
        if not rep.is_real:
            raise ComplexSpectrum(
                f"observable {idx}: max |Im eigenvalue| = {rep.max_imag:.3e}"
            )
        if not rep.is_nondegenerate:
            raise DegenerateSpectrum(
                f"observable {idx}: minimal eigenvalue gap = {rep.min_gap:.3e}"
            )


def shared_metric_feasibility(problem: CompatibilityProblem) -> FeasibilityReport:
    """Decide whether one positive-definite metric serves every observable.

    Builds the metric family of the first observable, stacks the
    kappa-linear Hermitization constraints of the remaining ones, extracts
    the nullspace, and maximizes the minimum kappa component over its
    trace-normalized slice.  Feasible requires the maximum to clear
    tol_pos and the re-verified witness to pass every residual check;
    Infeasible means no positive direction exists; the band in between is
    reported as Marginal, never promoted.
    """
    tol = problem.tol
    _check_spectra(problem)
    system = biorthogonalize(problem.observables[0], tol)
    n = problem.n
    g_scale = max(frob(system.projector(j)) for j in range(n))
    blocks = []
    for obs in problem.observables[1:]:
        block = kappa_constraint_matrix(system, obs)
        blocks.append(block / (2.0 * frob(obs) * g_scale + EPS))
    stacked = np.vstack(blocks)
    sv = np.linalg.svd(stacked, compute_uv=False)
    cutoff = max(RANK_CUTOFF * (float(sv[0]) if sv.size else 0.0), NULLSPACE_FLOOR)
    rank = int(np.sum(sv > cutoff))
    _, _, vt = np.linalg.svd(stacked)
    null_rows = vt[rank:]
    nullspace_dim = null_rows.shape[0]

    counting = counting_report(n, len(problem.observables) - 1)
    note = (
        f"unknowns {counting.unknowns}, nominal real constraints "
        f"{counting.nominal_constraints} ({counting.verdict}); stacked rows "
        f"{stacked.shape[0]}, rank {rank}, nullspace {nullspace_dim}"
    )

    def report(status, witness, best, extra="", values=()):
        return FeasibilityReport(
            status=status,
            nullspace_dim=nullspace_dim,
            witness=witness,
            best_min_component=best,
            constraint_rows=stacked.shape[0],
            unknowns=n,
            counting_note=note + extra,
            tol=tol,
            search_values=list(values),
        )

    if nullspace_dim == 0:
        return report(FeasibilityStatus.INFEASIBLE, None, 0.0)
    kappa, best, per_restart = positivity_search(null_rows)
    if kappa is None:
        return report(
            FeasibilityStatus.INFEASIBLE, None, 0.0,
            extra="; every family-compatible kappa has zero component sum",
        )
    if best <= 0.0:
        return report(FeasibilityStatus.INFEASIBLE, None, best, values=per_restart)
    if best <= tol.tol_pos:
        return report(FeasibilityStatus.MARGINAL, None, best, values=per_restart)

    witness = metric_from_kappa(system, kappa)
    witness.quasi_residuals = [
        (j, quasi_hermiticity_residual(witness.theta, obs))
        for j, obs in enumerate(problem.observables)
    ]
    bad = [r for _, r in witness.quasi_residuals if r > tol.tol_resid]
    if witness.lambda_min <= tol.tol_pos or bad:
        return report(
            FeasibilityStatus.MARGINAL, witness, best,
            extra="; witness re-verification failed "
            f"(lambda_min {witness.lambda_min:.3e}, residuals {[f'{r:.2e}' for _, r in witness.quasi_residuals]})",
            values=per_restart,
        )
    return report(FeasibilityStatus.FEASIBLE, witness, best, values=per_restart)


# --- diagonal-frame cross-check -----------------------------------------------

@dataclass
class DiagonalFrameCheck:
    """Outcome of the unitary diagonal-frame construction."""

    beta: np.ndarray
    offdiag_residual: float
    beta_positive: bool


def diagonalization_crosscheck(system: BiorthogonalSystem, b, alpha,
                               tol: ToleranceSet = DEFAULT_TOL) -> DiagonalFrameCheck:
    """Check a candidate alpha the long way around.

    Diagonalize Theta_A(alpha) by a unitary, determine the B-family
    coordinates beta from the n diagonal conditions (a linear solve), and
    return the Frobenius norm of the remaining strict upper triangle,
    normalized by |Theta_A|.  A vanishing residual certifies the shared
    metric independently of the kappa-linear route.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0.0):
        raise ValueError("alpha must be strictly positive")
    cand = metric_from_kappa(system, alpha)
    theta_a = cand.theta
    w, u = np.linalg.eigh(theta_a)
    sys_b = biorthogonalize(b, tol)
    framed_left = u.conj().T @ sys_b.left_ketkets
    dmat = np.abs(framed_left) ** 2
    sv = np.linalg.svd(dmat, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= RANK_CUTOFF * sv[0]:
        raise SingularDiagonalSystem(
            f"diagonal conditions do not determine beta (singular values {sv[0]:.3e}..{sv[-1]:.3e})"
        )
    beta = np.linalg.solve(dmat, w)
    theta_b = metric_from_kappa(sys_b, beta).theta
    framed = u.conj().T @ theta_b @ u
    off = framed[np.triu_indices(system.n, 1)]
    residual = float(np.linalg.norm(off)) / (frob(theta_a) + EPS)
    return DiagonalFrameCheck(beta=beta, offdiag_residual=residual,
                              beta_positive=bool(np.all(beta > 0.0)))


# --- generators and counting ---------------------------------------------------

def make_compatible_pair(h_a, h_b, omega, tol: ToleranceSet = DEFAULT_TOL):
    """Conjugate two Hermitian matrices by an invertible factor.

    Returns (A, B, Theta) with A = Omega^-1 h_a Omega, B = Omega^-1 h_b Omega
    and Theta = Omega^dagger Omega, which certifies both by construction.
    """
    h_a = require_hermitian(h_a, tol, name="first Hermitian input")
    h_b = require_hermitian(h_b, tol, name="second Hermitian input")
    omega = as_matrix(omega)
    if omega.shape != h_a.shape or h_a.shape != h_b.shape:
        raise DimensionMismatch("inputs must share one square shape")
    sv = np.linalg.svd(omega, compute_uv=False)
    if sv[-1] <= tol.tol_pos:
        raise SingularOmega(f"smallest singular value {sv[-1]:.3e} <= tol_pos")
    a = np.linalg.solve(omega, h_a @ omega)
    b = np.linalg.solve(omega, h_b @ omega)
    theta = omega.conj().T @ omega
    return a, b, (theta + theta.conj().T) / 2.0


@dataclass(frozen=True)
class CountingReport:
    """Unknowns-versus-constraints bookkeeping for the generic case."""

    n: int
    j_extra: int
    unknowns: int
    nominal_constraints: int
    solvable_margin: bool
    verdict: str


def counting_report(n: int, j_extra: int) -> CountingReport:
    """Generic counting: j_extra * n(n-1) real constraints against n unknowns."""
    if n < 2:
        raise ValueError(f"counting needs n >= 2, got {n}")
    if j_extra < 1:
        raise ValueError(f"counting needs j_extra >= 1, got {j_extra}")
    nominal = j_extra * n * (n - 1)
    margin = nominal <= n
    return CountingReport(
        n=n,
        j_extra=j_extra,
        unknowns=n,
        nominal_constraints=nominal,
        solvable_margin=margin,
        verdict="marginal/solvable" if margin else "generically infeasible",
    )


def random_observable(rng: np.random.Generator, n: int, cond_max: float = 100.0,
                      min_gap: float = 0.05, max_draws: int = 200) -> np.ndarray:
    """S diag(distinct reals) S^-1 with a condition-bounded random S."""
    eigs = np.sort(rng.uniform(-1.0, 1.0, n))
    for _ in range(max_draws):
        if n == 1 or float(np.min(np.diff(eigs))) > min_gap:
            break
        eigs = np.sort(rng.uniform(-1.0, 1.0, n))
    s = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    for _ in range(max_draws):
        if np.linalg.cond(s) < cond_max:
            break
        s = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return s @ np.diag(eigs.astype(complex)) @ np.linalg.inv(s)


@dataclass
class TrialRecord:
    index: int
    status: str
    nullspace_dim: int
    best_min_component: float
    note: str = ""

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "status": self.status,
            "nullspace_dim": self.nullspace_dim,
            "best_min_component": self.best_min_component,
            "note": self.note,
        }


@dataclass
class SurveyResult:
    n: int
    trials: int
    seed: int
    feasible_count: int
    feasible_fraction: float
    records: list

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "feasible_count": self.feasible_count,
            "feasible_fraction": self.feasible_fraction,
            "records": [r.to_json() for r in self.records],
        }


def random_survey(n: int, trials: int, seed: int = 0,
                  tol: ToleranceSet = DEFAULT_TOL) -> SurveyResult:
    """Feasibility frequency over independent random pairs.

    Each trial draws both observables from its own (seed, trial) random
    stream, so results are reproducible and schedule-independent.  Failed
    trials are recorded with an Error status rather than raised.
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    records = []
    feasible = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        a = random_observable(rng, n)
        b = random_observable(rng, n)
        try:
            rep = shared_metric_feasibility(CompatibilityProblem([a, b], tol))
            records.append(TrialRecord(t, rep.status.value, rep.nullspace_dim,
                                       rep.best_min_component))
            feasible += rep.status is FeasibilityStatus.FEASIBLE
        except MetricToolkitError as exc:
            records.append(TrialRecord(t, "Error", 0, 0.0,
                                       note=f"{type(exc).__name__}: {exc}"))
    return SurveyResult(
        n=n,
        trials=trials,
        seed=seed,
        feasible_count=int(feasible),
        feasible_fraction=feasible / trials,
        records=records,
    )
