"""Completion solvers for partially observed quaternion matrices.

Three solvers share the observation mask and stopping machinery:

* ``qtnn_complete`` - two-step scheme: refresh truncated singular factors,
  then run an inner ADMM with singular value thresholding.
* ``dwqtnn_complete`` - one-step gradient descent with two diagonal weight
  matrices scaling the full-factor and truncated-factor terms.
* ``wqtnn_complete`` - the single-weight special case of the above.
* ``qnn_svt_baseline`` - plain iterative thresholding with no truncation,
  used as a comparison floor.

Observed entries are re-imposed bitwise after every iteration.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .quat import DimensionMismatchError, QMatrix
from .qsvd import TruncatedFactors, qsvd, qsvt


class HistoryError(ValueError):
    """A report lacks the per-iteration history needed for the check."""


class Mask:
    """Observation set over an M x N grid."""

    __slots__ = ("observed",)

    def __init__(self, observed: np.ndarray):
        observed = np.asarray(observed, dtype=bool).copy()
        if observed.ndim != 2:
            raise DimensionMismatchError("mask must be 2-D")
        observed.setflags(write=False)
        object.__setattr__(self, "observed", observed)

    def __setattr__(self, name, value):
        raise AttributeError("Mask is immutable")

    @property
    def rows(self) -> int:
        return self.observed.shape[0]

    @property
    def cols(self) -> int:
        return self.observed.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.observed.shape

    def complement(self) -> "Mask":
        return Mask(~self.observed)

    def count(self) -> int:
        return int(np.sum(self.observed))

    def row_counts(self) -> np.ndarray:
        return np.sum(self.observed, axis=1)

    def col_counts(self) -> np.ndarray:
        return np.sum(self.observed, axis=0)

    def project(self, a: QMatrix) -> QMatrix:
        """Zero every entry outside the observed set."""
        if a.shape != self.shape:
            raise DimensionMismatchError(
                f"mask shape {self.shape} vs matrix {a.shape}")
        return QMatrix(a.planes * self.observed[np.newaxis, :, :])


@dataclass(frozen=True)
class WeightSpec:
    """Diagonal weights derived from per-line observation counts.

    With theta > 0 a fully observed line gets weight theta and a fully
    missing line 2*theta; theta = 0 degrades to the identity diagonal.
    """

    theta1: float
    theta2: float
    side: str
    w1: np.ndarray
    w2: np.ndarray

    def norms(self) -> tuple[float, float]:
        return (float(np.linalg.norm(self.w1)),
                float(np.linalg.norm(self.w2)))


def _line_weights(theta: float, counts: np.ndarray, length: int) -> np.ndarray:
    if theta == 0.0:
        return np.ones(len(counts))
    return theta * (2.0 - counts / length)


def build_weights(mask: Mask, theta1: float, theta2: float,
                  side: str = "rows") -> WeightSpec:
    """Weight diagonals from observation counts per row (or column)."""
    if theta1 < 0 or theta2 < 0:
        raise ValueError("weight controls must be nonnegative")
    if side == "rows":
        counts, length = mask.row_counts(), mask.cols
    elif side == "cols":
        counts, length = mask.col_counts(), mask.rows
    else:
        raise ValueError(f"unknown weight side {side!r}")
    return WeightSpec(theta1=theta1, theta2=theta2, side=side,
                      w1=_line_weights(theta1, counts, length),
                      w2=_line_weights(theta2, counts, length))


@dataclass(frozen=True)
class SolverConfig:
    """Tunables shared by the completion solvers.

    ``beta0`` doubles as the one-step solvers' initial epsilon; ``rho`` is
    the geometric schedule multiplier and ``beta_max`` the cap.
    """

    r: int = 1
    rho: float = 1.25
    beta0: float = 0.005
    beta_max: float = 1e7
    outer_tol: float = 1e-3
    inner_tol: float = 1e-4
    max_outer: int = 100
    max_inner: int = 50
    theta1: float = 0.0
    theta2: float = 0.0
    weight_side: str = "rows"
    rng_seed: int = 0
    record_trajectory: bool = False

    def __post_init__(self):
        if self.rho <= 1:
            raise ValueError("rho must exceed 1")
        if not 0 < self.beta0 <= self.beta_max:
            raise ValueError("need 0 < beta0 <= beta_max")
        if self.outer_tol <= 0 or self.inner_tol <= 0:
            raise ValueError("tolerances must be positive")

    @classmethod
    def qtnn_defaults(cls, r: int, **kw) -> "SolverConfig":
        return cls(r=r, rho=1.25, beta0=0.005, beta_max=1e7,
                   outer_tol=1e-3, **kw)

    @classmethod
    def dwqtnn_defaults(cls, r: int, **kw) -> "SolverConfig":
        kw.setdefault("theta1", 2.0)
        kw.setdefault("theta2", 1.5)
        return cls(r=r, rho=1.2, beta0=0.0015, beta_max=1e7,
                   outer_tol=1e-4, **kw)


@dataclass
class SolverReport:
    """Outcome of a completion run."""

    recovered: QMatrix
    outer_iterations: int
    inner_iterations: int
    residual_history: list[float]
    objective_history: list[float]
    wall_seconds: float
    converged: bool
    theorem5_iteration_bound: int | None = None
    step_delta_norms: list[float] = field(default_factory=list)
    step_sizes: list[float] = field(default_factory=list)
    trajectory: list[QMatrix] = field(default_factory=list)


def _pin_observed(x: QMatrix, m: QMatrix, mask: Mask) -> QMatrix:
    """Copy the observed entries of M into X bitwise."""
    planes = x.planes.copy()
    planes[:, mask.observed] = m.planes[:, mask.observed]
    return QMatrix(planes)


def _data_norm(m: QMatrix, mask: Mask) -> float:
    return max(mask.project(m).norm(), np.finfo(float).tiny)


def _check_rank(m: QMatrix, r: int) -> None:
    k = min(m.rows, m.cols)
    if not 1 <= r <= k:
        raise ValueError(f"truncation rank {r} outside [1, {k}]")


def _factor_rows(x: QMatrix, r: int) -> tuple[TruncatedFactors, np.ndarray]:
    """One QSVD giving both the solver factor rows and the spectrum."""
    k = min(x.rows, x.cols)
    f = qsvd(x)
    uh = f.U.H
    vh = f.V.H
    tf = TruncatedFactors(A=uh[:k, :], B=vh[:k, :],
                          C=uh[:r, :], D=vh[:r, :], r=r)
    return tf, f.sigma


def qtnn_complete(m: QMatrix, mask: Mask, cfg: SolverConfig) -> SolverReport:
    """Two-step solver: factor refresh outside, thresholding ADMM inside.

    Each outer pass re-initializes the inner ADMM from the projected data
    and alternates a singular-value shrink of H - Y/beta, a closed-form H
    update pulled toward the truncated factor product, and a multiplier
    step, with beta growing geometrically up to the cap.
    """
    _check_rank(m, cfg.r)
    if mask.count() == 0:
        raise ValueError("observation mask is empty")
    t0 = time.perf_counter()
    norm_m = _data_norm(m, mask)
    observed = mask.project(m)
    x = observed
    residuals: list[float] = []
    objectives: list[float] = []
    trajectory: list[QMatrix] = []
    total_inner = 0
    converged = False
    outer = 0
    for outer in range(1, cfg.max_outer + 1):
        tf, sigma = _factor_rows(x, cfg.r)
        objectives.append(float(np.sum(sigma[cfg.r:])))
        ctd = tf.C.H @ tf.D
        xi = observed
        h = xi
        y = xi
        beta = cfg.beta0
        for _ in range(cfg.max_inner):
            total_inner += 1
            xi = qsvt(h - (1.0 / beta) * y, 1.0 / beta)
            h = _pin_observed(xi + (1.0 / beta) * (ctd + y), m, mask)
            y = y + beta * (xi - h)
            gap = (xi - h).norm() / norm_m
            beta = min(cfg.rho * beta, cfg.beta_max)
            if gap <= cfg.inner_tol:
                break
        x_new = h
        res = (x_new - x).norm() / norm_m
        residuals.append(res)
        if cfg.record_trajectory:
            trajectory.append(x_new)
        x = x_new
        if res <= cfg.outer_tol:
            converged = True
            break
    return SolverReport(recovered=x, outer_iterations=outer,
                        inner_iterations=total_inner,
                        residual_history=residuals,
                        objective_history=objectives,
                        wall_seconds=time.perf_counter() - t0,
                        converged=converged, trajectory=trajectory)


def theorem5_bound(eps1: float, rho: float, tol: float,
                   w1: np.ndarray, w2: np.ndarray,
                   m_rows: int, r: int) -> int:
    """Iteration cap for the one-step solvers' stopping tolerance.

    The per-step change is at most c / eps_k with
    c = ||W1||_F sqrt(M) + ||W2||_F sqrt(r); with the geometric schedule
    the first step below tol happens by ceil(1 - (ln(eps1*tol) - ln c)/ln rho).
    """
    if eps1 <= 0 or rho <= 1 or tol <= 0:
        raise ValueError("need eps1 > 0, rho > 1, tol > 0")
    c = (float(np.linalg.norm(w1)) * math.sqrt(m_rows)
         + float(np.linalg.norm(w2)) * math.sqrt(r))
    bound = math.ceil(1.0 - (math.log(eps1 * tol) - math.log(c))
                      / math.log(rho))
    return max(1, bound)


def dwqtnn_complete(m: QMatrix, mask: Mask, cfg: SolverConfig) -> SolverReport:
    """One-step gradient descent with separate weights on the two factors.

    Each iteration recomputes the truncated singular factors of the current
    iterate, steps along W1 A^H B - W2 C^H D with step 1/eps_k, re-imposes
    the observed entries, and grows eps geometrically up to the cap.
    """
    _check_rank(m, cfg.r)
    if mask.count() == 0:
        raise ValueError("observation mask is empty")
    t0 = time.perf_counter()
    norm_m = _data_norm(m, mask)
    weights = build_weights(mask, cfg.theta1, cfg.theta2, cfg.weight_side)
    bound = theorem5_bound(cfg.beta0, cfg.rho, cfg.outer_tol,
                           weights.w1, weights.w2, m.rows, cfg.r)
    x = mask.project(m)
    eps = cfg.beta0
    residuals: list[float] = []
    objectives: list[float] = []
    deltas: list[float] = []
    steps: list[float] = []
    trajectory: list[QMatrix] = []
    converged = False
    k = 0
    for k in range(1, cfg.max_outer + 1):
        tf, sigma = _factor_rows(x, cfg.r)
        objectives.append(float(np.sum(sigma[cfg.r:])))
        grad = _weighted_gradient(tf, weights)
        x_step = x - (1.0 / eps) * grad
        deltas.append((x_step - x).norm())
        steps.append(eps)
        x_new = _pin_observed(x_step, m, mask)
        res = (x_new - x).norm() / norm_m
        residuals.append(res)
        if cfg.record_trajectory:
            trajectory.append(x_new)
        eps = min(cfg.rho * eps, cfg.beta_max)
        x = x_new
        if res <= cfg.outer_tol:
            converged = True
            break
    return SolverReport(recovered=x, outer_iterations=k, inner_iterations=k,
                        residual_history=residuals,
                        objective_history=objectives,
                        wall_seconds=time.perf_counter() - t0,
                        converged=converged,
                        theorem5_iteration_bound=bound,
                        step_delta_norms=deltas, step_sizes=steps,
                        trajectory=trajectory)


def _weighted_gradient(tf, weights: WeightSpec) -> QMatrix:
    full = tf.A.H @ tf.B
    trunc = tf.C.H @ tf.D
    if weights.side == "rows":
        return full.scale_rows(weights.w1) - trunc.scale_rows(weights.w2)
    return full.scale_cols(weights.w1) - trunc.scale_cols(weights.w2)


def wqtnn_complete(m: QMatrix, mask: Mask, cfg: SolverConfig) -> SolverReport:
    """Single-weight one-step solver: both factor terms share W = W1."""
    return dwqtnn_complete(m, mask, replace(cfg, theta2=cfg.theta1))


def qnn_svt_baseline(m: QMatrix, mask: Mask, cfg: SolverConfig) -> SolverReport:
    """Untruncated baseline: iterate thresholding plus projection only."""
    if mask.count() == 0:
        raise ValueError("observation mask is empty")
    t0 = time.perf_counter()
    norm_m = _data_norm(m, mask)
    x = mask.project(m)
    beta = cfg.beta0
    residuals: list[float] = []
    converged = False
    k = 0
    for k in range(1, cfg.max_outer + 1):
        x_new = _pin_observed(qsvt(x, 1.0 / beta), m, mask)
        res = (x_new - x).norm() / norm_m
        residuals.append(res)
        beta = min(cfg.rho * beta, cfg.beta_max)
        x = x_new
        if res <= cfg.outer_tol:
            converged = True
            break
    return SolverReport(recovered=x, outer_iterations=k, inner_iterations=k,
                        residual_history=residuals, objective_history=[],
                        wall_seconds=time.perf_counter() - t0,
                        converged=converged)


def step_bound_check(report: SolverReport, w1: np.ndarray, w2: np.ndarray,
                     r: int, slack: float = 1e-8) -> bool:
    """Audit a one-step run: every pre-projection step obeys the norm cap."""
    if not report.step_delta_norms or not report.step_sizes:
        raise HistoryError("report carries no per-iteration step history")
    m_rows = report.recovered.rows
    c = (float(np.linalg.norm(w1)) * math.sqrt(m_rows)
         + float(np.linalg.norm(w2)) * math.sqrt(r))
    return all(delta <= c / eps + slack
               for delta, eps in zip(report.step_delta_norms,
                                     report.step_sizes))


def random_low_rank(m: int, n: int, rank: int, rng: np.random.Generator,
                    scale: float = 1.0) -> QMatrix:
    """Seeded rank-``rank`` quaternion matrix with unit-norm factor columns."""
    from .qsvd import _orthonormalize_columns

    u = _orthonormalize_columns(QMatrix.random(m, rank, rng))
    v = _orthonormalize_columns(QMatrix.random(n, rank, rng))
    return scale * (u @ v.H)


def random_mask(m: int, n: int, p_missing: float,
                rng: np.random.Generator) -> Mask:
    """Each entry missing independently with probability ``p_missing``."""
    return Mask(rng.random((m, n)) >= p_missing)
