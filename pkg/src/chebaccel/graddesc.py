"""Gradient descent on quadratics with pluggable step schedules.

The objective is f(x) = x^T A x / 2 with A symmetric positive definite, so
the minimizer sits at the origin and one GD step is x <- (I - gamma_t A) x.
Alongside schedule-driven GD the module provides the two classical
accelerated baselines (heavy-ball momentum and the Chebyshev semi-iterative
method), exact spectral-radius analysis of the period-T product matrix
Q^(T) = prod_t (I - gamma_t A), and the isotropic-MSE identity
n * E L = sum_i beta_T(lambda_i)^2 that lower-bounds rho(Q^(T))^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chebyshev import StepSchedule, beta_t
from .errors import DegenerateSpectrumError
from .spectral import (
    Eigendecomposition,
    SpectralBounds,
    as_matrix,
    sym_eigendecompose,
)
from .trace import IterationTrace

__all__ = [
    "QuadraticProblem",
    "make_gaussian_gram_problem",
    "run_gd",
    "run_momentum",
    "run_chebyshev_semi",
    "chebyshev_semi_coefficients",
    "spectral_radius_qt",
    "mse_radius_identity",
]


@dataclass(frozen=True, eq=False)
class QuadraticProblem:
    """Quadratic objective x^T a x / 2 with its spectral data.

    The minimizer is pinned at the origin; ``bounds`` are the extreme
    eigenvalues of ``a`` and ``decomposition`` the full eigensystem when
    available.  ``metadata`` carries provenance of generated instances.
    """

    a: np.ndarray
    bounds: SpectralBounds
    decomposition: Optional[Eigendecomposition] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bounds.lambda_min <= 0.0:
            raise DegenerateSpectrumError(
                f"quadratic problem needs a positive definite matrix, "
                f"lambda_min = {self.bounds.lambda_min}"
            )

    @classmethod
    def from_matrix(cls, a, metadata: Optional[dict] = None) -> "QuadraticProblem":
        """Build a problem from a symmetric PD matrix, with exact bounds."""
        a = as_matrix(a)
        dec = sym_eigendecompose(a)
        bounds = SpectralBounds(
            lambda_min=float(dec.eigenvalues[0]), lambda_max=float(dec.eigenvalues[-1])
        )
        return cls(a=a, bounds=bounds, decomposition=dec, metadata=dict(metadata or {}))

    @property
    def n(self) -> int:
        return int(self.a.shape[0])

    @property
    def minimizer(self) -> np.ndarray:
        return np.zeros(self.n)

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * float(x @ (self.a @ x))

    def gradient(self, x) -> np.ndarray:
        return self.a @ np.asarray(x, dtype=np.float64)

    def error(self, x) -> float:
        """Distance to the minimizer, ||x||_2."""
        return float(np.linalg.norm(x))

    def condition_number(self) -> float:
        return self.bounds.lambda_max / self.bounds.lambda_min


def make_gaussian_gram_problem(n: int, m: int, seed: int) -> QuadraticProblem:
    """Random Gram problem A = H^T H with H (m x n), entries N(0, 1/n).

    For m >= n the spectrum concentrates on the Marchenko-Pastur support
    [(1 - sqrt(m/n))^2, (1 + sqrt(m/n))^2]; both predictions are recorded in
    the metadata next to the instance's exact extreme eigenvalues.
    """
    if not (m >= n >= 2):
        raise ValueError("need m >= n >= 2")
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((m, n)) / math.sqrt(n)
    a = h.T @ h
    a = (a + a.T) / 2.0
    r = math.sqrt(m / n)
    meta = {
        "kind": "gaussian_gram",
        "n": n,
        "m": m,
        "seed": seed,
        "mp_lambda_min": (1.0 - r) ** 2,
        "mp_lambda_max": (1.0 + r) ** 2,
    }
    return QuadraticProblem.from_matrix(a, metadata=meta)


def _check_x0(p: QuadraticProblem, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    if x0.size != p.n:
        raise ValueError(f"x0 has length {x0.size}, problem dimension is {p.n}")
    return x0


def _base_meta(p: QuadraticProblem, method: str, schedule_kind: str) -> dict:
    return {
        "method": method,
        "schedule_kind": schedule_kind,
        "lambda_min": p.bounds.lambda_min,
        "lambda_max": p.bounds.lambda_max,
    }


def run_gd(p: QuadraticProblem, schedule: StepSchedule, x0, iters: int) -> IterationTrace:
    """Gradient descent with the periodic schedule, tracing ||x^(k)||.

    Trace length is iters + 1, with entry 0 the initial distance.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    x = _check_x0(p, x0)
    errors = np.empty(iters + 1)
    errors[0] = p.error(x)
    for t in range(iters):
        x = x - schedule.step(t) * (p.a @ x)
        errors[t + 1] = p.error(x)
    meta = _base_meta(p, "gd", schedule.kind)
    meta["period"] = schedule.period
    return IterationTrace(iterations=np.arange(iters + 1), errors=errors, meta=meta)


def run_momentum(p: QuadraticProblem, x0, iters: int) -> IterationTrace:
    """Heavy-ball baseline with the optimal fixed coefficients.

    gamma' = 4/(sqrt(lambda_min)+sqrt(lambda_max))^2 and
    beta = ((sqrt(kappa)-1)/(sqrt(kappa)+1))^2, started from x^(-1) = 0.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    a_min, a_max = p.bounds.lambda_min, p.bounds.lambda_max
    if a_min == a_max:
        raise DegenerateSpectrumError("momentum coefficients degenerate at kappa = 1")
    gamma = 4.0 / (math.sqrt(a_min) + math.sqrt(a_max)) ** 2
    sk = math.sqrt(a_max / a_min)
    beta = ((sk - 1.0) / (sk + 1.0)) ** 2
    x = _check_x0(p, x0)
    x_prev = np.zeros_like(x)
    errors = np.empty(iters + 1)
    errors[0] = p.error(x)
    for t in range(iters):
        x_next = x - gamma * (p.a @ x) + beta * (x - x_prev)
        x_prev, x = x, x_next
        errors[t + 1] = p.error(x)
    meta = _base_meta(p, "momentum", "momentum_aux")
    meta["gamma_prime"] = gamma
    meta["beta"] = beta
    return IterationTrace(iterations=np.arange(iters + 1), errors=errors, meta=meta)


def chebyshev_semi_coefficients(kappa: float, count: int) -> np.ndarray:
    """First ``count`` coefficients gamma'_1..gamma'_count of the semi-iterative recursion.

    gamma'_1 = 1, gamma'_2 = 2/(2 - xi^2), gamma'_{t+1} = 4/(4 - xi^2 gamma'_t)
    with xi = 1 - 1/kappa.  The sequence decreases monotonically from t = 2
    toward the fixed point g* = 2(1 - sqrt(1 - xi^2))/xi^2.
    """
    if kappa <= 1.0:
        raise DegenerateSpectrumError("semi-iterative coefficients need kappa > 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    xi2 = (1.0 - 1.0 / kappa) ** 2
    out = np.empty(count)
    out[0] = 1.0
    if count >= 2:
        out[1] = 2.0 / (2.0 - xi2)
    for t in range(2, count):
        out[t] = 4.0 / (4.0 - xi2 * out[t - 1])
    return out


def run_chebyshev_semi(p: QuadraticProblem, x0, iters: int) -> IterationTrace:
    """Chebyshev semi-iterative baseline.

    x^(t+1) = (I - gamma'_{t+1} B) x^(t) + (gamma'_{t+1} - 1)(x^(t) - x^(t-1))
    with x^(-1) = 0.  The recursion's xi = 1 - 1/kappa is the spectral radius
    of I - A/lambda_max, so the matrix applied is B = A/lambda_max; with the
    raw A the coefficients mismatch the spectrum and the iteration diverges.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    kappa = p.condition_number()
    coeffs = chebyshev_semi_coefficients(kappa, iters)
    b = p.a / p.bounds.lambda_max
    x = _check_x0(p, x0)
    x_prev = np.zeros_like(x)
    errors = np.empty(iters + 1)
    errors[0] = p.error(x)
    for t in range(iters):
        g = coeffs[t]
        x_next = x - g * (b @ x) + (g - 1.0) * (x - x_prev)
        x_prev, x = x, x_next
        errors[t + 1] = p.error(x)
    meta = _base_meta(p, "chebyshev_semi", "momentum_aux")
    meta["xi"] = 1.0 - 1.0 / kappa
    return IterationTrace(iterations=np.arange(iters + 1), errors=errors, meta=meta)


def _require_decomposition(p: QuadraticProblem) -> Eigendecomposition:
    if p.decomposition is None:
        raise ValueError("operation needs the problem's eigendecomposition")
    return p.decomposition


def spectral_radius_qt(p: QuadraticProblem, schedule: StepSchedule) -> float:
    """Exact spectral radius of Q^(T) = prod_t (I - gamma_t A).

    Q^(T) shares eigenvectors with A, so the radius is
    max_i |beta_T(lambda_i)| over the eigenvalues of A.
    """
    dec = _require_decomposition(p)
    return float(np.max(np.abs(beta_t(schedule, dec.eigenvalues))))


def mse_radius_identity(
    p: QuadraticProblem, schedule: StepSchedule, samples: int, seed: int
) -> tuple[float, float]:
    """Spectral radius vs the isotropic mean-square loss of one period.

    Returns (rho(Q^(T)), sqrt(n * E_hat L)) where E_hat L is the Monte-Carlo
    mean of ||Q^(T) x0||^2 / n over x0 with i.i.d. standard Gaussian
    components.  The analytic value of n * E L is sum_i beta_T(lambda_i)^2,
    which bounds rho^2 from above, so sqrt(n E L) -> an upper bound on rho.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    dec = _require_decomposition(p)
    betas = beta_t(schedule, dec.eigenvalues)
    rho = float(np.max(np.abs(betas)))
    analytic = float(np.sum(betas**2))
    # max of a finite set of squares cannot exceed their sum
    assert rho**2 <= analytic * (1.0 + 1e-12) + 1e-300
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, p.n))
    proj = z @ dec.eigenvectors
    sq_norms = (proj**2) @ (betas**2)
    n_mean_loss = float(np.mean(sq_norms))
    return rho, math.sqrt(n_mean_loss)
