"""Chebyshev polynomials, step schedules, and worst-case rate theory.

A length-T Chebyshev step schedule for spectrum bounds 0 < a < b is

    gamma_t = 1 / (lam_plus + lam_minus * cos((2t+1) pi / (2T))),  t = 0..T-1,

with lam_plus = (b+a)/2 and lam_minus = (b-a)/2.  The inverse steps are the
Chebyshev nodes mapped onto [a, b], so the period-T error polynomial
beta_T(lam) = prod_t (1 - gamma_t lam) equioscillates on [a, b] with peak

    rho_upp(T) = sech(T * acosh((kappa+1)/(kappa-1))),  kappa = b/a,

which beats the optimal-constant-step radius ((kappa-1)/(kappa+1))^T for
every T >= 2.  The same factors serve as periodic SOR relaxation parameters
when applied to the bounds of B = I - J at a fixed point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateSpectrumError, SizeLimitError
from .spectral import SpectralBounds

__all__ = [
    "StepSchedule",
    "RateReport",
    "cheb_eval",
    "cheb_nodes",
    "chebyshev_steps",
    "chebyshev_psor_factors",
    "constant_schedule",
    "beta_t",
    "rho_upp",
    "rate_report",
    "theorem2_margin",
    "permutation_search",
    "save_schedule",
    "load_schedule",
]

SCHEDULE_KINDS = ("constant", "chebyshev", "chebyshev_permuted", "momentum_aux", "custom")


@dataclass(frozen=True, eq=False)
class StepSchedule:
    """Periodic step-size schedule.

    ``steps`` is the one-period array applied cyclically; ``kind`` records
    how it was generated.
    """

    steps: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        arr = np.asarray(self.steps, dtype=np.float64).ravel()
        if arr.size == 0:
            raise ValueError("schedule must contain at least one step")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError("steps must be positive and finite")
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        object.__setattr__(self, "steps", arr)

    @property
    def period(self) -> int:
        return int(self.steps.size)

    def step(self, t: int) -> float:
        """Step applied at iteration t (cyclic)."""
        return float(self.steps[t % self.steps.size])


@dataclass(frozen=True)
class RateReport:
    """Worst-case rate summary for spectrum bounds (a, b), kappa = b/a.

    rho_upp_t        per-period contraction bound sech(T acosh((k+1)/(k-1)))
    rate_per_iter    rho_upp_t ** (1/T)
    rate_constant    optimal-constant-step rate (k-1)/(k+1)
    rate_lower_bound (sqrt(k)-1)/(sqrt(k)+1), the T -> inf limit
    rate_limit       exp(-acosh((b+a)/(b-a))), equal to rate_lower_bound
    rho_org          plain-iteration rate 1 - a when the b = 1 convention
                     applies, else None
    """

    rho_upp_t: float
    rate_per_iter: float
    rate_constant: float
    rate_lower_bound: float
    rate_limit: float
    rho_org: Optional[float] = None


def cheb_eval(n: int, x: float) -> float:
    """Chebyshev polynomial C_n(x): three-term recurrence for |x| <= 1, cosh form outside."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    x = float(x)
    if abs(x) <= 1.0:
        c_prev, c_cur = 1.0, x
        if n == 0:
            return 1.0
        for _ in range(n - 1):
            c_prev, c_cur = c_cur, 2.0 * x * c_cur - c_prev
        return c_cur
    sign = 1.0 if (x > 0.0 or n % 2 == 0) else -1.0
    return sign * math.cosh(n * math.acosh(abs(x)))


def cheb_nodes(n: int) -> np.ndarray:
    """Chebyshev nodes cos((2k+1) pi / (2n)), k = 0..n-1, strictly decreasing.

    Built from the first half and mirrored so that node pairs are exactly
    antisymmetric and the middle node of an odd count is exactly 0.0.
    """
    if n < 1:
        raise ValueError("need n >= 1 nodes")
    half = np.cos((2.0 * np.arange(n // 2) + 1.0) * np.pi / (2.0 * n))
    mid = np.array([0.0]) if n % 2 else np.empty(0)
    return np.concatenate([half, mid, -half[::-1]])


def _validated_cheb_bounds(bounds: SpectralBounds) -> tuple[float, float]:
    a, b = bounds.lambda_min, bounds.lambda_max
    if a <= 0.0 or a == b:
        raise DegenerateSpectrumError(
            f"Chebyshev construction needs 0 < lambda_min < lambda_max, got ({a}, {b})"
        )
    return a, b


def chebyshev_steps(bounds: SpectralBounds, period: int) -> StepSchedule:
    """Chebyshev step schedule of length ``period`` for the given bounds.

    Steps are stored in the natural descending-node order (ascending step
    size); period 1 reduces exactly to the optimal constant step
    2/(lambda_min + lambda_max).
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    a, b = _validated_cheb_bounds(bounds)
    lam_plus = (b + a) / 2.0
    lam_minus = (b - a) / 2.0
    steps = 1.0 / (lam_plus + lam_minus * cheb_nodes(period))
    return StepSchedule(steps=steps, kind="chebyshev")


def chebyshev_psor_factors(bounds: SpectralBounds, period: int) -> StepSchedule:
    """Chebyshev-periodical SOR factors for bounds of B = I - J.

    Identical formula to :func:`chebyshev_steps`; period 1 is the optimal
    constant relaxation factor 2/(a + b).  Factors may exceed 1
    (over-relaxation) and straddle 2/(a+b) for period >= 2.
    """
    return chebyshev_steps(bounds, period)


def constant_schedule(step: float, period: int = 1) -> StepSchedule:
    """Constant schedule with the given step repeated ``period`` times."""
    return StepSchedule(steps=np.full(period, float(step)), kind="constant")


def beta_t(schedule: StepSchedule, lam):
    """Period polynomial beta_T(lam) = prod_t (1 - gamma_t * lam).

    Accepts a scalar or an array of eigenvalues; beta_T(0) = 1 always.
    """
    lam_arr = np.asarray(lam, dtype=np.float64)
    factors = 1.0 - np.outer(schedule.steps, lam_arr.ravel())
    out = np.prod(factors, axis=0).reshape(lam_arr.shape)
    return float(out) if np.isscalar(lam) or lam_arr.ndim == 0 else out


def _acosh_ratio(bounds: SpectralBounds) -> float:
    a, b = _validated_cheb_bounds(bounds)
    return math.acosh((b + a) / (b - a))


def rho_upp(bounds: SpectralBounds, period: int) -> float:
    """Per-period worst-case contraction sech(T acosh((kappa+1)/(kappa-1))).

    Evaluated through exp(-z) so that large T * kappa cannot overflow; the
    result is strictly below 1 and decreases monotonically in T.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    z = period * _acosh_ratio(bounds)
    e = math.exp(-z)
    return 2.0 * e / (1.0 + e * e)


def _log_rho_upp(bounds: SpectralBounds, period: int) -> float:
    z = period * _acosh_ratio(bounds)
    return math.log(2.0) - z - math.log1p(math.exp(-2.0 * z))


def rate_report(bounds: SpectralBounds, period: int, rho_org_convention: bool = True) -> RateReport:
    """Rate summary for the bounds at the given period.

    The per-iteration rate is computed in log space from rho_upp so that
    deeply contracting schedules (rho underflowing toward 0) still report a
    meaningful geometric mean.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    a, b = _validated_cheb_bounds(bounds)
    kappa = b / a
    sk = math.sqrt(kappa)
    rho = rho_upp(bounds, period)
    per_iter = math.exp(_log_rho_upp(bounds, period) / period)
    rho_org = None
    if rho_org_convention and abs(b - 1.0) <= 1e-12:
        rho_org = 1.0 - a
    return RateReport(
        rho_upp_t=rho,
        rate_per_iter=per_iter,
        rate_constant=(kappa - 1.0) / (kappa + 1.0),
        rate_lower_bound=(sk - 1.0) / (sk + 1.0),
        rate_limit=math.exp(-_acosh_ratio(bounds)),
        rho_org=rho_org,
    )


def theorem2_margin(bounds: SpectralBounds, period: int) -> float:
    """((kappa-1)/(kappa+1))**T - rho_upp(T), strictly positive for T >= 2."""
    if period < 2:
        raise ValueError("margin is defined for period >= 2")
    a, b = _validated_cheb_bounds(bounds)
    kappa = b / a
    return ((kappa - 1.0) / (kappa + 1.0)) ** period - rho_upp(bounds, period)


def permutation_search(bounds: SpectralBounds, period: int, u: float = 0.3) -> StepSchedule:
    """Zig-zag ordering of the Chebyshev steps by incremental permutation search.

    Starting from the single optimal constant step, each generation t appends
    ``u`` to the current vector, regenerates the length-t Chebyshev steps,
    and keeps the permutation of them closest (Euclidean) to that target.
    Permutations are enumerated exhaustively in lexicographic order and ties
    keep the first minimizer found.  The returned schedule is a reordering of
    ``chebyshev_steps(bounds, period)``.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    if period > 10:
        raise SizeLimitError("permutation search is limited to period <= 10")
    _validated_cheb_bounds(bounds)
    current = [chebyshev_steps(bounds, 1).step(0)]
    for t in range(2, period + 1):
        target = tuple(current) + (float(u),)
        cand = tuple(chebyshev_steps(bounds, t).steps)
        best_dist = math.inf
        best = cand
        for perm in itertools.permutations(range(t)):
            dist = 0.0
            for i in range(t):
                diff = target[i] - cand[perm[i]]
                dist += diff * diff
            if dist < best_dist:
                best_dist = dist
                best = tuple(cand[p] for p in perm)
        current = list(best)
    return StepSchedule(steps=np.array(current), kind="chebyshev_permuted")


def save_schedule(path, schedule: StepSchedule, bounds: Optional[SpectralBounds] = None) -> None:
    """Write a schedule as a single-column CSV with a descriptive header comment."""
    with open(path, "w", encoding="ascii") as fh:
        if bounds is not None:
            fh.write(f"#bounds={bounds.lambda_min:.17g},{bounds.lambda_max:.17g}\n")
        fh.write(f"#T={schedule.period}\n")
        fh.write(f"#kind={schedule.kind}\n")
        fh.write("gamma\n")
        for v in schedule.steps:
            fh.write(f"{v:.17g}\n")


def load_schedule(path) -> StepSchedule:
    """Read a schedule written by :func:`save_schedule`."""
    kind = "custom"
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("#kind="):
                    kind = line.split("=", 1)[1]
                continue
            if line == "gamma":
                continue
            values.append(float(line))
    return StepSchedule(steps=np.array(values), kind=kind)
