"""Fixed-point iterations with periodic SOR acceleration.

Plain iteration x <- f(x) converges locally at rate rho(J*), the spectral
radius of the Jacobian at the fixed point.  The PSOR update

    x <- (1 - omega_k) x + omega_k f(x)

keeps the same fixed point for any factors; choosing the omega_k as
Chebyshev factors for the spectrum bounds of B = I - J* compresses every
period of T iterations by the sech bound of the rate theory.  This module
supplies the engine, local-rate reporting, numerical Jacobians, and the
spectrum machinery for maps of the form f(x) = g(Ax + b) whose Jacobian
Q*A is non-symmetric yet provably real-spectrum.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .chebyshev import RateReport, StepSchedule, rate_report
from .errors import (
    NegativeDerivativeError,
    NonFiniteError,
    SingularMatrixError,
)
from .spectral import SpectralBounds, as_matrix, is_symmetric, sym_eigendecompose
from .trace import IterationTrace

__all__ = [
    "FixedPointOperator",
    "AffineCompositeOperator",
    "PsorConfig",
    "run_fixed_point",
    "run_psor",
    "local_rate_report",
    "jacobian_fd",
    "affine_jacobian_spectrum_check",
    "psor_bounds_from_operator",
]


@dataclass(frozen=True, eq=False)
class FixedPointOperator:
    """A map f: R^dim -> R^dim to be iterated to its fixed point.

    ``jacobian_at`` is optional (finite differences fill in otherwise) and
    ``known_fixed_point``, when given, is validated to actually be one.
    """

    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    jacobian_at: Optional[Callable[[np.ndarray], np.ndarray]] = None
    known_fixed_point: Optional[np.ndarray] = None
    name: str = "operator"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.known_fixed_point is not None:
            xs = np.asarray(self.known_fixed_point, dtype=np.float64).ravel()
            if xs.size != self.dim:
                raise ValueError("known_fixed_point has wrong dimension")
            object.__setattr__(self, "known_fixed_point", xs)
            resid = float(np.linalg.norm(self(xs) - xs))
            if resid > 1e-8 * (1.0 + float(np.linalg.norm(xs))):
                raise ValueError(
                    f"claimed fixed point has residual {resid:.3e}, not a fixed point"
                )

    def __call__(self, x) -> np.ndarray:
        out = np.asarray(self.fn(np.asarray(x, dtype=np.float64)), dtype=np.float64).ravel()
        if out.size != self.dim:
            raise ValueError(f"operator returned length {out.size}, expected {self.dim}")
        return out

    def eval(self, x) -> np.ndarray:
        """Alias for calling the operator."""
        return self(x)

    def jacobian(self, x, h: Optional[float] = None) -> np.ndarray:
        """Jacobian at x: analytic when provided, else central differences."""
        if self.jacobian_at is not None:
            return as_matrix(self.jacobian_at(np.asarray(x, dtype=np.float64)))
        return jacobian_fd(self, x, h)


def _affine_eval(a, b, g):
    def fn(x):
        return g(a @ x + b)

    return fn


@dataclass(frozen=True, eq=False)
class AffineCompositeOperator(FixedPointOperator):
    """f(x) = g(Ax + b) with g applied component-wise.

    ``g_prime`` is the scalar derivative of g; ``g_prime_nonnegative``
    asserts g' >= 0 everywhere, the hypothesis under which the Jacobian
    Q*A has a provably real spectrum.
    """

    a: np.ndarray = None
    b: np.ndarray = None
    g: Callable = None
    g_prime: Callable = None
    g_prime_nonnegative: bool = True

    @classmethod
    def create(
        cls,
        a,
        b,
        g: Callable,
        g_prime: Callable,
        g_prime_nonnegative: bool = True,
        known_fixed_point=None,
        name: str = "affine_composite",
    ) -> "AffineCompositeOperator":
        a = as_matrix(a)
        b = np.asarray(b, dtype=np.float64).ravel()
        if b.size != a.shape[0]:
            raise ValueError("b has wrong dimension")

        def jac(x):
            q = np.asarray(g_prime(a @ np.asarray(x, dtype=np.float64) + b))
            return q[:, None] * a

        return cls(
            dim=a.shape[0],
            fn=_affine_eval(a, b, g),
            jacobian_at=jac,
            known_fixed_point=known_fixed_point,
            name=name,
            a=a,
            b=b,
            g=g,
            g_prime=g_prime,
            g_prime_nonnegative=g_prime_nonnegative,
        )

    def q_diag(self, x) -> np.ndarray:
        """Diagonal of Q at x: g'((Ax + b)_i) per component."""
        z = self.a @ np.asarray(x, dtype=np.float64).ravel() + self.b
        return np.asarray(self.g_prime(z), dtype=np.float64)


@dataclass(frozen=True)
class PsorConfig:
    """PSOR run parameters: periodic factors, iteration budget, stop tolerance.

    ``stop_tol`` tests the fixed-point residual ||f(x) - x||; 0 disables
    early stopping.
    """

    factors: StepSchedule
    max_iters: int
    stop_tol: float = 0.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.stop_tol >= 0.0):
            raise ValueError("stop_tol must be >= 0")


def _error_reference(op: FixedPointOperator, reference) -> tuple[Optional[np.ndarray], str]:
    if reference is not None:
        ref = np.asarray(reference, dtype=np.float64).ravel()
        if ref.size != op.dim:
            raise ValueError("reference has wrong dimension")
        return ref, "reference"
    if op.known_fixed_point is not None:
        return op.known_fixed_point, "known_fixed_point"
    return None, "final_iterate"


def _require_finite(x: np.ndarray, k: int) -> None:
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"iterate became non-finite at iteration {k}")


def run_fixed_point(
    op: FixedPointOperator, x0, iters: int, reference=None
) -> IterationTrace:
    """Plain iteration x <- f(x), tracing the error per iteration.

    Errors are measured against ``reference`` if given, else the operator's
    known fixed point, else the run's own final iterate.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    x = np.asarray(x0, dtype=np.float64).ravel()
    if x.size != op.dim:
        raise ValueError("x0 has wrong dimension")
    ref, ref_kind = _error_reference(op, reference)
    iterates = [x.copy()]
    for k in range(iters):
        x = op(x)
        _require_finite(x, k + 1)
        iterates.append(x.copy())
    target = ref if ref is not None else iterates[-1]
    errors = np.array([float(np.linalg.norm(z - target)) for z in iterates])
    meta = {"method": "fixed_point", "schedule_kind": "constant", "period": 1,
            "operator": op.name, "error_reference": ref_kind}
    return IterationTrace(iterations=np.arange(iters + 1), errors=errors, meta=meta)


def run_psor(op: FixedPointOperator, cfg: PsorConfig, x0, reference=None) -> IterationTrace:
    """PSOR iteration x <- (1 - omega_k) x + omega_k f(x) with periodic factors.

    Computed exactly in that two-term form so omega = 1 reproduces the plain
    iteration bit for bit.  Stops early once ||f(x) - x|| <= stop_tol.
    """
    x = np.asarray(x0, dtype=np.float64).ravel()
    if x.size != op.dim:
        raise ValueError("x0 has wrong dimension")
    ref, ref_kind = _error_reference(op, reference)
    iterates = [x.copy()]
    for k in range(cfg.max_iters):
        fx = op(x)
        if cfg.stop_tol > 0.0 and float(np.linalg.norm(fx - x)) <= cfg.stop_tol:
            break
        w = cfg.factors.step(k)
        x = (1.0 - w) * x + w * fx
        _require_finite(x, k + 1)
        iterates.append(x.copy())
    target = ref if ref is not None else iterates[-1]
    errors = np.array([float(np.linalg.norm(z - target)) for z in iterates])
    meta = {
        "method": "psor",
        "schedule_kind": cfg.factors.kind,
        "period": cfg.factors.period,
        "operator": op.name,
        "error_reference": ref_kind,
    }
    return IterationTrace(iterations=np.arange(len(iterates)), errors=errors, meta=meta)


def local_rate_report(bounds_of_b: SpectralBounds, period: int) -> RateReport:
    """Local convergence rates for PSOR given bounds of B = I - J*.

    Extends the schedule rate report with the plain-iteration radius
    rho_org = max(|1-a|, |1-b|), the rate PSOR is competing against.
    """
    base = rate_report(bounds_of_b, period, rho_org_convention=False)
    a, b = bounds_of_b.lambda_min, bounds_of_b.lambda_max
    rho_org = max(abs(1.0 - a), abs(1.0 - b))
    return RateReport(
        rho_upp_t=base.rho_upp_t,
        rate_per_iter=base.rate_per_iter,
        rate_constant=base.rate_constant,
        rate_lower_bound=base.rate_lower_bound,
        rate_limit=base.rate_limit,
        rho_org=rho_org,
    )


def jacobian_fd(op: FixedPointOperator, x, h: Optional[float] = None) -> np.ndarray:
    """Central-difference Jacobian of the operator at x.

    Default step h = 1e-5 * (1 + ||x||_inf); column j is
    (f(x + h e_j) - f(x - h e_j)) / (2h).
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != op.dim:
        raise ValueError("x has wrong dimension")
    if h is None:
        h = 1e-5 * (1.0 + float(np.max(np.abs(x))))
    jac = np.empty((op.dim, op.dim))
    for j in range(op.dim):
        e = np.zeros_like(x)
        e[j] = h
        fp = op(x + e)
        fm = op(x - e)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise NonFiniteError(f"operator non-finite near x along coordinate {j}")
        jac[:, j] = (fp - fm) / (2.0 * h)
    return jac


def affine_jacobian_spectrum_check(
    op: AffineCompositeOperator, x_star
) -> tuple[bool, np.ndarray]:
    """Certify that J* = Q*A has a real spectrum at the fixed point.

    Q* = diag(g'((Ax*+b)_i)) must be nonnegative and A symmetric; then
    S = Q*^(1/2) A Q*^(1/2) is symmetric with the same spectrum as Q*A.
    Returns (traces_match, eigenvalues of S) where traces_match verifies
    tr((Q*A)^k) = tr(S^k) for k = 1..dim at 1e-6 relative tolerance.
    """
    a = op.a
    if not is_symmetric(a):
        raise ValueError("affine part must be symmetric for the spectrum certificate")
    det = float(np.linalg.det(a))
    if abs(det) < 1e-12:
        raise SingularMatrixError(f"affine part is singular, |det| = {abs(det):.3e}")
    q = op.q_diag(np.asarray(x_star, dtype=np.float64).ravel())
    if np.any(q < 0.0):
        raise NegativeDerivativeError(
            f"g' takes negative values at x*, min = {float(np.min(q)):.3e}"
        )
    sq = np.sqrt(q)
    s = sq[:, None] * a * sq[None, :]
    s = (s + s.T) / 2.0
    eigs = sym_eigendecompose(s).eigenvalues
    j_star = q[:, None] * a
    power = np.eye(op.dim)
    match = True
    for k in range(1, op.dim + 1):
        power = power @ j_star
        tr_j = float(np.trace(power))
        tr_s = float(np.sum(eigs**k))
        tol = 1e-6 * max(1.0, float(np.sum(np.abs(eigs) ** k)))
        if abs(tr_j - tr_s) > tol:
            match = False
            break
    return match, eigs


def _diagonal_symmetrizer(j: np.ndarray, tol: float = 1e-8) -> Optional[np.ndarray]:
    """Positive diagonal d with J diag(d) symmetric, or None.

    Propagates d over the sparsity graph of J (edges where both J_ij and
    J_ji are nonzero): consistency requires d_j / d_i = J_ji / J_ij.
    """
    n = j.shape[0]
    scale = float(np.max(np.abs(j))) if j.size else 0.0
    if scale == 0.0:
        return np.ones(n)
    nz = np.abs(j) > 1e-14 * scale
    # an entry nonzero only on one side cannot be symmetrized by any diagonal
    if np.any(nz != nz.T):
        return None
    d = np.zeros(n)
    for start in range(n):
        if d[start] != 0.0:
            continue
        d[start] = 1.0
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for k in range(n):
                if not nz[i, k] or d[k] != 0.0 or k == i:
                    continue
                ratio = j[k, i] / j[i, k]
                if ratio <= 0.0:
                    return None
                d[k] = d[i] * ratio
                queue.append(k)
    jd = j * d[None, :]
    if not is_symmetric(jd, tol * max(1.0, float(np.max(np.abs(jd))))):
        return None
    return d


def psor_bounds_from_operator(
    op: FixedPointOperator, x_ref, method: str = "auto"
) -> SpectralBounds:
    """Spectrum bounds of B = I - J(x_ref) for building PSOR factors.

    method:
      "symmetric"       B must be symmetric; exact eigenvalue bounds.
      "similarity"      affine-composite similarity S = Q^(1/2) A Q^(1/2),
                        or a positive diagonal similarity discovered from J.
      "symmetric_part"  bounds of (B + B^T)/2, a heuristic for genuinely
                        non-normal J (warns).
      "auto"            first of the above that applies.
    """
    if method not in ("auto", "symmetric", "similarity", "symmetric_part"):
        raise ValueError(f"unknown bounds method {method!r}")
    x_ref = np.asarray(x_ref, dtype=np.float64).ravel()
    j = op.jacobian(x_ref)
    b = np.eye(op.dim) - j

    def bounds_of(sym_matrix) -> SpectralBounds:
        eigs = sym_eigendecompose((sym_matrix + sym_matrix.T) / 2.0).eigenvalues
        return SpectralBounds(lambda_min=float(eigs[0]), lambda_max=float(eigs[-1]))

    if method in ("auto", "symmetric"):
        if is_symmetric(b, 1e-10 * max(1.0, float(np.max(np.abs(b))))):
            return bounds_of(b)
        if method == "symmetric":
            raise ValueError("B = I - J is not symmetric at x_ref")

    if method in ("auto", "similarity"):
        if isinstance(op, AffineCompositeOperator) and is_symmetric(op.a):
            q = op.q_diag(x_ref)
            if np.any(q < 0.0):
                raise NegativeDerivativeError("g' negative at x_ref")
            sq = np.sqrt(q)
            s = sq[:, None] * op.a * sq[None, :]
            eigs = sym_eigendecompose((s + s.T) / 2.0).eigenvalues
            return SpectralBounds(
                lambda_min=float(1.0 - eigs[-1]), lambda_max=float(1.0 - eigs[0])
            )
        d = _diagonal_symmetrizer(j)
        if d is not None:
            sq = np.sqrt(d)
            m = (1.0 / sq)[:, None] * j * sq[None, :]
            eigs = sym_eigendecompose((m + m.T) / 2.0).eigenvalues
            return SpectralBounds(
                lambda_min=float(1.0 - eigs[-1]), lambda_max=float(1.0 - eigs[0])
            )
        if method == "similarity":
            raise ValueError("no diagonal similarity symmetrizes J at x_ref")

    warnings.warn(
        "J is not diagonally symmetrizable; returning symmetric-part bounds, "
        "which only bracket the real parts of the spectrum",
        RuntimeWarning,
        stacklevel=2,
    )
    return bounds_of(b)
