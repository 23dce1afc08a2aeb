"""Dense symmetric-matrix utilities: eigendecomposition, power iteration, spectral bounds.

Matrices are plain 2-D C-contiguous float64 ``numpy.ndarray`` objects.  Only
real symmetric input is supported; there is deliberately no general
nonsymmetric eigensolver here (non-symmetric Jacobians are handled by a
similarity trick in :mod:`chebaccel.psor`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpectrumError,
    NoConvergenceError,
    NotSymmetricError,
)

__all__ = [
    "SpectralBounds",
    "Eigendecomposition",
    "as_matrix",
    "is_symmetric",
    "sym_eigendecompose",
    "power_iteration_max",
    "estimate_bounds",
    "condition_number",
    "save_matrix",
    "load_matrix",
]


def as_matrix(a, square: bool = True) -> np.ndarray:
    """Coerce input to a 2-D float64 array, optionally requiring it square."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def is_symmetric(a, tol: float = 1e-10) -> bool:
    """True when |a_ij - a_ji| <= tol * max(1, |a_ij|) for every entry."""
    m = as_matrix(a)
    return bool(np.all(np.abs(m - m.T) <= tol * np.maximum(1.0, np.abs(m))))


@dataclass(frozen=True)
class SpectralBounds:
    """Closed interval [lambda_min, lambda_max] containing a real spectrum.

    The general constructor allows lambda_min >= 0; Chebyshev-step
    constructors impose the stricter 0 < lambda_min < lambda_max themselves.
    """

    lambda_min: float
    lambda_max: float

    def __post_init__(self):
        lo, hi = float(self.lambda_min), float(self.lambda_max)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("bounds must be finite")
        if lo < 0.0:
            raise ValueError(f"lambda_min must be >= 0, got {lo}")
        if hi < lo:
            raise ValueError(f"lambda_max {hi} < lambda_min {lo}")
        object.__setattr__(self, "lambda_min", lo)
        object.__setattr__(self, "lambda_max", hi)


@dataclass(frozen=True, eq=False)
class Eigendecomposition:
    """Eigenvalues in ascending order; eigenvectors as orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Return U diag(w) U^T."""
        u, w = self.eigenvectors, self.eigenvalues
        return (u * w) @ u.T


def sym_eigendecompose(a, tol: float = 1e-10) -> Eigendecomposition:
    """Full eigendecomposition of a real symmetric matrix.

    Parameters
    ----------
    a : array_like
        Square real symmetric matrix (desk scale, n <= ~2048).
    tol : float
        Symmetry-gate tolerance.

    Raises
    ------
    NotSymmetricError
        If the symmetry check fails at ``tol``.
    NoConvergenceError
        If the underlying solver fails to converge.
    """
    m = as_matrix(a)
    if not is_symmetric(m, tol):
        raise NotSymmetricError("matrix is not symmetric within tolerance")
    try:
        w, u = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(f"eigendecomposition failed: {exc}") from exc
    return Eigendecomposition(eigenvalues=w, eigenvectors=u)


def power_iteration_max(
    a,
    max_iters: int = 10000,
    tol: float = 1e-8,
    seed: int = 0,
) -> float:
    """Largest-magnitude eigenvalue of a symmetric matrix by power iteration.

    Starts from a seeded unit Gaussian vector and iterates the Rayleigh
    quotient until successive estimates agree to ``tol`` relative.  The zero
    matrix (and any vector annihilated exactly) yields 0.0.

    Raises
    ------
    NoConvergenceError
        When the budget runs out; the exception carries ``estimate``.
    """
    m = as_matrix(a)
    n = m.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = float(v @ (m @ v))
    for _ in range(max_iters):
        w = m @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam_new = float(v @ (m @ v))
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    raise NoConvergenceError(
        f"power iteration did not converge in {max_iters} iterations",
        estimate=lam,
    )


def estimate_bounds(a, method: str = "exact", seed: int = 0) -> SpectralBounds:
    """Spectral bounds of a symmetric positive semidefinite matrix.

    ``method="exact"`` takes the extreme eigenvalues of the full
    decomposition.  ``method="power_shift"`` runs power iteration for
    lambda_max, then recovers lambda_min = c - lambda_max(c*I - a) with the
    shift c = lambda_max (valid for positive semidefinite input).
    """
    m = as_matrix(a)
    if method == "exact":
        decomp = sym_eigendecompose(m)
        lo = float(decomp.eigenvalues[0])
        hi = float(decomp.eigenvalues[-1])
    elif method == "power_shift":
        hi = power_iteration_max(m, seed=seed)
        shifted = hi * np.eye(m.shape[0]) - m
        lo = hi - power_iteration_max(shifted, seed=seed + 1)
    else:
        raise ValueError(f"unknown method {method!r}")
    # roundoff guard: a semidefinite matrix may report a tiny negative floor
    if lo < 0.0 and abs(lo) <= 1e-10 * max(1.0, abs(hi)):
        lo = 0.0
    return SpectralBounds(lambda_min=lo, lambda_max=hi)


def condition_number(b: SpectralBounds) -> float:
    """lambda_max / lambda_min; degenerate when lambda_min <= 0."""
    if b.lambda_min <= 0.0:
        raise DegenerateSpectrumError(
            f"condition number undefined for lambda_min={b.lambda_min}"
        )
    return b.lambda_max / b.lambda_min


def save_matrix(path, a) -> None:
    """Write a matrix in the plain-text format: 'rows cols' header, row-major values."""
    m = as_matrix(a, square=False)
    rows, cols = m.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{rows} {cols}\n")
        for row in m:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix` (whitespace tolerant)."""
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError("matrix file missing 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = np.array([float(t) for t in tokens[2:]], dtype=np.float64)
    if values.size != rows * cols:
        raise ValueError(
            f"matrix file has {values.size} values, expected {rows * cols}"
        )
    return values.reshape(rows, cols)
