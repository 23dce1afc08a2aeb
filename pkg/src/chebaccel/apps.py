"""Concrete solvers built on the fixed-point engine.

Three families:

* Jacobi iteration for linear systems Px = q, whose SOR form is the classic
  testbed for Chebyshev-periodical relaxation factors;
* Lasso sparse recovery via ISTA with a smoothed shrinkage (so the iteration
  map is differentiable and the affine-composite spectrum machinery
  applies), plus a FISTA baseline;
* modified Richardson iteration for inverting a nonlinear observation map,
  instantiated as image deblurring through a blur kernel and a sigmoid.

All problem generators are seeded and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import StepTooLargeError, ZeroDiagonalError
from .psor import AffineCompositeOperator, FixedPointOperator
from .spectral import as_matrix
from .trace import IterationTrace

__all__ = [
    "LinearSystem",
    "jacobi_operator",
    "LassoProblem",
    "make_lasso_problem",
    "soft_shrink",
    "soft_shrink_smooth",
    "soft_shrink_smooth_prime",
    "softplus",
    "sigmoid",
    "sigmoid_prime",
    "lasso_objective",
    "ista_operator",
    "fista_path",
    "run_fista",
    "richardson_operator",
    "BlurModel",
    "default_blur_kernel",
    "conv2d_same",
    "blur_matrix",
    "make_blur_forward",
    "make_sparse_blob_image",
]


# ---------------------------------------------------------------- Jacobi


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Linear system P x = q with nonzero diagonal (Jacobi-splittable)."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = as_matrix(self.p)
        q = np.asarray(self.q, dtype=np.float64).ravel()
        if q.size != p.shape[0]:
            raise ValueError("q has wrong dimension")
        d = np.diag(p)
        if np.any(np.abs(d) < 1e-300):
            raise ZeroDiagonalError("Jacobi splitting needs a nonzero diagonal")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return int(self.p.shape[0])


def jacobi_operator(sys: LinearSystem, solve_fixed_point: bool = True) -> FixedPointOperator:
    """Jacobi iteration map f(x) = D^-1 (q - (P - D) x) for P x = q.

    The Jacobian is the constant matrix I - D^-1 P.  With
    ``solve_fixed_point`` the exact solution is attached as the operator's
    known fixed point (direct solve; intended for the moderate sizes this
    package targets).
    """
    d = np.diag(sys.p)
    off = sys.p - np.diag(d)
    j = -off / d[:, None]

    def fn(x):
        return (sys.q - off @ x) / d

    known = None
    if solve_fixed_point:
        known = np.linalg.solve(sys.p, sys.q)
    return FixedPointOperator(
        dim=sys.n,
        fn=fn,
        jacobian_at=lambda x: j,
        known_fixed_point=known,
        name="jacobi",
    )


# ---------------------------------------------------------------- Lasso


@dataclass(frozen=True, eq=False)
class LassoProblem:
    """Lasso instance y = M x_true + w with the ISTA parameters attached.

    gamma is the gradient step, tau the shrinkage threshold (the implicit
    regularization weight is lambda = tau/gamma), beta_sp the sharpness of
    the smoothed shrinkage.  ``lam_max_gram`` caches lambda_max(M^T M).
    """

    m_sense: np.ndarray
    y: np.ndarray
    x_true: np.ndarray
    p_sparsity: float
    sigma: float
    gamma: float
    tau: float
    beta_sp: float = 100.0
    seed: Optional[int] = None
    lam_max_gram: Optional[float] = None

    @property
    def n(self) -> int:
        return int(self.m_sense.shape[1])

    @property
    def m(self) -> int:
        return int(self.m_sense.shape[0])

    def gram(self) -> np.ndarray:
        return self.m_sense.T @ self.m_sense

    def nmse(self, x) -> float:
        """Normalized squared error ||x - x_true||^2 / n."""
        diff = np.asarray(x, dtype=np.float64).ravel() - self.x_true
        return float(diff @ diff) / self.n


def make_lasso_problem(
    n: int, m: int, p: float, sigma: float, seed: int, beta_sp: float = 100.0
) -> LassoProblem:
    """Random Lasso instance: Bernoulli(p)-Gaussian source, N(0,1) sensing.

    gamma = tau = 1/lambda_max(M^T M), the largest step with guaranteed
    proximal-gradient descent.
    """
    if not (0.0 < p < 1.0):
        raise ValueError("sparsity p must lie in (0, 1)")
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    rng = np.random.default_rng(seed)
    mask = rng.random(n) < p
    x_true = np.where(mask, rng.standard_normal(n), 0.0)
    m_sense = rng.standard_normal((m, n))
    w = sigma * rng.standard_normal(m)
    y = m_sense @ x_true + w
    lam_max = float(np.linalg.eigvalsh(m_sense.T @ m_sense)[-1])
    step = 1.0 / lam_max
    return LassoProblem(
        m_sense=m_sense,
        y=y,
        x_true=x_true,
        p_sparsity=p,
        sigma=sigma,
        gamma=step,
        tau=step,
        beta_sp=beta_sp,
        seed=seed,
        lam_max_gram=lam_max,
    )


def soft_shrink(x, tau: float):
    """Soft shrinkage sign(x) * max(|x| - tau, 0); scalar or array."""
    if tau < 0.0:
        raise ValueError("tau must be >= 0")
    x_arr = np.asarray(x, dtype=np.float64)
    out = np.sign(x_arr) * np.maximum(np.abs(x_arr) - tau, 0.0)
    return float(out) if out.ndim == 0 else out


def softplus(z, beta_sp: float):
    """Softplus (1/beta) ln(1 + e^(beta z)), overflow-safe for any z."""
    z_arr = np.asarray(z, dtype=np.float64)
    out = np.maximum(z_arr, 0.0) + np.log1p(np.exp(-beta_sp * np.abs(z_arr))) / beta_sp
    return float(out) if out.ndim == 0 else out


def soft_shrink_smooth(x, tau: float, beta_sp: float):
    """Differentiable soft shrinkage s_p(x - tau) - s_p(-(x + tau)).

    Built from softplus ramps; odd in x, monotone, 1-Lipschitz, and within
    2 ln(2)/beta_sp of the exact shrinkage everywhere.
    """
    if beta_sp <= 0.0:
        raise ValueError("beta_sp must be > 0")
    x_arr = np.asarray(x, dtype=np.float64)
    out = softplus(x_arr - tau, beta_sp) - softplus(-(x_arr + tau), beta_sp)
    return float(out) if np.ndim(out) == 0 else out


def soft_shrink_smooth_prime(x, tau: float, beta_sp: float):
    """Derivative of the smooth shrinkage: a sum of two sigmoids, in (0, 1)."""
    if beta_sp <= 0.0:
        raise ValueError("beta_sp must be > 0")
    x_arr = np.asarray(x, dtype=np.float64)
    out = sigmoid(beta_sp * (x_arr - tau)) + sigmoid(-beta_sp * (x_arr + tau))
    return float(out) if np.ndim(out) == 0 else out


def sigmoid(z):
    """Logistic function, evaluated without overflow on either tail."""
    z_arr = np.asarray(z, dtype=np.float64)
    ep = np.exp(-np.clip(z_arr, 0.0, None))
    en = np.exp(np.clip(z_arr, None, 0.0))
    out = np.where(z_arr >= 0.0, 1.0 / (1.0 + ep), en / (1.0 + en))
    return float(out) if out.ndim == 0 else out


def sigmoid_prime(z):
    """Derivative of the logistic function, in (0, 0.25]."""
    s = np.asarray(sigmoid(z))
    out = s * (1.0 - s)
    return float(out) if out.ndim == 0 else out


def lasso_objective(lp: LassoProblem, x) -> float:
    """(1/2)||y - Mx||^2 + lambda ||x||_1 with lambda = tau/gamma."""
    x = np.asarray(x, dtype=np.float64).ravel()
    resid = lp.y - lp.m_sense @ x
    lam = lp.tau / lp.gamma
    return 0.5 * float(resid @ resid) + lam * float(np.sum(np.abs(x)))


def ista_operator(lp: LassoProblem) -> AffineCompositeOperator:
    """ISTA as the composite map x <- shrink_smooth(A x + b; tau).

    A = I - gamma M^T M and b = gamma M^T y, so the affine part is the
    gradient step and the shrinkage the (smoothed) proximal step.  The
    shrinkage derivative is a sigmoid sum, hence positive, so the Jacobian
    Q A has a real spectrum and PSOR rate theory applies.
    """
    lam_max = lp.lam_max_gram
    if lam_max is None:
        lam_max = float(np.linalg.eigvalsh(lp.gram())[-1])
    if lp.gamma > (1.0 + 1e-9) / lam_max:
        raise StepTooLargeError(
            f"gamma = {lp.gamma:.6g} exceeds 1/lambda_max(G) = {1.0 / lam_max:.6g}"
        )
    a = np.eye(lp.n) - lp.gamma * lp.gram()
    b = lp.gamma * (lp.m_sense.T @ lp.y)
    tau, beta_sp = lp.tau, lp.beta_sp
    return AffineCompositeOperator.create(
        a=a,
        b=b,
        g=lambda z: soft_shrink_smooth(z, tau, beta_sp),
        g_prime=lambda z: soft_shrink_smooth_prime(z, tau, beta_sp),
        g_prime_nonnegative=True,
        name="ista",
    )


def fista_path(lp: LassoProblem, iters: int, x0=None) -> np.ndarray:
    """FISTA iterates (iters+1, n), using the same smooth shrinkage as ISTA.

    Standard Nesterov weights t_{k+1} = (1 + sqrt(1 + 4 t_k^2))/2 applied to
    the composite step; row 0 is the initial point (zeros by default).
    """
    op = ista_operator(lp)
    x = np.zeros(lp.n) if x0 is None else np.asarray(x0, dtype=np.float64).ravel()
    if x.size != lp.n:
        raise ValueError("x0 has wrong dimension")
    yv = x.copy()
    t = 1.0
    path = np.empty((iters + 1, lp.n))
    path[0] = x
    for k in range(iters):
        x_next = soft_shrink_smooth(op.a @ yv + op.b, lp.tau, lp.beta_sp)
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        yv = x_next + ((t - 1.0) / t_next) * (x_next - x)
        x, t = x_next, t_next
        path[k + 1] = x
    return path


def run_fista(lp: LassoProblem, iters: int) -> IterationTrace:
    """FISTA baseline trace; errors are distances to the true source."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    path = fista_path(lp, iters)
    errors = np.linalg.norm(path - lp.x_true[None, :], axis=1)
    meta = {
        "method": "fista",
        "schedule_kind": "momentum_aux",
        "period": 1,
        "operator": "fista",
        "error_reference": "x_true",
    }
    return IterationTrace(iterations=np.arange(iters + 1), errors=errors, meta=meta)


# ---------------------------------------------------------------- Richardson / deblurring


def richardson_operator(
    forward: FixedPointOperator, y_obs, omega: float, known_fixed_point=None
) -> FixedPointOperator:
    """Modified Richardson map R(x) = x + omega (y_obs - f(x)).

    Its fixed points are exactly the solutions of f(x) = y_obs; the
    Jacobian is I - omega J_f(x).
    """
    if omega <= 0.0:
        raise ValueError("omega must be > 0")
    y_obs = np.asarray(y_obs, dtype=np.float64).ravel()
    if y_obs.size != forward.dim:
        raise ValueError("y_obs has wrong dimension")

    def fn(x):
        return x + omega * (y_obs - forward(x))

    jac = None
    if forward.jacobian_at is not None:
        eye = np.eye(forward.dim)
        jac = lambda x: eye - omega * forward.jacobian_at(x)  # noqa: E731

    return FixedPointOperator(
        dim=forward.dim,
        fn=fn,
        jacobian_at=jac,
        known_fixed_point=known_fixed_point,
        name=f"richardson({forward.name})",
    )


@dataclass(frozen=True, eq=False)
class BlurModel:
    """Blur-and-saturate observation model: sigmoid of a 2-D convolution."""

    kernel: np.ndarray
    image_dims: tuple
    omega: float = 0.8

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=np.float64)
        if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
            raise ValueError("kernel must be 2-D with odd side lengths")
        h, w = self.image_dims
        if h < k.shape[0] or w < k.shape[1]:
            raise ValueError("image smaller than kernel")
        if self.omega <= 0.0:
            raise ValueError("omega must be > 0")
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "image_dims", (int(h), int(w)))

    @property
    def n(self) -> int:
        h, w = self.image_dims
        return h * w


def default_blur_kernel() -> np.ndarray:
    """7x7 kernel: 0.1 everywhere except 1.5 at the center."""
    k = np.full((7, 7), 0.1)
    k[3, 3] = 1.5
    return k


def conv2d_same(kernel, img) -> np.ndarray:
    """Same-size 2-D correlation with zero padding.

    All kernels used here are symmetric under 180-degree rotation, so the
    correlation/convolution distinction is moot.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    img = np.asarray(img, dtype=np.float64)
    kh, kw = kernel.shape
    padded = np.pad(img, ((kh // 2, kh // 2), (kw // 2, kw // 2)))
    win = np.lib.stride_tricks.sliding_window_view(padded, (kh, kw))
    return np.einsum("ijkl,kl->ij", win, kernel)


def blur_matrix(bm: BlurModel) -> np.ndarray:
    """Dense matrix K with K x_flat = conv2d_same(kernel, image) flattened."""
    h, w = bm.image_dims
    kh, kw = bm.kernel.shape
    ph, pw = kh // 2, kw // 2
    n = h * w
    k_mat = np.zeros((n, n))
    for i in range(h):
        for j in range(w):
            row = i * w + j
            for u in range(kh):
                ii = i + u - ph
                if not 0 <= ii < h:
                    continue
                for v in range(kw):
                    jj = j + v - pw
                    if 0 <= jj < w:
                        k_mat[row, ii * w + jj] += bm.kernel[u, v]
    return k_mat


def make_blur_forward(bm: BlurModel) -> AffineCompositeOperator:
    """Observation map f(x) = sigmoid(K x) on flattened images.

    Returned as an affine composite (A = K, b = 0, g = sigmoid) so its
    Jacobian diag(sigmoid'(Kx)) K is available analytically.
    """
    k_mat = blur_matrix(bm)
    return AffineCompositeOperator.create(
        a=k_mat,
        b=np.zeros(bm.n),
        g=sigmoid,
        g_prime=sigmoid_prime,
        g_prime_nonnegative=True,
        name="blur_forward",
    )


def make_sparse_blob_image(image_dims=(28, 28), blobs: int = 3, seed: int = 0,
                           peak: float = 0.35) -> np.ndarray:
    """Sparse test image: a few Gaussian blobs, rescaled to the given peak.

    The modest peak keeps the blurred-and-saturated observation away from
    the sigmoid's flat tails, where the Richardson iteration stalls.
    """
    h, w = image_dims
    if blobs < 1:
        raise ValueError("need at least one blob")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    img = np.zeros((h, w))
    for _ in range(blobs):
        ci = rng.uniform(4.0, h - 4.0)
        cj = rng.uniform(4.0, w - 4.0)
        width = rng.uniform(1.5, 3.0)
        amp = rng.uniform(0.5, 1.0)
        img += amp * np.exp(-((yy - ci) ** 2 + (xx - cj) ** 2) / (2.0 * width**2))
    img *= peak / np.max(img)
    return img
