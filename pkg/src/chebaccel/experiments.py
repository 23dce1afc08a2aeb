"""Named, seeded, reproducible experiments.

Each registry entry builds a fixture problem, runs the plain iteration next
to its Chebyshev-PSOR counterpart (plus method-specific baselines), and
returns traces and a metadata dictionary.  The runner writes one CSV per
trace, a JSON metadata sidecar, and a manifest with checksums, so a rerun
with the same configuration is byte-identical.

Trial seeds are derived from the master seed by hashing, so increasing a
trial count extends the set without perturbing earlier trials.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._version import __version__
from .apps import (
    BlurModel,
    LinearSystem,
    default_blur_kernel,
    fista_path,
    ista_operator,
    jacobi_operator,
    make_blur_forward,
    make_lasso_problem,
    make_sparse_blob_image,
    richardson_operator,
)
from .chebyshev import chebyshev_psor_factors, constant_schedule
from .errors import InvalidOverrideError, UnknownExperimentError
from .psor import (
    FixedPointOperator,
    PsorConfig,
    local_rate_report,
    psor_bounds_from_operator,
    run_fixed_point,
    run_psor,
)
from .spectral import SpectralBounds
from .trace import IterationTrace, save_trace

__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "EXPERIMENTS",
    "experiment_names",
    "derive_seed",
    "run_experiment",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """A named experiment plus seed, parameter overrides, and output dir."""

    experiment: str
    seed: int = 0
    overrides: dict = field(default_factory=dict)
    output_dir: str = "runs"


@dataclass(frozen=True)
class RunManifest:
    """What a run produced: resolved config, version, checksums, duration."""

    config: dict
    version: str
    checksums: dict
    duration_s: float


def derive_seed(master: int, index: int) -> int:
    """Trial seed: 63-bit integer hashed from (master seed, trial index)."""
    digest = hashlib.sha256(f"{master}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _rate_meta(bounds: SpectralBounds, period: int) -> dict:
    report = local_rate_report(bounds, period)
    return {
        "lambda_min_b": bounds.lambda_min,
        "lambda_max_b": bounds.lambda_max,
        "period": period,
        "rho_upp_t": report.rho_upp_t,
        "q_ch": report.rate_per_iter,
        "q_ch_limit": report.rate_limit,
        "rho_org": report.rho_org,
        "omega_const_opt": 2.0 / (bounds.lambda_min + bounds.lambda_max),
    }


# ---------------------------------------------------------------- fixtures


def _surrogate_fixed_point(op: FixedPointOperator, x0: np.ndarray, budget: int) -> np.ndarray:
    """Reference fixed point for operators without a closed form.

    A long plain run (10x the trace budget) followed by an optimally
    relaxed polish using bounds estimated at the plain run's endpoint.
    """
    x = x0.copy()
    for _ in range(10 * budget):
        x = op(x)
    bounds = psor_bounds_from_operator(op, x)
    omega = 2.0 / (bounds.lambda_min + bounds.lambda_max)
    for _ in range(budget):
        x = (1.0 - omega) * x + omega * op(x)
    return x


def run_jacobi_fixture(params: dict, seed: int, jobs: int = 1):
    """Jacobi solver on P = I + M^T M with small Gaussian M, q = 0."""
    n, t, iters = params["n"], params["t"], params["iters"]
    rng = np.random.default_rng(seed)
    m = params["sigma"] * rng.standard_normal((n, n))
    system = LinearSystem(p=np.eye(n) + m.T @ m, q=np.zeros(n))
    op = jacobi_operator(system)
    x0 = rng.standard_normal(n)
    bounds = psor_bounds_from_operator(op, op.known_fixed_point)
    factors = chebyshev_psor_factors(bounds, t)
    traces = {
        "plain": run_fixed_point(op, x0, iters),
        "const_sor": run_psor(
            op,
            PsorConfig(
                constant_schedule(2.0 / (bounds.lambda_min + bounds.lambda_max)),
                iters,
            ),
            x0,
        ),
        "chebyshev_psor": run_psor(op, PsorConfig(factors, iters), x0),
    }
    return traces, _rate_meta(bounds, t)


def run_tanh_inverse_fixture(params: dict, seed: int, jobs: int = 1):
    """Invert y = x + tanh(x) by iterating f(x) = y - tanh(x)."""
    t, iters = params["t"], params["iters"]
    y = np.array([params["y1"], params["y2"]])
    op = FixedPointOperator(
        dim=2,
        fn=lambda x: y - np.tanh(x),
        jacobian_at=lambda x: np.diag(-1.0 / np.cosh(x) ** 2),
        name="tanh_inverse",
    )
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(2)
    x_star = _surrogate_fixed_point(op, x0, iters)
    bounds = psor_bounds_from_operator(op, x_star)
    factors = chebyshev_psor_factors(bounds, t)
    traces = {
        "plain": run_fixed_point(op, x0, iters, reference=x_star),
        "chebyshev_psor": run_psor(op, PsorConfig(factors, iters), x0, reference=x_star),
    }
    meta = _rate_meta(bounds, t)
    meta["fixed_point_0"] = float(x_star[0])
    meta["fixed_point_1"] = float(x_star[1])
    return traces, meta


def run_powermap_fixture(params: dict, seed: int, jobs: int = 1):
    """Two-variable power map with exponents 0.2 / 0.5 on the positive orthant."""
    t, iters = params["t"], params["iters"]

    def fn(x):
        return np.array([x[0] ** 0.2 + x[1] ** 0.5, x[0] ** 0.5 + x[1] ** 0.2])

    def jac(x):
        return np.array(
            [
                [0.2 * x[0] ** -0.8, 0.5 * x[1] ** -0.5],
                [0.5 * x[0] ** -0.5, 0.2 * x[1] ** -0.8],
            ]
        )

    op = FixedPointOperator(dim=2, fn=fn, jacobian_at=jac, name="powermap")
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(1.0, 5.0, size=2)
    x_star = _surrogate_fixed_point(op, x0, iters)
    bounds = psor_bounds_from_operator(op, x_star)
    factors = chebyshev_psor_factors(bounds, t)
    traces = {
        "plain": run_fixed_point(op, x0, iters, reference=x_star),
        "chebyshev_psor": run_psor(op, PsorConfig(factors, iters), x0, reference=x_star),
    }
    meta = _rate_meta(bounds, t)
    meta["fixed_point_0"] = float(x_star[0])
    meta["fixed_point_1"] = float(x_star[1])
    return traces, meta


def make_tanh_gram_operator(n: int, sigma: float, lam_max: float, seed: int):
    """f(x) = tanh(Ax) with a Gram matrix rescaled to the target top eigenvalue.

    The fixed point is the origin, where the Jacobian is A itself, so the
    bounds of B = I - A are (1 - lam_max, 1 - lambda_min(A)).
    """
    rng = np.random.default_rng(seed)
    m = sigma * rng.standard_normal((n, n))
    a = m.T @ m
    a = (a + a.T) / 2.0
    eigs = np.linalg.eigvalsh(a)
    a *= lam_max / eigs[-1]
    op = FixedPointOperator(
        dim=n,
        fn=lambda x: np.tanh(a @ x),
        jacobian_at=lambda x: (1.0 / np.cosh(a @ x) ** 2)[:, None] * a,
        known_fixed_point=np.zeros(n),
        name="tanh_gram",
    )
    lam_min_a = float(eigs[0] * lam_max / eigs[-1])
    return op, rng, lam_min_a


def run_tanh_gram_fixture(params: dict, seed: int, jobs: int = 1):
    """tanh(Ax) iteration toward the origin at paper-scale bounds."""
    n, t, iters = params["n"], params["t"], params["iters"]
    lam_max = params["lam_max"]
    op, rng, lam_min_a = make_tanh_gram_operator(n, params["sigma"], lam_max, seed)
    bounds = SpectralBounds(lambda_min=1.0 - lam_max, lambda_max=1.0)
    x0 = params["x0_scale"] * rng.standard_normal(n)
    factors = chebyshev_psor_factors(bounds, t)
    traces = {
        "plain": run_fixed_point(op, x0, iters),
        "chebyshev_psor": run_psor(op, PsorConfig(factors, t * (iters // t)), x0),
    }
    meta = _rate_meta(bounds, t)
    meta["lambda_min_a"] = lam_min_a
    return traces, meta


def _lasso_trial(args) -> tuple:
    """One Lasso trial: NMSE curves for plain ISTA, Chebyshev-PSOR ISTA, FISTA.

    The PSOR factor bounds are estimated from the Jacobian at plain ISTA's
    terminal iterate, the reproducible stand-in for the unknown fixed point.
    """
    (n, m, p, sigma, t, plain_iters, cheb_iters, trial_seed) = args
    lp = make_lasso_problem(n, m, p, sigma, trial_seed)
    op = ista_operator(lp)
    x = np.zeros(n)
    plain_nmse = np.empty(plain_iters + 1)
    plain_nmse[0] = lp.nmse(x)
    for k in range(plain_iters):
        x = op(x)
        plain_nmse[k + 1] = lp.nmse(x)
    bounds = psor_bounds_from_operator(op, x)
    factors = chebyshev_psor_factors(bounds, t)
    xc = np.zeros(n)
    cheb_nmse = np.empty(cheb_iters + 1)
    cheb_nmse[0] = lp.nmse(xc)
    for k in range(cheb_iters):
        w = factors.step(k)
        xc = (1.0 - w) * xc + w * op(xc)
        cheb_nmse[k + 1] = lp.nmse(xc)
    path = fista_path(lp, cheb_iters)
    fista_nmse = np.sum((path - lp.x_true[None, :]) ** 2, axis=1) / n
    return plain_nmse, cheb_nmse, fista_nmse, bounds.lambda_min, bounds.lambda_max


def run_lasso_fixture(params: dict, seed: int, jobs: int = 1):
    """Trial-averaged NMSE curves for the Lasso solvers."""
    n, m = params["n"], params["m"]
    trials, t = params["trials"], params["t"]
    plain_iters, cheb_iters = params["plain_iters"], params["cheb_iters"]
    args = [
        (n, m, params["p"], params["sigma"], t, plain_iters, cheb_iters,
         derive_seed(seed, i))
        for i in range(trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_lasso_trial, args))
    else:
        results = [_lasso_trial(a) for a in args]
    plain = np.mean(np.stack([r[0] for r in results]), axis=0)
    cheb = np.mean(np.stack([r[1] for r in results]), axis=0)
    fista = np.mean(np.stack([r[2] for r in results]), axis=0)
    mean_a = float(np.mean([r[3] for r in results]))
    mean_b = float(np.mean([r[4] for r in results]))

    def nmse_trace(values, method):
        return IterationTrace(
            iterations=np.arange(values.size),
            errors=values,
            meta={"method": method, "metric": "nmse", "trials": trials,
                  "schedule_kind": "chebyshev" if method == "chebyshev_psor_ista" else "constant",
                  "period": t if method == "chebyshev_psor_ista" else 1},
        )

    traces = {
        "ista": nmse_trace(plain, "ista"),
        "chebyshev_psor_ista": nmse_trace(cheb, "chebyshev_psor_ista"),
        "fista": nmse_trace(fista, "fista"),
    }
    meta = _rate_meta(SpectralBounds(mean_a, mean_b), t)
    meta["trials"] = trials
    meta["mean_bounds_note"] = "bounds averaged over trials; factors are per-trial"
    return traces, meta


def run_deblur_fixture(params: dict, seed: int, jobs: int = 1):
    """Deblur a synthetic blob image through sigmoid(K x) by Richardson iteration."""
    dims = (params["h"], params["w"])
    t, iters = params["t"], params["iters"]
    img = make_sparse_blob_image(dims, blobs=params["blobs"], seed=seed,
                                 peak=params["peak"])
    x_true = img.ravel()
    bm = BlurModel(kernel=default_blur_kernel(), image_dims=dims, omega=params["omega"])
    forward = make_blur_forward(bm)
    y_obs = forward(x_true)
    op = richardson_operator(forward, y_obs, bm.omega, known_fixed_point=x_true)
    bounds = psor_bounds_from_operator(op, x_true)
    factors = chebyshev_psor_factors(bounds, t)
    x0 = np.zeros(bm.n)
    traces = {
        "plain": run_fixed_point(op, x0, iters),
        "chebyshev_psor": run_psor(op, PsorConfig(factors, iters), x0),
    }
    return traces, _rate_meta(bounds, t)


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    description: str
    defaults: dict
    runner: Callable


EXPERIMENTS = {
    spec.name: spec
    for spec in [
        ExperimentSpec(
            name="jacobi-fig10",
            description="Jacobi linear solver: plain vs constant-SOR vs Chebyshev-PSOR",
            defaults={"n": 512, "sigma": 0.03, "t": 8, "iters": 200},
            runner=run_jacobi_fixture,
        ),
        ExperimentSpec(
            name="tanh-inverse-fig8",
            description="Invert y = x + tanh(x): near-unit Jacobian, strong PSOR gains",
            defaults={"y1": 0.1, "y2": 0.6, "t": 8, "iters": 400},
            runner=run_tanh_inverse_fixture,
        ),
        ExperimentSpec(
            name="powermap-fig7",
            description="Two-variable power map fixed point with period-2 factors",
            defaults={"t": 2, "iters": 60},
            runner=run_powermap_fixture,
        ),
        ExperimentSpec(
            name="tanh-gram-fig12",
            description="tanh(Ax) iteration at near-unit top eigenvalue, rate envelope",
            defaults={"n": 512, "sigma": 0.022, "lam_max": 0.9766, "t": 8,
                      "iters": 200, "x0_scale": 0.1},
            runner=run_tanh_gram_fixture,
        ),
        ExperimentSpec(
            name="lasso-fig11",
            description="Lasso: plain ISTA vs Chebyshev-PSOR ISTA vs FISTA, trial-averaged NMSE",
            defaults={"n": 512, "m": 256, "p": 0.1, "sigma": 0.1, "trials": 100,
                      "t": 8, "plain_iters": 3000, "cheb_iters": 500},
            runner=run_lasso_fixture,
        ),
        ExperimentSpec(
            name="deblur-fig14",
            description="Nonlinear deblurring by modified Richardson iteration",
            defaults={"h": 28, "w": 28, "blobs": 3, "peak": 0.35, "omega": 0.8,
                      "t": 8, "iters": 256},
            runner=run_deblur_fixture,
        ),
    ]
}


def experiment_names() -> list:
    return sorted(EXPERIMENTS)


def _resolve_params(spec: ExperimentSpec, overrides: dict) -> dict:
    params = dict(spec.defaults)
    for key, value in overrides.items():
        if key not in params:
            raise InvalidOverrideError(
                f"unknown override {key!r} for {spec.name}; "
                f"valid keys: {', '.join(sorted(params))}"
            )
        default = params[key]
        try:
            params[key] = type(default)(value)
        except (TypeError, ValueError) as exc:
            raise InvalidOverrideError(
                f"override {key}={value!r} not convertible to {type(default).__name__}"
            ) from exc
    return params


def _jsonable(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> RunManifest:
    """Run a named experiment and write traces, metadata, and a manifest.

    Outputs land in cfg.output_dir as <name>_<method>.csv plus
    <name>_meta.json; manifest.json is written last, atomically.
    """
    if cfg.experiment not in EXPERIMENTS:
        raise UnknownExperimentError(
            f"unknown experiment {cfg.experiment!r}; "
            f"known: {', '.join(experiment_names())}"
        )
    spec = EXPERIMENTS[cfg.experiment]
    params = _resolve_params(spec, cfg.overrides)
    start = time.perf_counter()
    traces, extra_meta = spec.runner(params, cfg.seed, jobs)
    os.makedirs(cfg.output_dir, exist_ok=True)
    config_snapshot = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "params": _jsonable(params),
        "version": __version__,
    }
    written = []
    for method, tr in sorted(traces.items()):
        tr.meta.setdefault("seed", cfg.seed)
        tr.meta.setdefault("experiment", cfg.experiment)
        path = os.path.join(cfg.output_dir, f"{cfg.experiment}_{method}.csv")
        save_trace(path, tr)
        written.append(path)
    meta_path = os.path.join(cfg.output_dir, f"{cfg.experiment}_meta.json")
    meta_doc = dict(config_snapshot)
    meta_doc["results"] = _jsonable(extra_meta)
    with open(meta_path, "w", encoding="ascii") as fh:
        json.dump(meta_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(meta_path)
    duration = time.perf_counter() - start
    checksums = {os.path.basename(p): _sha256(p) for p in written}
    manifest = RunManifest(
        config=config_snapshot,
        version=__version__,
        checksums=checksums,
        duration_s=duration,
    )
    manifest_path = os.path.join(cfg.output_dir, "manifest.json")
    tmp_path = manifest_path + ".tmp"
    with open(tmp_path, "w", encoding="ascii") as fh:
        json.dump(
            {
                "config": manifest.config,
                "version": manifest.version,
                "checksums": manifest.checksums,
                "duration_s": manifest.duration_s,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    os.replace(tmp_path, manifest_path)
    return manifest
