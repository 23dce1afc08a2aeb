"""Command-line interface: experiment runner and rate tables.

Subcommands:

* ``list``        registry of named experiments
* ``run``         execute one experiment, write CSV traces + manifest
* ``rates``       convergence-rate table over a condition-number grid
* ``permsearch``  zig-zag ordering of Chebyshev steps, CSV output

Errors from the package surface as machine-readable JSON on stdout with
exit code 2.  All floats print with 17 significant digits so outputs are
checksum-stable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from ._version import __version__
from .chebyshev import chebyshev_steps, permutation_search
from .errors import ChebAccelError
from .experiments import EXPERIMENTS, ExperimentConfig, experiment_names, run_experiment
from .psor import local_rate_report
from .spectral import SpectralBounds

__all__ = ["main", "rates_table"]


def _parse_bounds(text: str) -> SpectralBounds:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"bounds must be 'a,b', got {text!r}")
    return SpectralBounds(lambda_min=float(parts[0]), lambda_max=float(parts[1]))


def _parse_floats(text: str) -> list:
    return [float(p) for p in text.split(",") if p.strip()]


def _parse_ints(text: str) -> list:
    return [int(p) for p in text.split(",") if p.strip()]


def _parse_override(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise ValueError(f"override must be key=value, got {text!r}")
    for cast in (int, float):
        try:
            return key, cast(value)
        except ValueError:
            continue
    return key, value


def rates_table(kappas=None, bounds: SpectralBounds = None, periods=(1, 2, 4, 8, 16)):
    """Rate table rows over condition numbers (or one explicit bounds pair).

    Columns: kappa, R_s, R_star, rho_org, q_ch(T) per period, q_ch_limit.
    R_s is the optimal-constant-step rate, R_star the momentum/limit rate;
    rho_org uses the b = 1 convention (plain-iteration radius) on the kappa
    grid and the actual spectrum for explicit bounds.
    """
    periods = [int(t) for t in periods]
    if any(t < 1 for t in periods):
        raise ValueError("periods must be >= 1")
    if bounds is not None:
        rows_bounds = [bounds]
    else:
        if kappas is None:
            kappas = np.logspace(np.log10(1.5), 3.0, 12).tolist()
        rows_bounds = [SpectralBounds(1.0 / float(k), 1.0) for k in kappas]
    header = ["kappa", "R_s", "R_star", "rho_org"]
    header += [f"q_ch_T{t}" for t in periods]
    header += ["q_ch_limit"]
    rows = []
    for bnd in rows_bounds:
        kappa = bnd.lambda_max / bnd.lambda_min
        per_t = [local_rate_report(bnd, t) for t in periods]
        base = per_t[0]
        row = [kappa, base.rate_constant, base.rate_lower_bound, base.rho_org]
        row += [r.rate_per_iter for r in per_t]
        row += [base.rate_limit]
        rows.append(row)
    return header, rows


def _emit_table(header, rows, fmt: str, out: str = None) -> None:
    if fmt == "json":
        doc = [dict(zip(header, row)) for row in rows]
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = [",".join(header)]
        lines += [",".join(f"{v:.17g}" for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_list(args) -> int:
    for name in experiment_names():
        print(f"{name}\t{EXPERIMENTS[name].description}")
    return 0


def _cmd_rates(args) -> int:
    bounds = _parse_bounds(args.bounds) if args.bounds else None
    kappas = _parse_floats(args.kappas) if args.kappas else None
    periods = _parse_ints(args.periods)
    header, rows = rates_table(kappas=kappas, bounds=bounds, periods=periods)
    _emit_table(header, rows, args.format, args.out)
    return 0


def _cmd_run(args) -> int:
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    for item in args.set or []:
        key, value = _parse_override(item)
        overrides[key] = value
    out_dir = args.out or os.path.join("runs", args.experiment)
    cfg = ExperimentConfig(
        experiment=args.experiment,
        seed=args.seed,
        overrides=overrides,
        output_dir=out_dir,
    )
    manifest = run_experiment(cfg, jobs=args.jobs)
    print(
        json.dumps(
            {
                "status": "ok",
                "experiment": args.experiment,
                "output_dir": out_dir,
                "manifest": os.path.join(out_dir, "manifest.json"),
                "duration_s": manifest.duration_s,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_permsearch(args) -> int:
    bounds = _parse_bounds(args.bounds)
    zigzag = permutation_search(bounds, args.period, u=args.u)
    natural = chebyshev_steps(bounds, args.period)
    lines = [
        f"#bounds={bounds.lambda_min:.17g},{bounds.lambda_max:.17g}",
        f"#T={args.period}",
        f"#u={args.u:.17g}",
        "gamma_zigzag,gamma_natural",
    ]
    lines += [
        f"{z:.17g},{n:.17g}" for z, n in zip(zigzag.steps, natural.steps)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chebaccel",
        description="Chebyshev step schedules and Chebyshev-periodical SOR",
    )
    parser.add_argument("--version", action="version", version=f"chebaccel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list named experiments")
    p_list.set_defaults(func=_cmd_list)

    p_rates = sub.add_parser("rates", help="convergence-rate table")
    p_rates.add_argument("--kappas", help="comma-separated condition numbers")
    p_rates.add_argument("--bounds", help="explicit bounds a,b (overrides --kappas)")
    p_rates.add_argument("--periods", default="1,2,4,8,16",
                         help="comma-separated schedule periods")
    p_rates.add_argument("--format", choices=("csv", "json"), default="csv")
    p_rates.add_argument("--out", help="write to file instead of stdout")
    p_rates.set_defaults(func=_cmd_rates)

    p_run = sub.add_parser("run", help="run a named experiment")
    p_run.add_argument("experiment", help="registry name (see 'list')")
    p_run.add_argument("--seed", type=int, default=0, help="master seed")
    p_run.add_argument("--trials", type=int, default=None,
                       help="trial count for averaged experiments")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    p_run.add_argument("--out", help="output directory (default runs/<name>)")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override an experiment parameter")
    p_run.set_defaults(func=_cmd_run)

    p_perm = sub.add_parser("permsearch", help="zig-zag ordered Chebyshev steps")
    p_perm.add_argument("--bounds", required=True, help="spectrum bounds a,b")
    p_perm.add_argument("--period", type=int, required=True, help="schedule length T")
    p_perm.add_argument("--u", type=float, default=0.3,
                        help="appended target value per generation")
    p_perm.add_argument("--out", help="write CSV to file instead of stdout")
    p_perm.set_defaults(func=_cmd_permsearch)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ChebAccelError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 2


if __name__ == "__main__":
    sys.exit(main())
