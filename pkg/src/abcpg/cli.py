"""``abcpg`` command line: simulate, fit, bench, version.

Every option can also be set from the environment: ``--burn-in 100`` and
``ABCPG_BURN_IN=100`` are equivalent, and the command line wins when both are
given. Failures print one line to stderr of the form

    abcpg: error: <kind>: <message>

with ``kind`` either ``usage`` (exit status 2: bad flags or input files) or
``runtime`` (exit status 1: the sampler or study failed).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import StudyConfig, load_study_config, run_study
from .data import load_series, write_series
from .errors import ParameterError, ParseError
from .gibbs import DEFAULT_PRIOR, NigState, PgConfig, run_pg
from .kernels import KERNELS, AbcConfig
from .report import build_report
from .stable import StableParams
from .svm import GridPoint, SvmParams, grid_params, simulate

ENV_PREFIX = "ABCPG_"
FILTERS = ("abc-cbf", "abc-cbfas", "abc-capf")

# real-data defaults: stable parameters typical of daily equity index returns
FIT_DEFAULTS = dict(particles=500, epsilon=0.001, alpha=1.725, beta=0.0915,
                    burn_in=2000, samples=5000)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env_name(dest):
    return ENV_PREFIX + dest.upper()


def _opt(parser, flag, default=None, **kw):
    """Add an option whose default may come from the environment."""
    dest = flag.lstrip("-").replace("-", "_")
    env = os.environ.get(_env_name(dest))
    if env is not None:
        if kw.get("action") == "store_true":
            default = env.strip().lower() in ("1", "true", "yes", "on")
        else:
            default = env
    parser.add_argument(flag, dest=dest, default=default, **kw)


def _add_model_options(p, alpha, beta):
    _opt(p, "--seed", 0, type=int)
    _opt(p, "--alpha", alpha, type=float, help="stable index (0, 2]")
    _opt(p, "--beta", beta, type=float, help="stable skewness [-1, 1]")
    _opt(p, "--stable-gamma", 1.0, type=float)
    _opt(p, "--stable-delta", 0.0, type=float)


def _add_sampler_options(p):
    d = FIT_DEFAULTS
    _opt(p, "--particles", d["particles"], type=int)
    _opt(p, "--epsilon", d["epsilon"], type=float)
    _opt(p, "--kernel", "gaussian", choices=KERNELS)
    _opt(p, "--filter", "abc-capf", choices=FILTERS)
    _opt(p, "--burn-in", d["burn_in"], type=int)
    _opt(p, "--samples", d["samples"], type=int)
    _opt(p, "--thin", 1, type=int, help="keep every k-th volatility path for the bands")
    _opt(p, "--no-h0-correction", False, action="store_true",
         help="use the plain conjugate parameter update")
    _opt(p, "--ratio-on-reference", False, action="store_true",
         help="cAPF: divide the reference slot's weight by its tempering factor too")
    _opt(p, "--keep-reference-u", False, action="store_true",
         help="carry the reference's auxiliary draws through each sweep")
    (l0, _), (_, l1) = DEFAULT_PRIOR.lam
    _opt(p, "--prior-a", DEFAULT_PRIOR.a, type=float)
    _opt(p, "--prior-b", DEFAULT_PRIOR.b, type=float)
    _opt(p, "--prior-mu0", DEFAULT_PRIOR.mu[0], type=float)
    _opt(p, "--prior-mu1", DEFAULT_PRIOR.mu[1], type=float)
    _opt(p, "--prior-lambda", f"{l0},{l1}",
         help="diagonal of the prior precision: one value or 'l0,l1'")


def build_parser():
    p = _Parser(prog="abcpg", description="ABC particle Gibbs for stable-noise stochastic volatility")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write a synthetic returns CSV")
    _opt(s, "--T", 100, type=int, help="number of returns")
    _opt(s, "--tau", None, type=float)
    _opt(s, "--phi", None, type=float)
    _opt(s, "--sigma2", None, type=float)
    _opt(s, "--cv", 10.0, type=float, help="volatility CV, used when tau/phi/sigma2 are not all given")
    _opt(s, "--mean-h", 0.0009, type=float)
    _opt(s, "--grid-phi", 0.9, type=float)
    _add_model_options(s, 1.75, 0.1)
    s.add_argument("-o", "--output", required=True, help="CSV path; a .json sidecar is written next to it")

    f = sub.add_parser("fit", help="fit a returns or price CSV")
    f.add_argument("input")
    f.add_argument("-o", "--out-dir", required=True)
    _add_model_options(f, FIT_DEFAULTS["alpha"], FIT_DEFAULTS["beta"])
    _add_sampler_options(f)

    b = sub.add_parser("bench", help="run the RMSE simulation study")
    b.add_argument("config", nargs="?", help="key = value study file")
    b.add_argument("-o", "--out-dir", required=True)
    _opt(b, "--profile", "desk", choices=("desk", "full"))
    _opt(b, "--jobs", 1, type=int)
    _opt(b, "--no-timing", False, action="store_true", help="write 0.0 for wall_time_s")
    _opt(b, "--seed", None, type=int, help="overrides master_seed")

    sub.add_parser("version")
    return p


def _prior(args):
    try:
        lam = [float(x) for x in str(args.prior_lambda).split(",")]
    except ValueError:
        raise UsageError(f"--prior-lambda: bad value {args.prior_lambda!r}") from None
    if len(lam) == 1:
        lam = lam * 2
    if len(lam) != 2:
        raise UsageError("--prior-lambda takes one or two values")
    return NigState(args.prior_a, args.prior_b, (args.prior_mu0, args.prior_mu1),
                    ((lam[0], 0.0), (0.0, lam[1])))


def _stable(args):
    return StableParams(args.alpha, args.beta, args.stable_gamma, args.stable_delta)


def cmd_simulate(args):
    stable = _stable(args)
    given = [args.tau, args.phi, args.sigma2]
    if all(v is not None for v in given):
        theta = SvmParams(*given)
    elif any(v is not None for v in given):
        raise UsageError("give all of --tau --phi --sigma2, or none")
    else:
        theta = grid_params(GridPoint(args.grid_phi, args.cv, args.mean_h))
    if args.T < 1:
        raise UsageError("--T must be >= 1")
    traj, r = simulate(theta, stable, args.T, np.random.default_rng(args.seed))
    out = Path(args.output)
    write_series(out, r, traj.h[1:])
    meta = {
        "T": args.T, "seed": args.seed, "h0": float(traj.h[0]),
        "theta": {"tau": theta.tau, "phi": theta.phi, "sigma2": theta.sigma2},
        "stable": dict(zip(("alpha", "beta", "gamma", "delta"), stable.as_tuple())),
    }
    out.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_fit(args):
    series = load_series(args.input)
    stable = _stable(args)
    if args.thin < 1:
        raise UsageError("--thin must be >= 1")
    cfg = PgConfig(
        n_particles=args.particles, burn_in=args.burn_in, n_samples=args.samples,
        abc=AbcConfig(args.epsilon, args.kernel), stable=stable, prior=_prior(args),
        filter=args.filter.replace("-", "_"), seed=args.seed, trajectory_thin=args.thin,
        h0_correction=not args.no_h0_correction, ratio_on_reference=args.ratio_on_reference,
        keep_reference_u=args.keep_reference_u,
    )
    if cfg.n_samples < 2:
        raise UsageError("--samples must be >= 2")
    rng = np.random.default_rng(args.seed)
    samples = run_pg(series.r, cfg, rng)
    config = {
        "input": str(args.input), "T": int(len(series.r)),
        "particles": cfg.n_particles, "burn_in": cfg.burn_in, "samples": cfg.n_samples,
        "epsilon": cfg.abc.epsilon, "kernel": cfg.abc.kind, "filter": args.filter,
        "thin": args.thin, "h0_correction": cfg.h0_correction,
        "ratio_on_reference": cfg.ratio_on_reference,
        "keep_reference_u": cfg.keep_reference_u,
        "stable": dict(zip(("alpha", "beta", "gamma", "delta"), stable.as_tuple())),
        "prior": {"a": cfg.prior.a, "b": cfg.prior.b, "mu": list(cfg.prior.mu),
                  "lambda": [list(row) for row in cfg.prior.lam]},
        "h0_acceptance": samples.h0_acceptance,
    }
    report = build_report(samples, stable, rng, config, args.seed, series.dates)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.write(out / "fit.json", out / "vol_bands.csv", out / "return_bands.csv")


def cmd_bench(args):
    base = StudyConfig.full() if args.profile == "full" else StudyConfig.desk()
    cfg = load_study_config(args.config, base) if args.config else base
    if args.seed is not None:
        cfg = StudyConfig(**{**cfg.__dict__, "master_seed": args.seed})
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    run_study(cfg, args.out_dir, jobs=args.jobs, timing=not args.no_timing)


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "bench": cmd_bench}


def _fail(kind, message, status):
    one_line = " ".join(str(message).split())
    print(f"abcpg: error: {kind}: {one_line}", file=sys.stderr)
    return status


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.command == "version":
            print(__version__)
            return 0
        COMMANDS[args.command](args)
    except (UsageError, ParseError, ParameterError, FileNotFoundError, IsADirectoryError) as exc:
        return _fail("usage", exc, 2)
    except Exception as exc:  # noqa: BLE001 - the CLI reports every failure on one line
        return _fail("runtime", f"{type(exc).__name__}: {exc}", 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
