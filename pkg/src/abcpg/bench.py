"""Simulation study: RMSE of posterior-mean estimates over replicated datasets.

Seeds are derived by counter from the master seed and the *values* that
identify a cell (stable law and grid point), never from scheduling order, so
a cell re-run on its own or in a parallel pool reproduces the same numbers.
Every algorithm and every epsilon sees the same simulated datasets.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateWeightsError, ParameterError, ParseError, TruncationError
from .gibbs import DEFAULT_PRIOR, NigState, PgConfig, run_pg
from .kernels import AbcConfig
from .stable import StableParams
from .svm import GridPoint, grid_params, simulate

log = logging.getLogger(__name__)

ALGORITHMS = ("abc_cbf", "abc_cbfas", "abc_capf")
CSV_HEADER = ("cv", "phi", "algorithm", "rmse_tau", "rmse_phi", "rmse_sigma2",
              "n_replicates", "wall_time_s")
MAX_FAILURE_FRACTION = 0.10

# Table layout: CV descending, phi ascending
DEFAULT_GRID = tuple(GridPoint(phi, cv) for cv in (10.0, 1.0, 0.1) for phi in (0.9, 0.95, 0.98))
DEFAULT_STABLE = (StableParams(1.75, 0.1), StableParams(1.7, 0.3), StableParams(1.5, -0.3))


class StudyError(RuntimeError):
    pass


@dataclass
class StudyConfig:
    grid: list = field(default_factory=lambda: list(DEFAULT_GRID))
    stable_settings: list = field(default_factory=lambda: list(DEFAULT_STABLE))
    T: int = 100
    n_particles: int = 100
    epsilons: list = field(default_factory=lambda: [0.001])
    n_replicates: int = 20
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    burn_in: int = 500
    n_samples: int = 1500
    master_seed: int = 0
    kernel: str = "gaussian"
    prior: NigState = DEFAULT_PRIOR
    h0_correction: bool = True
    keep_reference_u: bool = False
    ratio_on_reference: bool = False

    def __post_init__(self):
        if self.n_replicates < 1:
            raise ParameterError("n_replicates must be >= 1")
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad:
            raise ParameterError(f"unknown algorithms {sorted(bad)}")
        if self.T < 1:
            raise ParameterError("T must be >= 1")

    @classmethod
    def desk(cls, **overrides):
        return cls(**overrides)

    @classmethod
    def full(cls, **overrides):
        base = dict(n_replicates=100, burn_in=2000, n_samples=5000)
        base.update(overrides)
        return cls(**base)

    def pg_config(self, algorithm, stable, epsilon, seed):
        return PgConfig(
            n_particles=self.n_particles, burn_in=self.burn_in, n_samples=self.n_samples,
            abc=AbcConfig(epsilon, self.kernel), stable=stable, prior=self.prior,
            filter=algorithm, seed=seed, h0_correction=self.h0_correction,
            keep_reference_u=self.keep_reference_u, ratio_on_reference=self.ratio_on_reference,
        )

    def to_dict(self):
        d = asdict(self)
        d["grid"] = [[g.cv, g.phi, g.mean_h] for g in self.grid]
        d["stable_settings"] = [list(s.as_tuple()) for s in self.stable_settings]
        d["prior"] = asdict(self.prior)
        return d

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class RmseRow:
    cv: float
    phi: float
    algorithm: str
    rmse_tau: float
    rmse_phi: float
    rmse_sigma2: float
    n_replicates: int
    wall_time: float
    alpha: float = float("nan")
    beta: float = float("nan")
    epsilon: float = float("nan")
    n_failed: int = 0
    #: per-replicate posterior means (tau, phi, sigma2), successful replicates only
    estimates: np.ndarray = field(default=None, repr=False)

    def csv_fields(self, timing=True):
        return [repr(self.cv), repr(self.phi), self.algorithm, repr(self.rmse_tau),
                repr(self.rmse_phi), repr(self.rmse_sigma2), str(self.n_replicates),
                f"{self.wall_time:.3f}" if timing else "0.0"]


def rmse(estimates, truth):
    est = np.asarray(estimates, dtype=float).ravel()
    if est.size == 0:
        raise ParameterError("rmse of an empty set of estimates")
    # fsum is exact, so the result does not depend on replicate order
    return math.sqrt(math.fsum((est - truth) ** 2) / est.size)


def _cell_key(g: GridPoint, stable: StableParams):
    text = ",".join(repr(float(x)) for x in (*stable.as_tuple(), g.cv, g.phi, g.mean_h))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def derive_seeds(master_seed, g: GridPoint, stable: StableParams, n):
    """[(data_seed, chain_seed)] for replicates 0..n-1 of one cell."""
    key = _cell_key(g, stable)
    out = []
    for rep in range(n):
        data = np.random.SeedSequence([master_seed, 0, key, rep]).generate_state(2, np.uint64)
        chain = np.random.SeedSequence([master_seed, 1, key, rep]).generate_state(2, np.uint64)
        out.append((int(data[0]), int(chain[0])))
    return out


def posterior_mean_sampler(r, pg_cfg, truth):
    return run_pg(r, pg_cfg).thetas.mean(axis=0)


def _fit_replicate(args):
    g, stable, algorithm, epsilon, cfg, seeds, sampler = args
    data_seed, chain_seed = seeds
    truth = grid_params(g)
    _, r = simulate(truth, stable, cfg.T, np.random.default_rng(data_seed))
    pg_cfg = cfg.pg_config(algorithm, stable, epsilon, chain_seed)
    start = time.perf_counter()
    try:
        est = np.asarray(sampler(r, pg_cfg, truth), dtype=float)
    except (DegenerateWeightsError, TruncationError) as exc:
        return None, f"{type(exc).__name__}: {exc}", time.perf_counter() - start
    return est, None, time.perf_counter() - start


def _aggregate(g, stable, algorithm, epsilon, results, seeds):
    truth = grid_params(g)
    failures = [(s, err) for s, (est, err, _) in zip(seeds, results) if est is None]
    for (data_seed, chain_seed), err in failures:
        log.warning("replicate failed (data_seed=%d chain_seed=%d): %s", data_seed, chain_seed, err)
    if len(failures) > MAX_FAILURE_FRACTION * len(seeds):
        raise StudyError(
            f"{len(failures)}/{len(seeds)} replicates failed for cv={g.cv} phi={g.phi} "
            f"{algorithm} eps={epsilon}"
        )
    est = np.array([e for e, _, _ in results if e is not None]).reshape(-1, 3)
    return RmseRow(
        g.cv, g.phi, algorithm,
        rmse(est[:, 0], truth.tau), rmse(est[:, 1], truth.phi), rmse(est[:, 2], truth.sigma2),
        len(est), float(sum(t for _, _, t in results)),
        stable.alpha, stable.beta, epsilon, len(failures), est,
    )


def _map(fn, tasks, jobs):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def run_cell(g: GridPoint, stable: StableParams, algorithm: str, cfg: StudyConfig,
             replicate_seeds=None, epsilon=None, sampler=posterior_mean_sampler, jobs=1):
    """RMSE row for one (grid point, stable law, algorithm, epsilon)."""
    epsilon = cfg.epsilons[0] if epsilon is None else epsilon
    seeds = replicate_seeds or derive_seeds(cfg.master_seed, g, stable, cfg.n_replicates)
    tasks = [(g, stable, algorithm, epsilon, cfg, s, sampler) for s in seeds]
    return _aggregate(g, stable, algorithm, epsilon, _map(_fit_replicate, tasks, jobs), seeds)


def table_name(stable: StableParams, epsilon):
    return f"rmse_alpha{stable.alpha:g}_beta{stable.beta:g}_eps{epsilon:g}.csv"


def write_table(path, rows, timing=True):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow(row.csv_fields(timing))


def run_study(cfg: StudyConfig, out_dir=None, jobs=1, timing=True, sampler=posterior_mean_sampler):
    """Every stable law x epsilon x grid point x algorithm; one table per (law, epsilon)."""
    cells = [
        (s, e, g, a)
        for s in cfg.stable_settings for e in cfg.epsilons
        for g in cfg.grid for a in cfg.algorithms
    ]
    seeds = {(s, g): derive_seeds(cfg.master_seed, g, s, cfg.n_replicates)
             for s in cfg.stable_settings for g in cfg.grid}
    tasks = [(g, s, a, e, cfg, sd, sampler) for s, e, g, a in cells for sd in seeds[s, g]]
    flat = _map(_fit_replicate, tasks, jobs)
    n = cfg.n_replicates
    rows = [
        _aggregate(g, s, a, e, flat[i * n:(i + 1) * n], seeds[s, g])
        for i, (s, e, g, a) in enumerate(cells)
    ]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for s in cfg.stable_settings:
            for e in cfg.epsilons:
                write_table(out / table_name(s, e),
                            [r for r in rows if (r.alpha, r.beta, r.epsilon) == (s.alpha, s.beta, e)],
                            timing)
        manifest = {
            "config": cfg.to_dict(),
            "config_hash": cfg.digest(),
            "tables": sorted(table_name(s, e) for s in cfg.stable_settings for e in cfg.epsilons),
            "cells": [
                {
                    "alpha": s.alpha, "beta": s.beta, "epsilon": e, "cv": g.cv, "phi": g.phi,
                    "algorithm": a, "n_failed": row.n_failed,
                    "seeds": [{"replicate": k, "data_seed": d, "chain_seed": c}
                              for k, (d, c) in enumerate(seeds[s, g])],
                }
                for (s, e, g, a), row in zip(cells, rows)
            ],
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return rows


# -- config file -------------------------------------------------------------


def _pairs(text, arity, line, path):
    out = []
    for item in text.split(","):
        parts = [p.strip() for p in item.strip().split(":")]
        if len(parts) not in arity:
            raise ParseError(path, line, f"expected {'/'.join(map(str, arity))} ':'-separated values in {item!r}")
        out.append([float(p) for p in parts])
    return out


def load_study_config(path, base: StudyConfig | None = None) -> StudyConfig:
    """Parse ``key = value`` lines; keys are StudyConfig field names.

    Lists are comma-separated. ``grid`` items are ``cv:phi`` or
    ``cv:phi:mean_h``; ``stable_settings`` items are ``alpha:beta`` or
    ``alpha:beta:gamma:delta``. ``#`` starts a comment.
    """
    values = (base or StudyConfig()).__dict__.copy()
    ints = {"T", "n_particles", "n_replicates", "burn_in", "n_samples", "master_seed"}
    bools = {"h0_correction", "keep_reference_u", "ratio_on_reference"}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ParseError(path, lineno, f"expected 'key = value', got {raw!r}")
        key, val = (x.strip() for x in text.split("=", 1))
        try:
            if key == "grid":
                values[key] = [GridPoint(p[1], p[0], *p[2:]) for p in _pairs(val, (2, 3), lineno, path)]
            elif key == "stable_settings":
                values[key] = [StableParams(*p) for p in _pairs(val, (2, 4), lineno, path)]
            elif key == "epsilons":
                values[key] = [float(x) for x in val.split(",")]
            elif key == "algorithms":
                values[key] = [x.strip().replace("-", "_") for x in val.split(",")]
            elif key == "kernel":
                values[key] = val
            elif key in ints:
                values[key] = int(val)
            elif key in bools:
                if val.lower() not in ("true", "false"):
                    raise ParseError(path, lineno, f"{key} must be true or false, got {val!r}")
                values[key] = val.lower() == "true"
            else:
                raise ParseError(path, lineno, f"unknown key {key!r}")
        except (ValueError, ParameterError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(path, lineno, str(exc)) from exc
    return StudyConfig(**values)
