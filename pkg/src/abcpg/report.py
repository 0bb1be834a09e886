"""Posterior summaries and plot-ready band files.

All quantiles use linear interpolation between order statistics
(``numpy.quantile(..., method="linear")``): the q-quantile of n sorted
draws x_(0..n-1) sits at position q*(n-1).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .stable import StableParams
from .svm import emit_return

LEVELS = (0.025, 0.975)
PARAM_NAMES = ("tau", "phi", "sigma2")


@dataclass(frozen=True)
class Interval:
    est: float
    lo: float
    hi: float

    def to_dict(self):
        return {"est": self.est, "lo": self.lo, "hi": self.hi}


def _quantiles(x, axis=0):
    return np.quantile(x, LEVELS, axis=axis, method="linear")


def summarize_draws(draws) -> Interval:
    x = np.asarray(draws, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ParameterError("need at least two draws to summarize")
    lo, hi = _quantiles(x)
    est = float(x.mean())
    # keep lo <= est <= hi under floating-point rounding of constant draws
    return Interval(est, float(min(lo, est)), float(max(hi, est)))


def summarize(samples) -> dict:
    """Posterior mean and central 95% interval for tau, phi and sigma2."""
    thetas = np.asarray(samples.thetas, dtype=float)
    if thetas.ndim != 2 or thetas.shape[0] < 2:
        raise ParameterError("need at least two posterior draws")
    return {name: summarize_draws(thetas[:, j]) for j, name in enumerate(PARAM_NAMES)}


def _h_draws(trajectories):
    if trajectories is None or len(trajectories) == 0:
        raise ParameterError("no stored trajectory draws")
    return np.asarray(trajectories, dtype=float)


def volatility_bands(log_h_draws):
    """Per-time (lower, mean, upper) of h_t for t = 1..T.

    ``log_h_draws`` has shape (k, T+1) with the initial state in column 0.
    """
    h = np.exp(_h_draws(log_h_draws)[:, 1:])
    lo, hi = _quantiles(h)
    return lo, h.mean(axis=0), hi


def predictive_bands(h_draws, stable: StableParams, rng: np.random.Generator):
    """Per-time 2.5%/97.5% quantiles of returns simulated once per h draw.

    ``h_draws`` has shape (k, T): row i is one posterior draw of (h_1..h_T).
    """
    h = _h_draws(h_draws)
    if h.ndim == 1:
        h = h[:, None]
    r = emit_return(h, stable, rng)
    lo, hi = _quantiles(r)
    return lo, hi


@dataclass
class FitReport:
    params: dict
    vol_lower: np.ndarray
    vol_mean: np.ndarray
    vol_upper: np.ndarray
    ret_lower: np.ndarray
    ret_upper: np.ndarray
    config: dict = field(default_factory=dict)
    seed: int = 0
    dates: list = field(default_factory=list)

    def to_dict(self):
        out = {name: self.params[name].to_dict() for name in PARAM_NAMES}
        out["config"] = self.config
        out["seed"] = self.seed
        return out

    def write(self, json_path, vol_path, ret_path):
        with open(json_path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        dates = self.dates or [""] * len(self.vol_mean)
        with open(vol_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "date", "lower", "mean", "upper"])
            for t, row in enumerate(zip(dates, self.vol_lower, self.vol_mean, self.vol_upper), 1):
                w.writerow([t, row[0], *(repr(float(v)) for v in row[1:])])
        with open(ret_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "date", "lower", "upper"])
            for t, row in enumerate(zip(dates, self.ret_lower, self.ret_upper), 1):
                w.writerow([t, row[0], *(repr(float(v)) for v in row[1:])])


def build_report(samples, stable: StableParams, rng, config=None, seed=0, dates=None) -> FitReport:
    vol = volatility_bands(samples.trajectories)
    ret = predictive_bands(np.exp(samples.trajectories[:, 1:]), stable, rng)
    return FitReport(summarize(samples), *vol, *ret, config or {}, seed, list(dates or []))
