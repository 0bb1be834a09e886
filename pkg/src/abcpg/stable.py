"""Univariate alpha-stable laws in Nolan's continuous S0 parameterization.

The characteristic function is

    alpha != 1:  exp(-g^a |t|^a [1 + i b sign(t) tan(pi a / 2) ((g|t|)^(1-a) - 1)] + i d t)
    alpha == 1:  exp(-g |t| [1 + i b (2/pi) sign(t) log(g|t|)] + i d t)

Draws use the Chambers-Mallows-Stuck construction, which natively yields the
S1 form; the S0 location is recovered by subtracting ``b g tan(pi a / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import ParameterError

#: |alpha - 1| below this selects the alpha = 1 formulas.
ALPHA_ONE_TOL = 1e-8


@dataclass(frozen=True)
class StableParams:
    alpha: float
    beta: float
    gamma: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not (-1.0 <= self.beta <= 1.0):
            raise ParameterError(f"beta must lie in [-1, 1], got {self.beta}")
        if not (self.gamma >= 0.0) or not math.isfinite(self.gamma):
            raise ParameterError(f"gamma must be finite and >= 0, got {self.gamma}")
        if not math.isfinite(self.delta):
            raise ParameterError(f"delta must be finite, got {self.delta}")

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma, self.delta)


def char_fn(params: StableParams, t):
    """Characteristic function at ``t`` (scalar or array)."""
    a, b, g, d = params.as_tuple()
    t = np.asarray(t, dtype=float)
    at = np.abs(t)
    sgn = np.sign(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        gt = g * at
        if abs(a - 1.0) < ALPHA_ONE_TOL:
            log_gt = np.where(gt > 0, np.log(np.where(gt > 0, gt, 1.0)), 0.0)
            expo = -gt * (1.0 + 1j * b * (2.0 / np.pi) * sgn * log_gt)
        else:
            # (g|t|)^(1-a) - 1 times g^a|t|^a; both vanish together at t = 0
            corr = np.where(gt > 0, np.power(np.where(gt > 0, gt, 1.0), 1.0 - a) - 1.0, 0.0)
            expo = -np.power(gt, a) * (1.0 + 1j * b * sgn * math.tan(math.pi * a / 2.0) * corr)
    out = np.exp(expo + 1j * d * t)
    return out[()] if out.ndim == 0 else out


@numba.njit(cache=True)
def stable_draw(rng, alpha, beta, gamma, delta):
    """One S0 draw from the given generator (compiled; used inside the filters)."""
    if gamma == 0.0:
        return delta
    v = math.pi * (rng.random() - 0.5)
    w = rng.standard_exponential()
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        half_pi = 0.5 * math.pi
        bv = half_pi + beta * v
        x = (bv * math.tan(v) - beta * math.log(half_pi * w * math.cos(v) / bv)) / half_pi
        return gamma * x + delta
    zeta = beta * math.tan(0.5 * math.pi * alpha)
    shift = math.atan(zeta) / alpha
    scale = (1.0 + zeta * zeta) ** (0.5 / alpha)
    av = alpha * (v + shift)
    x = (
        scale
        * math.sin(av)
        / math.cos(v) ** (1.0 / alpha)
        * (math.cos(v - av) / w) ** ((1.0 - alpha) / alpha)
    )
    return gamma * (x - zeta) + delta


@numba.njit(cache=True)
def _stable_fill(rng, alpha, beta, gamma, delta, out):
    for i in range(out.shape[0]):
        out[i] = stable_draw(rng, alpha, beta, gamma, delta)


def sample_stable(params: StableParams, rng: np.random.Generator, size=None):
    """Draw from SD(alpha, beta, gamma, delta); a float when ``size`` is None."""
    a, b, g, d = params.as_tuple()
    if size is None:
        return float(stable_draw(rng, a, b, g, d))
    out = np.empty(int(np.prod(size)))
    _stable_fill(rng, a, b, g, d, out)
    return out.reshape(size)
