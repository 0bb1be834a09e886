"""ABC comparison kernels, evaluated in log space.

Only unnormalized log-kernels are returned; the normalizing constants cancel
in self-normalized particle weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import ParameterError

KERNELS = ("gaussian", "uniform")
GAUSSIAN, UNIFORM = 0, 1


@dataclass(frozen=True)
class AbcConfig:
    epsilon: float = 0.001
    kind: str = "gaussian"

    def __post_init__(self):
        if not self.epsilon > 0 or not math.isfinite(self.epsilon):
            raise ParameterError(f"epsilon must be finite and > 0, got {self.epsilon}")
        if self.kind not in KERNELS:
            raise ParameterError(f"kernel must be one of {KERNELS}, got {self.kind!r}")

    @property
    def code(self):
        return KERNELS.index(self.kind)


@numba.njit(cache=True)
def log_kernel_scalar(code, epsilon, r, u):
    if code == GAUSSIAN:
        d = (r - u) / epsilon
        return -0.5 * d * d
    return 0.0 if abs(r - u) < epsilon else -np.inf


def log_kernel(cfg: AbcConfig, r, u):
    """log K_eps(r | u); -inf outside the uniform kernel's open window."""
    diff = np.asarray(r, dtype=float) - np.asarray(u, dtype=float)
    if cfg.kind == "gaussian":
        out = -0.5 * (diff / cfg.epsilon) ** 2
    else:
        out = np.where(np.abs(diff) < cfg.epsilon, 0.0, -np.inf)
    return out[()] if np.ndim(out) == 0 else out
