"""Stochastic volatility model with stable return noise.

    log h_t = tau + phi log h_{t-1} + sigma_h eps_t,   eps_t ~ N(0, 1)
    r_t     = sqrt(h_t) Z_t,                           Z_t ~ SD(alpha, beta, gamma, delta)
    h_0     ~ LogNormal(tau / (1 - phi), sigma_h^2 / (1 - phi^2))

Time indexing: h[0] is the unobserved initial volatility, r[t-1] pairs with h[t].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .stable import StableParams, sample_stable

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SvmParams:
    tau: float
    phi: float
    sigma2: float

    def __post_init__(self):
        if not abs(self.phi) < 1.0:
            raise ParameterError(f"|phi| must be < 1, got {self.phi}")
        if not self.sigma2 > 0.0 or not math.isfinite(self.sigma2):
            raise ParameterError(f"sigma2 must be finite and > 0, got {self.sigma2}")
        if not math.isfinite(self.tau):
            raise ParameterError(f"tau must be finite, got {self.tau}")

    @property
    def stationary_mean(self):
        """Mean of log h under the stationary law."""
        return self.tau / (1.0 - self.phi)

    @property
    def stationary_var(self):
        """Variance of log h under the stationary law."""
        return self.sigma2 / (1.0 - self.phi**2)


@dataclass(frozen=True)
class GridPoint:
    phi: float
    cv: float
    mean_h: float = 0.0009

    def __post_init__(self):
        if not self.cv > 0 or not abs(self.phi) < 1 or not self.mean_h > 0:
            raise ParameterError(f"invalid grid point {self}")


@dataclass
class Trajectory:
    """Latent path. ``log_h`` has length T+1; ``u`` (ABC only) has length T.

    Log-volatilities are the stored quantity: under diffuse priors the
    stationary law can put log h outside the range where exp() is finite.
    """

    log_h: np.ndarray
    u: np.ndarray | None = None

    def __post_init__(self):
        self.log_h = np.asarray(self.log_h, dtype=float)
        if self.u is not None:
            self.u = np.asarray(self.u, dtype=float)
            if len(self.u) != len(self.log_h) - 1:
                raise ParameterError(
                    f"u has length {len(self.u)}, expected {len(self.log_h) - 1}"
                )

    @classmethod
    def from_h(cls, h, u=None):
        h = np.asarray(h, dtype=float)
        if np.any(h <= 0):
            raise ParameterError("volatilities must be strictly positive")
        return cls(np.log(h), u)

    @property
    def h(self):
        return np.exp(self.log_h)

    @property
    def T(self):
        return len(self.log_h) - 1

    def copy(self):
        return Trajectory(self.log_h.copy(), None if self.u is None else self.u.copy())


def initial_sample(theta: SvmParams, rng: np.random.Generator, size=None):
    m = theta.stationary_mean
    s = math.sqrt(theta.stationary_var)
    return np.exp(m + s * rng.standard_normal(size))


def transition_sample(h_prev, theta: SvmParams, rng: np.random.Generator, size=None):
    h_prev = np.asarray(h_prev, dtype=float)
    if np.any(h_prev <= 0):
        raise ParameterError("h_prev must be > 0")
    if size is None:
        size = h_prev.shape or None
    z = rng.standard_normal(size)
    return np.exp(theta.tau + theta.phi * np.log(h_prev) + math.sqrt(theta.sigma2) * z)


def transition_logdensity(h_t, h_prev, theta: SvmParams):
    """log g(h_t | h_prev): log-normal density including the 1/h_t Jacobian."""
    h_t = np.asarray(h_t, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    if np.any(h_t <= 0) or np.any(h_prev <= 0):
        raise ParameterError("volatilities must be > 0")
    log_ht = np.log(h_t)
    resid = log_ht - theta.tau - theta.phi * np.log(h_prev)
    out = -0.5 * (LOG_2PI + math.log(theta.sigma2)) - 0.5 * resid**2 / theta.sigma2 - log_ht
    return out[()] if out.ndim == 0 else out


def initial_logdensity_log(log_h0, theta: SvmParams):
    """Density of log h_0 under the stationary Gaussian law (no Jacobian)."""
    v = theta.stationary_var
    return -0.5 * (LOG_2PI + math.log(v)) - 0.5 * (log_h0 - theta.stationary_mean) ** 2 / v


def emit_return(h_t, stable: StableParams, rng: np.random.Generator, size=None):
    """sqrt(h_t) * Z with Z stable; also the ABC auxiliary-observation draw."""
    h_t = np.asarray(h_t, dtype=float)
    if np.any(h_t < 0):
        raise ParameterError("h_t must be >= 0")
    if size is None and h_t.ndim == 0:
        return math.sqrt(float(h_t)) * sample_stable(stable, rng)
    shape = size if size is not None else h_t.shape
    return np.sqrt(h_t) * sample_stable(stable, rng, shape)


def simulate(theta: SvmParams, stable: StableParams, T: int, rng: np.random.Generator):
    """Simulate (Trajectory without u, returns r_{1:T})."""
    if T < 0:
        raise ParameterError(f"T must be >= 0, got {T}")
    log_h = np.empty(T + 1)
    log_h[0] = math.log(initial_sample(theta, rng))
    r = np.empty(T)
    sd = math.sqrt(theta.sigma2)
    for t in range(1, T + 1):
        log_h[t] = theta.tau + theta.phi * log_h[t - 1] + sd * rng.standard_normal()
        r[t - 1] = math.exp(0.5 * log_h[t]) * sample_stable(stable, rng)
    return Trajectory(log_h), r


def grid_params(g: GridPoint) -> SvmParams:
    """Invert (phi, CV, E h) to (tau, phi, sigma2) under the stationary log-normal law."""
    one_m_phi2 = 1.0 - g.phi**2
    sigma2 = one_m_phi2 * math.log1p(g.cv)
    tau = (1.0 - g.phi) * (math.log(g.mean_h) - sigma2 / (2.0 * one_m_phi2))
    return SvmParams(tau, g.phi, sigma2)


def grid_moments(theta: SvmParams):
    """(CV, E h) implied by theta; inverse of :func:`grid_params`."""
    v = theta.stationary_var
    return math.expm1(v), math.exp(theta.stationary_mean + 0.5 * v)
