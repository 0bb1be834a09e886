"""Particle Gibbs for the ABC stochastic volatility model.

Each sweep refreshes the latent path with a conditional SMC kernel and then
redraws theta = (tau, phi, sigma2) from the truncated normal-inverse-Gamma
posterior of the AR(1) regression log h_t = tau + phi log h_{t-1} + noise.

That regression posterior ignores the factor g_0(h_0 | theta) contributed by
the stationary initial law, so on its own it is not the exact full
conditional. With ``h0_correction`` (the default) the NIG draw is used as an
independence proposal and accepted with probability
min(1, g_0(h_0 | theta') / g_0(h_0 | theta)), which restores exact
invariance. Set it to False for the plain conjugate update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, TruncationError
from .filters import ABC_FILTERS, abc_particle_system
from .kernels import AbcConfig
from .stable import StableParams, stable_draw
from .svm import SvmParams, Trajectory, initial_logdensity_log

MAX_TRUNCATION_ATTEMPTS = 10**6


@dataclass(frozen=True)
class NigState:
    a: float
    b: float
    mu: tuple = (0.0, 0.9)
    lam: tuple = ((1.0, 0.0), (0.0, 1.0))

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if not (self.a > 0 and self.b > 0):
            raise ParameterError(f"need a > 0 and b > 0, got a={self.a}, b={self.b}")
        if lam.shape != (2, 2) or lam[0, 1] != lam[1, 0]:
            raise ParameterError("lambda must be a symmetric 2x2 matrix")
        if not (lam[0, 0] > 0 and lam[0, 0] * lam[1, 1] - lam[0, 1] ** 2 > 0):
            raise ParameterError("lambda must be positive definite")
        object.__setattr__(self, "mu", tuple(float(x) for x in self.mu))
        object.__setattr__(self, "lam", tuple(tuple(float(x) for x in row) for row in lam))


#: Weakly informative prior used throughout the simulation study.
DEFAULT_PRIOR = NigState(2.0, 0.5, (0.0, 0.9), ((1.0, 0.0), (0.0, 1.0)))


def _inv2(m):
    (p, q), (_, s) = m
    det = p * s - q * q
    return ((s / det, -q / det), (-q / det, p / det))


def nig_update_log(prior: NigState, log_h) -> NigState:
    """Conjugate update from log-volatilities (length T+1)."""
    x = np.asarray(log_h, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ParameterError("log-volatilities must be finite")
    T = len(x) - 1
    if T <= 0:
        return prior
    xs, ys = x[:-1], x[1:]
    (l00, l01), (_, l11) = prior.lam
    m0, m1 = prior.mu
    lam = ((l00 + T, l01 + xs.sum()), (l01 + xs.sum(), l11 + xs @ xs))
    rhs0 = l00 * m0 + l01 * m1 + ys.sum()
    rhs1 = l01 * m0 + l11 * m1 + xs @ ys
    (i00, i01), (_, i11) = _inv2(lam)
    mu0 = i00 * rhs0 + i01 * rhs1
    mu1 = i01 * rhs0 + i11 * rhs1
    # residual form of y'y + mu0'L0 mu0 - muT'LT muT: same value, never negative
    e = ys - mu0 - mu1 * xs
    d0, d1 = mu0 - m0, mu1 - m1
    quad = d0 * d0 * l00 + 2.0 * d0 * d1 * l01 + d1 * d1 * l11
    b = prior.b + 0.5 * (e @ e + quad)
    return NigState(prior.a + 0.5 * T, b, (mu0, mu1), lam)


def nig_update(prior: NigState, h) -> NigState:
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ParameterError("volatilities must be strictly positive")
    return nig_update_log(prior, np.log(h))


def sample_truncated_nig(post: NigState, rng: np.random.Generator,
                         max_attempts=MAX_TRUNCATION_ATTEMPTS) -> SvmParams:
    """Joint rejection draw from NIG(a, b, mu, lam) restricted to |phi| < 1."""
    (s00, s01), (_, s11) = _inv2(post.lam)
    l00 = math.sqrt(s00)
    l10 = s01 / l00
    l11 = math.sqrt(max(s11 - l10 * l10, 0.0))
    m0, m1 = post.mu
    for _ in range(max_attempts):
        sigma2 = post.b / rng.gamma(post.a)
        z0, z1 = rng.standard_normal(2)
        sd = math.sqrt(sigma2)
        phi = m1 + sd * (l10 * z0 + l11 * z1)
        if abs(phi) < 1.0 and sigma2 > 0.0 and math.isfinite(sigma2):
            return SvmParams(m0 + sd * l00 * z0, phi, sigma2)
    raise TruncationError(max_attempts, post.mu, post.lam, post.a, post.b)


@dataclass
class PgConfig:
    n_particles: int = 100
    burn_in: int = 2000
    n_samples: int = 5000
    abc: AbcConfig = field(default_factory=AbcConfig)
    stable: StableParams = field(default_factory=lambda: StableParams(1.75, 0.1))
    prior: NigState = DEFAULT_PRIOR
    filter: str = "abc_capf"
    seed: int = 0
    #: keep every k-th post-burn-in trajectory; 0 keeps none
    trajectory_thin: int = 0
    h0_correction: bool = True
    ratio_on_reference: bool = False
    keep_reference_u: bool = False

    def __post_init__(self):
        if self.n_particles < 1:
            raise ParameterError("n_particles must be >= 1")
        if self.n_samples < 1 or self.burn_in < 0:
            raise ParameterError("need n_samples >= 1 and burn_in >= 0")
        if self.filter not in ABC_FILTERS:
            raise ParameterError(f"filter must be one of {sorted(ABC_FILTERS)}")
        if self.trajectory_thin < 0:
            raise ParameterError("trajectory_thin must be >= 0")


@dataclass
class PosteriorSample:
    thetas: np.ndarray
    trajectories: np.ndarray | None = None
    h0_acceptance: float = 1.0

    @property
    def theta_draws(self):
        return [SvmParams(*row) for row in self.thetas]

    @property
    def trajectory_draws(self):
        if self.trajectories is None:
            return []
        return [Trajectory(row) for row in self.trajectories]

    def posterior_mean(self):
        return SvmParams(*self.thetas.mean(axis=0))


def pg_init(cfg: PgConfig, T: int, rng: np.random.Generator):
    """theta from the prior, then a path (h and u) simulated forward under it."""
    theta = sample_truncated_nig(cfg.prior, rng)
    log_h = np.empty(T + 1)
    u = np.empty(T)
    log_h[0] = theta.stationary_mean + math.sqrt(theta.stationary_var) * rng.standard_normal()
    sd = math.sqrt(theta.sigma2)
    for t in range(1, T + 1):
        log_h[t] = theta.tau + theta.phi * log_h[t - 1] + sd * rng.standard_normal()
        u[t - 1] = math.exp(0.5 * log_h[t]) * stable_draw(rng, *cfg.stable.as_tuple())
    return theta, Trajectory(log_h, u)


def update_theta(theta: SvmParams, traj: Trajectory, cfg: PgConfig, rng):
    """Parameter block of a sweep; returns (theta, accepted)."""
    proposal = sample_truncated_nig(nig_update_log(cfg.prior, traj.log_h), rng)
    if not cfg.h0_correction:
        return proposal, True
    x0 = traj.log_h[0]
    log_ratio = initial_logdensity_log(x0, proposal) - initial_logdensity_log(x0, theta)
    if log_ratio >= 0 or math.log(rng.random()) < log_ratio:
        return proposal, True
    return theta, False


def _sweep(theta, ref, r, cfg: PgConfig, rng):
    ps = abc_particle_system(
        cfg.filter, r, ref, theta, cfg.stable, cfg.abc, cfg.n_particles, rng,
        cfg.ratio_on_reference, cfg.keep_reference_u,
    )
    traj = ps.path()
    theta, accepted = update_theta(theta, traj, cfg, rng)
    return theta, traj, accepted


def pg_sweep(state, r, cfg: PgConfig, rng: np.random.Generator):
    """Trajectory first (conditional SMC), then parameters."""
    theta, traj, _ = _sweep(*state, np.ascontiguousarray(r, dtype=float), cfg, rng)
    return theta, traj


def run_pg(r, cfg: PgConfig, rng: np.random.Generator | None = None) -> PosteriorSample:
    r = np.ascontiguousarray(r, dtype=float)
    if r.size == 0:
        raise ParameterError("need at least one observation")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    theta, traj = pg_init(cfg, len(r), rng)
    thetas = np.empty((cfg.n_samples, 3))
    kept = []
    accepted = 0
    for it in range(cfg.burn_in + cfg.n_samples):
        theta, traj, ok = _sweep(theta, traj, r, cfg, rng)
        accepted += ok
        k = it - cfg.burn_in
        if k >= 0:
            thetas[k] = (theta.tau, theta.phi, theta.sigma2)
            if cfg.trajectory_thin and k % cfg.trajectory_thin == 0:
                kept.append(traj.log_h)
    return PosteriorSample(
        thetas,
        np.array(kept) if kept else None,
        accepted / (cfg.burn_in + cfg.n_samples),
    )
