"""Conditional SMC kernels for the stochastic volatility model.

Every filter maps (returns, reference trajectory, theta) to a new trajectory
while leaving the extended target invariant. Particle indices are 0-based
and the reference occupies the last slot, ``N - 1``. Weights are carried as
logs and max-normalized after every assignment, so the largest is 0.

Filters:

* ``cbf`` / ``cbfas``: conditional bootstrap filter, without and with
  ancestor sampling, for a tractable likelihood callback.
* ``abc_cbf`` / ``abc_cbfas``: the same with the likelihood replaced by an
  ABC kernel comparing r_t with an auxiliary draw u_t ~ l(. | h_t).
* ``abc_capf``: ABC conditional auxiliary particle filter. Resampling uses
  tempered weights built from a Cauchy approximation of p(r_t | h_{t-1}),
  and the importance weights divide the tempering back out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

from .errors import DegenerateWeightsError, ParameterError
from .kernels import AbcConfig, log_kernel_scalar
from .stable import StableParams, stable_draw
from .svm import LOG_2PI, SvmParams, Trajectory

CBF, CBFAS, CAPF = 0, 1, 2
ABC_FILTERS = {"abc_cbf": CBF, "abc_cbfas": CBFAS, "abc_capf": CAPF}

#: log l_t(r_t | h_t), vectorized over h.
TractableLikelihood = Callable[[float, np.ndarray], np.ndarray]


def gaussian_loglik(r_t, h):
    """log N(r_t; 0, h), the likelihood when Z is standard Gaussian."""
    h = np.asarray(h, dtype=float)
    return -0.5 * (LOG_2PI + np.log(h)) - 0.5 * r_t * r_t / h


@dataclass
class ParticleSystem:
    """Full record of one filter pass.

    ``log_h[n, t]`` is particle n at time t; ``ancestors[n, t-1]`` is the
    index of its parent at time t-1. ``log_w[t]`` are the normalized
    importance log-weights at time t and ``log_w_tempered[t-1]`` the
    resampling log-weights used when moving from t-1 to t (cAPF only).
    """

    log_h: np.ndarray
    u: np.ndarray | None
    log_w: np.ndarray
    log_w_tempered: np.ndarray | None
    ancestors: np.ndarray
    selected: int

    @property
    def n_particles(self):
        return self.log_h.shape[0]

    @property
    def T(self):
        return self.log_h.shape[1] - 1

    def lineage(self, n=None):
        """Indices A_{t,T}^{(n)} for t = 0..T, traced back from slot ``n``."""
        n = self.selected if n is None else n
        idx = np.empty(self.T + 1, dtype=np.int64)
        idx[self.T] = n
        for t in range(self.T, 0, -1):
            idx[t - 1] = self.ancestors[idx[t], t - 1]
        return idx

    def path(self, n=None):
        idx = self.lineage(n)
        steps = np.arange(self.T + 1)
        u = None if self.u is None else self.u[idx[1:], steps[:-1]]
        return Trajectory(self.log_h[idx, steps], u)

    def normalized_weights(self, t=None):
        lw = self.log_w[self.T if t is None else t]
        w = np.exp(lw - lw.max())
        return w / w.sum()


# -- categorical sampling ----------------------------------------------------


@numba.njit(cache=True)
def _cumulative(log_w, cdf):
    """Fill ``cdf`` with the running sum of exp(log_w - max); False if all are -inf."""
    m = -np.inf
    for x in log_w:
        if x > m:
            m = x
    if m == -np.inf or np.isnan(m):
        return False
    s = 0.0
    for i in range(log_w.shape[0]):
        s += math.exp(log_w[i] - m)
        cdf[i] = s
    return True


@numba.njit(cache=True)
def _pick(cdf, x):
    i = np.searchsorted(cdf, x, side="right")
    n = cdf.shape[0]
    if i >= n:
        # x rounded up to the total: fall back to the last slot with mass
        i = n - 1
        while i > 0 and cdf[i] == cdf[i - 1]:
            i -= 1
    return i


@numba.njit(cache=True)
def _draw_categorical(rng, cdf, n_draws, out):
    total = cdf[cdf.shape[0] - 1]
    for k in range(n_draws):
        out[k] = _pick(cdf, rng.random() * total)


def multinomial_resample(log_weights, n_draws, rng: np.random.Generator):
    """i.i.d. categorical draws with probabilities proportional to exp(log_weights)."""
    lw = np.ascontiguousarray(log_weights, dtype=float)
    cdf = np.empty_like(lw)
    if lw.size == 0 or not _cumulative(lw, cdf):
        raise DegenerateWeightsError(-1, "all weights are zero")
    out = np.empty(int(n_draws), dtype=np.int64)
    _draw_categorical(rng, cdf, int(n_draws), out)
    return out


# -- tempering ---------------------------------------------------------------


@numba.njit(cache=True)
def _softplus(x):
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def tempered_logweight(r_t, h_prev, theta: SvmParams):
    """log of (1 + (r_t^2)^c exp(-c (tau + phi log h_prev)))^-1, c = pi / sqrt(sigma2 + pi^2).

    Approximates log p(r_t | h_{t-1}) up to a constant by treating the return
    noise as standard Cauchy. Equals 0 at r_t = 0.
    """
    h_prev = np.asarray(h_prev, dtype=float)
    if np.any(h_prev <= 0):
        raise ParameterError("h_prev must be > 0")
    c = math.pi / math.sqrt(theta.sigma2 + math.pi**2)
    with np.errstate(divide="ignore"):
        x = c * np.log(np.square(r_t)) - c * (theta.tau + theta.phi * np.log(h_prev))
    out = -np.logaddexp(0.0, x)
    return out[()] if np.ndim(out) == 0 else out


# -- ABC filters (compiled) --------------------------------------------------


@numba.njit(cache=True)
def _abc_filter(
    kind, r, ref_log_h, tau, phi, sigma2, alpha, beta, gamma, delta,
    kcode, eps, N, rng, ratio_on_reference, ref_u, keep_reference_u,
):
    T = r.shape[0]
    log_h = np.empty((N, T + 1))
    u = np.empty((N, T))
    anc = np.empty((N, T), dtype=np.int64)
    log_w = np.zeros((T + 1, N))
    log_wt = np.zeros((T, N))
    cdf = np.empty(N)
    aux = np.empty(N)
    temper = np.zeros(N)

    sd = math.sqrt(sigma2)
    m0 = tau / (1.0 - phi)
    s0 = math.sqrt(sigma2 / (1.0 - phi * phi))
    c = math.pi / math.sqrt(sigma2 + math.pi * math.pi)
    last = N - 1

    for n in range(last):
        log_h[n, 0] = m0 + s0 * rng.standard_normal()
    log_h[last, 0] = ref_log_h[0]

    for t in range(1, T + 1):
        rt = r[t - 1]
        if kind == CAPF:
            lr2 = math.log(rt * rt) if rt != 0.0 else -np.inf
            for n in range(N):
                temper[n] = -_softplus(c * lr2 - c * (tau + phi * log_h[n, t - 1]))
                log_wt[t - 1, n] = log_w[t - 1, n] + temper[n]
            ok = _cumulative(log_wt[t - 1], cdf)
        else:
            ok = _cumulative(log_w[t - 1], cdf)
        if not ok:
            return log_h, u, anc, log_w, log_wt, -1, t - 1

        _draw_categorical(rng, cdf, last, anc[:, t - 1])
        if kind == CBFAS:
            x = ref_log_h[t]
            for n in range(N):
                e = x - tau - phi * log_h[n, t - 1]
                aux[n] = log_w[t - 1, n] - 0.5 * e * e / sigma2
            if not _cumulative(aux, cdf):
                return log_h, u, anc, log_w, log_wt, -1, t - 1
            anc[last, t - 1] = _pick(cdf, rng.random() * cdf[last])
        else:
            anc[last, t - 1] = last

        for n in range(last):
            log_h[n, t] = tau + phi * log_h[anc[n, t - 1], t - 1] + sd * rng.standard_normal()
        log_h[last, t] = ref_log_h[t]

        for n in range(last):
            u[n, t - 1] = math.exp(0.5 * log_h[n, t]) * stable_draw(rng, alpha, beta, gamma, delta)
        if keep_reference_u:
            u[last, t - 1] = ref_u[t - 1]
        else:
            u[last, t - 1] = math.exp(0.5 * log_h[last, t]) * stable_draw(rng, alpha, beta, gamma, delta)

        m = -np.inf
        for n in range(N):
            lk = log_kernel_scalar(kcode, eps, rt, u[n, t - 1])
            if kind == CAPF and (n < last or ratio_on_reference):
                lk -= temper[anc[n, t - 1]]
            log_w[t, n] = lk
            if lk > m:
                m = lk
        if m == -np.inf or np.isnan(m):
            return log_h, u, anc, log_w, log_wt, -1, t
        for n in range(N):
            log_w[t, n] -= m

    _cumulative(log_w[T], cdf)
    b = _pick(cdf, rng.random() * cdf[last])
    return log_h, u, anc, log_w, log_wt, b, -1


def _check_inputs(r, ref: Trajectory, N):
    r = np.ascontiguousarray(r, dtype=float)
    if N < 1:
        raise ParameterError(f"need at least one particle, got N={N}")
    if len(ref.log_h) != len(r) + 1:
        raise ParameterError(
            f"reference has {len(ref.log_h)} states, expected T+1 = {len(r) + 1}"
        )
    return r


def abc_particle_system(
    name, r, ref: Trajectory, theta: SvmParams, stable: StableParams, abc: AbcConfig,
    N: int, rng: np.random.Generator, ratio_on_reference=False, keep_reference_u=False,
) -> ParticleSystem:
    """Run one ABC filter pass and return every particle, weight and ancestor.

    By default the reference slot gets a fresh auxiliary draw at every step.
    ``keep_reference_u=True`` instead carries ``ref.u`` through unchanged,
    treating u as part of the retained state.
    """
    kind = ABC_FILTERS[name]
    r = _check_inputs(r, ref, N)
    if keep_reference_u:
        if ref.u is None:
            raise ParameterError("keep_reference_u needs a reference carrying u")
        ref_u = np.ascontiguousarray(ref.u, dtype=float)
    else:
        ref_u = np.empty(0)
    log_h, u, anc, log_w, log_wt, b, bad = _abc_filter(
        kind, r, np.ascontiguousarray(ref.log_h), theta.tau, theta.phi, theta.sigma2,
        *stable.as_tuple(), abc.code, abc.epsilon, int(N), rng, bool(ratio_on_reference),
        ref_u, bool(keep_reference_u),
    )
    if bad >= 0:
        raise DegenerateWeightsError(bad)
    return ParticleSystem(log_h, u, log_w, log_wt if kind == CAPF else None, anc, int(b))


def abc_cbf(r, ref, theta, stable, abc, N, rng) -> Trajectory:
    return abc_particle_system("abc_cbf", r, ref, theta, stable, abc, N, rng).path()


def abc_cbfas(r, ref, theta, stable, abc, N, rng) -> Trajectory:
    return abc_particle_system("abc_cbfas", r, ref, theta, stable, abc, N, rng).path()


def abc_capf(r, ref, theta, stable, abc, N, rng, ratio_on_reference=False) -> Trajectory:
    """ABC conditional APF.

    The reference slot's weight is the bare kernel value by default.
    ``ratio_on_reference=True`` also divides it by its tempering factor, like
    every other slot.
    """
    ps = abc_particle_system(
        "abc_capf", r, ref, theta, stable, abc, N, rng, ratio_on_reference
    )
    return ps.path()


# -- tractable-likelihood filters (validation paths) -------------------------


def tractable_particle_system(
    r, ref: Trajectory, theta: SvmParams, lik: TractableLikelihood, N: int,
    rng: np.random.Generator, ancestor_sampling=False,
) -> ParticleSystem:
    r = _check_inputs(r, ref, N)
    T = len(r)
    last = N - 1
    log_h = np.empty((N, T + 1))
    anc = np.empty((N, T), dtype=np.int64)
    log_w = np.zeros((T + 1, N))
    cdf = np.empty(N)
    sd = math.sqrt(theta.sigma2)

    log_h[:last, 0] = theta.stationary_mean + math.sqrt(theta.stationary_var) * rng.standard_normal(last)
    log_h[last, 0] = ref.log_h[0]
    for t in range(1, T + 1):
        prev = log_w[t - 1]
        _cumulative(prev, cdf)
        _draw_categorical(rng, cdf, last, anc[:last, t - 1])
        if ancestor_sampling:
            e = ref.log_h[t] - theta.tau - theta.phi * log_h[:, t - 1]
            anc[last, t - 1] = multinomial_resample(prev - 0.5 * e * e / theta.sigma2, 1, rng)[0]
        else:
            anc[last, t - 1] = last
        parents = log_h[anc[:last, t - 1], t - 1]
        log_h[:last, t] = theta.tau + theta.phi * parents + sd * rng.standard_normal(last)
        log_h[last, t] = ref.log_h[t]
        lw = np.asarray(lik(r[t - 1], np.exp(log_h[:, t])), dtype=float)
        if not np.any(np.isfinite(lw)):
            raise DegenerateWeightsError(t)
        log_w[t] = lw - lw.max()
    b = int(multinomial_resample(log_w[T], 1, rng)[0])
    return ParticleSystem(log_h, None, log_w, None, anc, b)


def cbf(r, ref, theta, lik, N, rng) -> Trajectory:
    return tractable_particle_system(r, ref, theta, lik, N, rng).path()


def cbfas(r, ref, theta, lik, N, rng) -> Trajectory:
    return tractable_particle_system(r, ref, theta, lik, N, rng, ancestor_sampling=True).path()
