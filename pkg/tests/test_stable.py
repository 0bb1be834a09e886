import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from abcpg.errors import ParameterError
from abcpg.stable import ALPHA_ONE_TOL, StableParams, char_fn, sample_stable

alphas = st.floats(0.1, 2.0)
betas = st.floats(-1.0, 1.0)
gammas = st.floats(0.0, 5.0)
deltas = st.floats(-5.0, 5.0)
ts = st.floats(-20.0, 20.0)


def empirical_cf(x, t):
    return np.exp(1j * np.outer(t, x)).mean(axis=1)


@pytest.mark.parametrize(
    "kw",
    [dict(alpha=0.0, beta=0.0), dict(alpha=2.1, beta=0.0), dict(alpha=1.5, beta=1.2),
     dict(alpha=1.5, beta=0.0, gamma=-1.0), dict(alpha=1.5, beta=0.0, delta=math.inf)],
)
def test_invalid_params_rejected(kw):
    with pytest.raises(ParameterError):
        StableParams(**kw)


def test_cf_at_zero_is_one():
    for a, b in [(0.5, 1.0), (1.0, -0.4), (1.75, 0.1), (2.0, 0.0)]:
        assert char_fn(StableParams(a, b, 2.0, 3.0), 0.0) == 1 + 0j


def test_cf_gaussian_case():
    assert char_fn(StableParams(2.0, 0.0), 1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_cf_cauchy_case():
    assert char_fn(StableParams(1.0, 0.0), 2.0) == pytest.approx(math.exp(-2.0), abs=1e-15)


def test_cf_matches_independent_formula():
    # S0 form written out by hand for a single point
    a, b, g, d, t = 1.7, 0.3, 1.3, -0.2, 0.8
    expo = -(g * t) ** a * (1 + 1j * b * math.tan(math.pi * a / 2) * ((g * t) ** (1 - a) - 1)) + 1j * d * t
    assert char_fn(StableParams(a, b, g, d), t) == pytest.approx(np.exp(expo), abs=1e-14)


def test_cf_alpha_one_branch_includes_log_term():
    a, b, g, t = 1.0, 0.5, 2.0, 1.5
    expected = np.exp(-g * t * (1 + 1j * b * (2 / math.pi) * math.log(g * t)))
    assert char_fn(StableParams(a, b, g), t) == pytest.approx(expected, abs=1e-15)


def test_cf_is_continuous_across_branch_tolerance():
    p_in = StableParams(1.0 + 0.5 * ALPHA_ONE_TOL, 0.4)
    p_out = StableParams(1.0 + 1e-6, 0.4)
    t = np.array([0.3, 1.0, 4.0])
    assert np.allclose(char_fn(p_in, t), char_fn(p_out, t), atol=1e-5)


@settings(max_examples=200, deadline=None)
@given(alphas, betas, gammas, deltas, ts)
def test_cf_modulus_and_conjugate_symmetry(a, b, g, d, t):
    p = StableParams(a, b, g, d)
    v = char_fn(p, t)
    assert abs(v) <= 1.0 + 1e-12
    assert char_fn(p, -t) == pytest.approx(np.conj(v), abs=1e-12)


def test_cf_vectorized():
    p = StableParams(1.5, -0.3)
    t = np.linspace(-3, 3, 7)
    assert np.array_equal(char_fn(p, t), np.array([char_fn(p, x) for x in t]))


def test_gaussian_variance():
    x = sample_stable(StableParams(2.0, 0.0), np.random.default_rng(0), 100_000)
    assert x.var() == pytest.approx(2.0, abs=0.1)


def test_cauchy_median():
    x = sample_stable(StableParams(1.0, 0.0), np.random.default_rng(1), 100_000)
    assert abs(np.median(x)) < 0.02


@pytest.mark.parametrize("a,b", [(1.75, 0.1), (1.7, 0.3), (1.5, -0.3), (1.0, 0.6), (0.7, -0.8)])
def test_empirical_cf_within_three_se(a, b):
    p = StableParams(a, b)
    n = 100_000
    x = sample_stable(p, np.random.default_rng(2), n)
    t = np.array([0.25, 0.5, 1.0, 2.0])
    diff = np.abs(empirical_cf(x, t) - char_fn(p, t))
    # |e^{itZ}| = 1, so each component has sd <= 1/sqrt(n); modulus sd <= sqrt(2/n)
    assert np.all(diff < 3 * math.sqrt(2.0 / n))


@pytest.mark.parametrize("a,b,g,d", [(1.75, 0.1, 1.0, 0.0), (1.5, -0.3, 1.5, 0.3), (1.0, 0.5, 0.7, -1.0)])
def test_draws_match_scipy_s0_cdf(a, b, g, d):
    ls = stats.levy_stable
    old = ls.parameterization
    ls.parameterization = "S0"
    try:
        x = sample_stable(StableParams(a, b, g, d), np.random.default_rng(3), 2000)
        p = stats.kstest(x, lambda z: ls.cdf(z, a, b, loc=d, scale=g)).pvalue
    finally:
        ls.parameterization = old
    assert p > 1e-3


@pytest.mark.parametrize("a", [2.0, 1.0])
def test_location_scale_equivariance(a):
    base = sample_stable(StableParams(a, 0.0), np.random.default_rng(4), 100_000)
    moved = sample_stable(StableParams(a, 0.0, 2.5, -1.0), np.random.default_rng(5), 100_000)
    q = [0.1, 0.25, 0.5, 0.75, 0.9]
    assert np.allclose(np.quantile(moved, q), 2.5 * np.quantile(base, q) - 1.0, rtol=0.04, atol=0.05)


def test_zero_scale_is_point_mass():
    x = sample_stable(StableParams(1.3, 0.7, 0.0, 2.5), np.random.default_rng(0), 10)
    assert np.all(x == 2.5)


def test_draws_are_reproducible():
    p = StableParams(1.5, -0.3)
    a = sample_stable(p, np.random.default_rng(9), 50)
    b = sample_stable(p, np.random.default_rng(9), 50)
    assert np.array_equal(a, b)
    assert isinstance(sample_stable(p, np.random.default_rng(9)), float)
    assert sample_stable(p, np.random.default_rng(9)) == a[0]


def test_size_shapes():
    x = sample_stable(StableParams(1.5, 0.0), np.random.default_rng(0), (3, 4))
    assert x.shape == (3, 4)
