import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abcpg.errors import ParameterError
from abcpg.kernels import GAUSSIAN, UNIFORM, AbcConfig, log_kernel, log_kernel_scalar

reals = st.floats(-10.0, 10.0)
bandwidths = st.floats(1e-4, 10.0)


def test_config_validation():
    with pytest.raises(ParameterError):
        AbcConfig(0.0)
    with pytest.raises(ParameterError):
        AbcConfig(math.inf)
    with pytest.raises(ParameterError):
        AbcConfig(0.1, "triangle")
    assert AbcConfig().epsilon == 0.001 and AbcConfig().kind == "gaussian"


def test_gaussian_values():
    cfg = AbcConfig(0.001)
    assert log_kernel(cfg, 0.3, 0.3) == 0.0
    assert log_kernel(cfg, 0.001, 0.0) == pytest.approx(-0.5, rel=1e-12)


def test_uniform_open_boundary():
    cfg = AbcConfig(0.5, "uniform")
    assert log_kernel(cfg, 0.0, 0.499) == 0.0
    assert log_kernel(cfg, 0.0, 0.5) == -math.inf


@given(reals, reals, bandwidths, st.sampled_from(["gaussian", "uniform"]))
def test_symmetry(r, u, eps, kind):
    cfg = AbcConfig(eps, kind)
    assert log_kernel(cfg, r, u) == log_kernel(cfg, u, r)


@given(reals, reals, bandwidths, st.sampled_from(["gaussian", "uniform"]))
def test_compiled_and_numpy_agree(r, u, eps, kind):
    cfg = AbcConfig(eps, kind)
    assert log_kernel_scalar(cfg.code, eps, r, u) == log_kernel(cfg, r, u)


def test_codes():
    assert AbcConfig(1.0, "gaussian").code == GAUSSIAN
    assert AbcConfig(1.0, "uniform").code == UNIFORM


@given(st.floats(0.0, 5.0), st.floats(1e-6, 5.0), bandwidths)
def test_gaussian_strictly_decreasing_in_distance(d, step, eps):
    cfg = AbcConfig(eps)
    near, far = log_kernel(cfg, d, 0.0), log_kernel(cfg, d + step, 0.0)
    assert far < near or (far == near == -math.inf) or far == -math.inf


def test_large_bandwidth_flattens_weights():
    u = np.random.default_rng(0).normal(0.0, 0.1, 50)
    for kind in ("gaussian", "uniform"):
        lw = log_kernel(AbcConfig(1e6, kind), 0.02, u)
        assert np.all(np.abs(lw) < 1e-12)


def test_small_bandwidth_concentrates_on_nearest():
    u = np.random.default_rng(1).normal(0.0, 0.1, 50)
    r = 0.013
    lw = log_kernel(AbcConfig(1e-4), r, u)
    w = np.exp(lw - lw.max())
    w /= w.sum()
    best = np.argmin(np.abs(r - u))
    assert np.argmax(w) == best and w[best] > 0.99


def test_vectorized_shape():
    out = log_kernel(AbcConfig(0.1), np.zeros(4), np.arange(4.0))
    assert out.shape == (4,)
    assert isinstance(log_kernel(AbcConfig(0.1), 0.0, 1.0), float)
