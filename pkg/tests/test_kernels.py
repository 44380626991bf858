import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphmp import KernelMode, KernelParams, exp_kernel, nearest_node
from graphmp.kernels import chain_correlation


def test_exp_kernel_zero_distance_is_one():
    assert exp_kernel(0.0, 0.05) == 1.0


def test_exp_kernel_one_length_scale():
    assert exp_kernel(0.05, 0.05) == pytest.approx(math.exp(-1.0), abs=1e-12)
    assert exp_kernel(0.05, 0.05) == pytest.approx(0.367879, abs=1e-6)


def test_exp_kernel_limit_to_zero():
    values = [exp_kernel(d, 0.05) for d in (0.5, 1.0, 2.0, 5.0)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-40


@given(st.floats(min_value=0.0, max_value=1e6), st.floats(min_value=1e-6, max_value=1e3))
def test_exp_kernel_range(distance, lam):
    k = exp_kernel(distance, lam)
    assert 0.0 <= k <= 1.0
    if distance == 0.0:
        assert k == 1.0


@given(st.floats(min_value=0.0, max_value=10.0), st.floats(min_value=0.01, max_value=10.0),
       st.floats(min_value=0.5, max_value=10.0))
def test_exp_kernel_strictly_decreasing(d, extra, lam):
    # stay far from float underflow so the mathematical property is visible
    assert exp_kernel(d, lam) > exp_kernel(d + extra, lam)


@pytest.mark.parametrize("bad", [-1.0, np.nan, np.inf])
def test_exp_kernel_rejects_bad_distance(bad):
    with pytest.raises(ValueError):
        exp_kernel(bad, 0.05)


@pytest.mark.parametrize("bad", [0.0, -0.05, np.nan])
def test_exp_kernel_rejects_bad_length_scale(bad):
    with pytest.raises(ValueError):
        exp_kernel(0.1, bad)


def test_kernel_params_validation():
    with pytest.raises(ValueError):
        KernelParams(lambda_pos=0.0)
    with pytest.raises(ValueError):
        KernelParams(lambda_time=-1.0)
    with pytest.raises(ValueError):
        KernelParams(mode="sideways")


def _chain():
    positions = np.array([[0.0, 0.0], [0.1, 0.0], [0.2, 0.0]])
    times = np.array([0.0, 1.0, 2.0])
    return positions, times


def test_chain_correlation_on_node_is_one():
    positions, times = _chain()
    corr = chain_correlation(positions, times, positions[1], times[1], KernelParams())
    assert corr[1] == 1.0
    assert np.all(corr[[0, 2]] < 1.0)


def test_chain_correlation_pose_only_ignores_time():
    positions, times = _chain()
    params = KernelParams(mode=KernelMode.POSE_ONLY)
    a = chain_correlation(positions, times, [0.05, 0.0], 0.0, params)
    b = chain_correlation(positions, times, [0.05, 0.0], 123.4, params)
    assert np.array_equal(a, b)


def test_chain_correlation_analytic_product():
    positions, times = _chain()
    params = KernelParams(lambda_pos=0.05, lambda_time=0.05)
    # one length scale away in pose, aligned in time
    corr = chain_correlation(positions, times, [0.1 + 0.05, 0.0], times[1], params)
    assert corr[1] == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_chain_correlation_dimension_mismatch():
    positions, times = _chain()
    with pytest.raises(ValueError):
        chain_correlation(positions, times, [0.1, 0.0, 0.3], 0.0, KernelParams())


def test_nearest_node_examples():
    assert nearest_node([0.2, 0.9, 0.4]) == 1
    assert nearest_node([0.5, 0.5]) == 0  # ties break to the lowest index


def test_nearest_node_empty_rejected():
    with pytest.raises(ValueError):
        nearest_node([])


def test_nearest_node_rejects_nan():
    with pytest.raises(ValueError):
        nearest_node([0.1, np.nan])


def test_nearest_node_against_linear_scan():
    rng = np.random.default_rng(7)
    values = rng.uniform(0.0, 1.0, size=1000)
    best, best_i = -np.inf, -1
    for i, v in enumerate(values):  # independent scan oracle
        if v > best:
            best, best_i = v, i
    assert nearest_node(values) == best_i


@given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=200))
def test_nearest_node_matches_python_max(values):
    idx = nearest_node(values)
    assert values[idx] == max(values)
    assert idx == values.index(max(values))
