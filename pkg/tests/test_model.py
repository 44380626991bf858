import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphmp import (
    Demonstration,
    KernelMode,
    KernelParams,
    append_session,
    fit_from_demonstration,
    generate_letter_b,
    ggp_query,
    joint_correlation,
)
from graphmp.kernels import chain_correlation


def brute_force_query(model, x, t_b, mode=None):
    """Exhaustive linear-scan oracle: best node by correlation, then its label."""
    corr = joint_correlation(x, t_b, model, mode)
    best, best_i = -np.inf, -1
    for i in range(corr.shape[0]):
        if corr[i] > best:
            best, best_i = corr[i], i
    return model.labels[best_i], 1.0 - best, best_i


# -- demonstration invariants -------------------------------------------------

def test_demonstration_requires_two_points():
    with pytest.raises(ValueError):
        Demonstration(np.array([[0.0, 0.0]]), np.array([0.0]))


def test_demonstration_rejects_time_regression():
    with pytest.raises(ValueError, match="strictly increasing"):
        Demonstration(np.zeros((3, 2)), np.array([0.0, 1.0, 1.0]))


def test_demonstration_rejects_sparse_recording():
    points = np.array([[0.0, 0.0], [0.2, 0.0]])  # 0.2 m jump > 0.1 m default gap
    with pytest.raises(ValueError, match="max gap"):
        Demonstration(points, np.array([0.0, 1.0]))
    Demonstration(points, np.array([0.0, 1.0]), max_gap=0.25)


def test_demonstration_rejects_nan():
    with pytest.raises(ValueError):
        Demonstration(np.array([[0.0, np.nan], [0.1, 0.0]]), np.array([0.0, 1.0]))


# -- fitting ------------------------------------------------------------------

def test_fit_two_point_demo():
    demo = Demonstration(np.array([[0.0, 0.0], [0.05, 0.0]]), np.array([0.0, 1.0]))
    model = fit_from_demonstration(demo)
    assert model.n_nodes == 1
    assert np.array_equal(model.goal, np.array([0.05, 0.0, 1.0]))
    assert np.array_equal(model.labels[0], model.goal)


def test_fit_label_shift_structure(line_demo):
    model = fit_from_demonstration(line_demo)
    n = line_demo.n
    assert model.states.shape == (n - 1, 3)
    # labels are the states shifted by one; the last label is the goal
    assert np.array_equal(model.labels[:-1], model.states[1:])
    assert np.array_equal(model.labels[-1], model.goal)
    assert np.all(model.labels[:, -1] > model.states[:, -1])


def test_fit_is_immutable(line_model):
    with pytest.raises(ValueError):
        line_model.states[0, 0] = 99.0


def test_chained_queries_visit_every_node_in_order(line_model):
    """Walking the chain from the first node reproduces the input order."""
    x = line_model.states[0, :-1]
    t_b = float(line_model.states[0, -1])
    visited = []
    for _ in range(line_model.n_nodes):
        q = ggp_query(line_model, x, t_b)
        visited.append(q.nearest_index)
        x, t_b = q.goal_pos, q.goal_time
    assert visited == list(range(line_model.n_nodes))


# -- queries ------------------------------------------------------------------

def test_query_on_node_returns_successor(line_model):
    for i in (0, 10, 50, 99):
        q = ggp_query(line_model, line_model.states[i, :-1], float(line_model.states[i, -1]))
        assert q.nearest_index == i
        assert q.sigma == 0.0
        assert np.array_equal(q.goal_pos, line_model.labels[i, :-1])
        assert q.goal_time == line_model.labels[i, -1]


def test_query_sigma_one_length_scale(line_model):
    node = line_model.states[40]
    x = node[:-1] + np.array([0.0, 0.05])  # one lambda_pos off, time aligned
    q = ggp_query(line_model, x, float(node[-1]))
    assert q.sigma == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
    assert q.sigma == pytest.approx(0.632121, abs=1e-6)


def test_query_matches_oracle_on_random_model():
    rng = np.random.default_rng(3)
    demo = _random_walk_demo(rng, 50)
    model = fit_from_demonstration(demo)
    for _ in range(100):
        x = rng.uniform(-0.2, 0.8, 2)
        t_b = rng.uniform(-1.0, demo.times[-1] + 1.0)
        oracle_label, oracle_sigma, oracle_i = brute_force_query(model, x, t_b)
        q = ggp_query(model, x, t_b)
        assert q.nearest_index == oracle_i
        assert np.array_equal(q.goal_pos, oracle_label[:-1])
        assert abs(q.sigma - oracle_sigma) <= 1e-12


def _random_walk_demo(rng, n):
    steps = rng.uniform(-0.03, 0.03, size=(n, 2))
    points = 0.3 + np.cumsum(steps, axis=0)
    return Demonstration(points, np.sort(rng.uniform(0.0, 5.0, n) + np.arange(n)))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_sigma_identity(seed):
    """sigma is one minus the maximum correlation, to 1e-12."""
    rng = np.random.default_rng(seed)
    demo = _random_walk_demo(rng, 20)
    model = fit_from_demonstration(demo)
    x = rng.uniform(0.0, 0.6, 2)
    t_b = rng.uniform(0.0, 30.0)
    q = ggp_query(model, x, t_b)
    assert abs(q.sigma - (1.0 - joint_correlation(x, t_b, model).max())) <= 1e-12


def test_query_dimension_mismatch(line_model):
    with pytest.raises(ValueError):
        ggp_query(line_model, np.zeros(3), 0.0)


def test_chain_walk_reaches_goal_in_n_steps():
    """Kinematic chain walk terminates in at most n-1 hops from anywhere."""
    rng = np.random.default_rng(11)
    demo = _random_walk_demo(rng, 60)
    model = fit_from_demonstration(demo)
    for trial in range(25):
        x = rng.uniform(-0.5, 1.2, 2)
        t_b = rng.uniform(0.0, 70.0)
        for step in range(model.n_nodes):
            q = ggp_query(model, x, t_b)
            x, t_b = q.goal_pos, q.goal_time
            if np.array_equal(np.concatenate([x, [t_b]]), model.goal):
                break
        assert np.array_equal(np.concatenate([x, [t_b]]), model.goal)


# -- pose-only ambiguity vs pose-time disambiguation ---------------------------

def test_intersection_branch_selection(letter_demo, letter_model):
    from graphmp import letter_b_intersection

    center = letter_b_intersection()
    times = letter_model.node_times
    dists = np.linalg.norm(letter_model.node_positions - center, axis=1)
    # the two passages through the crossing, well separated in time
    first_pass = int(np.argmin(dists + (times > 3.0) * 1e3))
    second_pass = int(np.argmin(dists + (times < 3.0) * 1e3))
    assert abs(times[first_pass] - times[second_pass]) > 2.0

    def branch_of(index):
        return 0 if abs(times[index] - times[first_pass]) < \
            abs(times[index] - times[second_pass]) else 1

    rng = np.random.default_rng(5)
    pose_branches = set()
    for _ in range(200):
        x = center + rng.normal(0.0, 0.02, 2)
        q_pose = ggp_query(letter_model, x, 0.0, mode=KernelMode.POSE_ONLY)
        pose_branches.add(branch_of(q_pose.nearest_index))
        # time belief at each passage always resolves to that passage's branch
        q_first = ggp_query(letter_model, x, times[first_pass])
        q_second = ggp_query(letter_model, x, times[second_pass])
        assert branch_of(q_first.nearest_index) == 0
        assert branch_of(q_second.nearest_index) == 1
    assert pose_branches == {0, 1}  # pose-only picks nodes from either branch


# -- append -------------------------------------------------------------------

def test_append_identical_session(line_demo, line_model):
    n = line_demo.n
    merged = append_session(line_model, line_demo)
    assert merged.n_nodes == 2 * n - 1
    # single boundary edge: old goal chains to the (re-clocked) session start
    boundary_state = merged.states[n - 1]
    assert np.array_equal(boundary_state, line_model.goal)
    assert np.array_equal(merged.labels[n - 1, :-1], line_demo.points[0])
    # session clocks continue monotonically past the old goal time
    assert np.all(np.diff(merged.states[:, -1]) > 0)
    assert merged.goal[-1] > line_model.goal_time
    assert np.array_equal(merged.goal[:-1], line_demo.points[-1])


def test_append_corrected_session_wins_near_correction(line_model, line_demo):
    # corrected replay: same stroke shifted 0.02 m upward
    corrected = Demonstration(line_demo.points + np.array([0.0, 0.02]),
                              line_demo.times.copy())
    merged = append_session(line_model, corrected)
    probe = corrected.points[50] + np.array([0.0, 0.005])
    t_probe = float(merged.states[line_demo.n + 50, -1])
    q = ggp_query(merged, probe, t_probe)
    oracle_label, _, oracle_i = brute_force_query(merged, probe, t_probe)
    assert q.nearest_index == oracle_i
    assert oracle_i >= line_demo.n  # nearest-node correlation dominated by new rows
    assert np.array_equal(q.goal_pos, oracle_label[:-1])


def test_append_dimension_mismatch(line_model):
    bad = Demonstration(np.zeros((3, 3)), np.array([0.0, 1.0, 2.0]))
    with pytest.raises(ValueError):
        append_session(line_model, bad)


def test_append_empty_session_rejected(line_model):
    with pytest.raises(ValueError):
        Demonstration(np.zeros((0, 2)), np.zeros(0))


# -- scale behaviour ------------------------------------------------------------

def test_fit_large_demo_has_no_square_allocation():
    import tracemalloc

    n = 10_000
    points = np.column_stack([np.linspace(0.0, 1.0, n), np.zeros(n)])
    demo = Demonstration(points, np.linspace(0.0, 100.0, n))
    tracemalloc.start()
    model = fit_from_demonstration(demo)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert model.n_nodes == n - 1
    # an n x n float matrix would need 800 MB; the fit stays linear
    assert peak < 20e6


def test_fit_cost_linear_in_n():
    import time

    def per_point_cost(n):
        points = np.column_stack([np.linspace(0.0, 1.0, n), np.zeros(n)])
        demo = Demonstration(points, np.linspace(0.0, 100.0, n))
        fit_from_demonstration(demo)  # warm the allocator and page cache
        best = np.inf
        for _ in range(7):
            start = time.perf_counter()
            fit_from_demonstration(demo)
            best = min(best, time.perf_counter() - start)
        return best / n

    # a linear fit costs a handful of array copies, well under a microsecond
    # per point at any size; anything quadratic would blow through this budget
    # orders of magnitude before n = 200k
    assert per_point_cost(50_000) < 0.5e-6
    assert per_point_cost(200_000) < 0.5e-6
