import numpy as np
import pytest

from graphmp import Demonstration, KernelParams, fit_from_demonstration, generate_letter_b


@pytest.fixture
def line_demo():
    """Straight 0.6 m stroke, 101 points over 2 s (0.3 m/s)."""
    n = 101
    points = np.column_stack([np.linspace(0.1, 0.7, n), np.full(n, 0.3)])
    return Demonstration(points, np.linspace(0.0, 2.0, n))


@pytest.fixture
def line_model(line_demo):
    return fit_from_demonstration(line_demo, KernelParams())


@pytest.fixture(scope="session")
def letter_demo():
    return generate_letter_b(200)


@pytest.fixture(scope="session")
def letter_model(letter_demo):
    return fit_from_demonstration(letter_demo, KernelParams())


def random_demo(seed, n=120, duration=4.0, scale=0.35, origin=0.3):
    """Random smooth planar demonstration, arc-length-uniform at constant speed."""
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(400, 2))
    window = np.hanning(80)
    window /= window.sum()
    vel = np.stack([np.convolve(raw[:, i], window, mode="same") for i in range(2)], axis=1)
    path = np.cumsum(vel, axis=0)
    path -= path.min(axis=0)
    path = path / path.max(axis=0).max() * scale + origin
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    uniform = np.linspace(0.0, arc[-1], n)
    points = np.column_stack([np.interp(uniform, arc, path[:, 0]),
                              np.interp(uniform, arc, path[:, 1])])
    return Demonstration(points, np.linspace(0.0, duration, n))
