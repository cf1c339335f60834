# conftest.py
# Shared fixtures for the hitdisk test suite

import math

import numpy as np
import pytest

from hitdisk.modules.geometry.linear import EllipseGeometry, EllipsePoint, ProblemSpec
from hitdisk.modules.kernels.series import SeriesControl

TESTED_RHOS = (0.3, 0.5, 0.9)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ctl():
    return SeriesControl()


@pytest.fixture
def spec_half():
    return ProblemSpec(0.5)


@pytest.fixture
def geometry_half(spec_half):
    return EllipseGeometry.from_spec(spec_half)


@pytest.fixture(params=TESTED_RHOS, ids=lambda rho: f"rho={rho}")
def geometry(request):
    return EllipseGeometry.from_spec(ProblemSpec(request.param))


def random_ellipse_points(geometry, n, rng, scale=1.0):
    """Uniform points inside the scaled canonical ellipse"""
    s = scale * np.sqrt(rng.random(n))
    t = 2.0 * math.pi * rng.random(n)
    return [EllipsePoint(float(geometry.a * si * math.cos(ti)), float(geometry.b * si * math.sin(ti)))
            for si, ti in zip(s, t)]


@pytest.fixture
def ellipse_points(rng):
    def draw(geometry, n, scale=1.0):
        return random_ellipse_points(geometry, n, rng, scale)
    return draw
