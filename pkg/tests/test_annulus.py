# test_annulus.py
# Ellipse <-> annulus map and its inversion

import math

import numpy as np
import pytest

from hitdisk.modules.annulus.mapping import (
    AnnulusCoord, annulus_metric_factor, annulus_to_ellipse, confocal_semiaxes,
    ellipse_to_annulus, focal_components, hyperbola_residual, inversion_intermediate,
    negative_root_radius_sq, radius_expanded,
)
from hitdisk.modules.geometry.linear import EllipseGeometry, EllipsePoint, ProblemSpec
from hitdisk.utils.errors import DomainError


def test_outer_circle_maps_to_boundary(geometry):
    for theta in np.linspace(0.0, 2 * math.pi, 37):
        p = annulus_to_ellipse(AnnulusCoord(1.0, float(theta)), geometry)
        assert (p.w / geometry.a) ** 2 + (p.z / geometry.b) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_inner_circle_maps_to_focal_segment(geometry):
    for theta in np.linspace(0.0, 2 * math.pi, 37):
        p = annulus_to_ellipse(AnnulusCoord(geometry.q, float(theta)), geometry)
        assert p.z == pytest.approx(0.0, abs=1e-12)
        assert abs(p.w) <= geometry.c * (1 + 1e-12)


def test_known_point_round_trip(geometry_half):
    q = geometry_half.q
    c = AnnulusCoord((1.0 + q) / 2.0, math.pi / 3)
    back = ellipse_to_annulus(annulus_to_ellipse(c, geometry_half), geometry_half)
    assert back.r == pytest.approx(c.r, abs=1e-12)
    assert back.theta == pytest.approx(c.theta, abs=1e-12)


def test_random_round_trip(geometry, ellipse_points):
    worst = 0.0
    for p in ellipse_points(geometry, 10_000):
        back = annulus_to_ellipse(ellipse_to_annulus(p, geometry), geometry)
        worst = max(worst, math.hypot(back.w - p.w, back.z - p.z))
    assert worst < 1e-10


def test_expanded_radius_matches_compact(geometry, ellipse_points):
    for p in ellipse_points(geometry, 500):
        assert radius_expanded(p, geometry) == pytest.approx(ellipse_to_annulus(p, geometry).r, abs=1e-10)


def test_intermediate_solves_its_quadratic(geometry, ellipse_points):
    A, B = geometry.A_cap, geometry.B_cap
    for p in ellipse_points(geometry, 200):
        m = inversion_intermediate(p, geometry).m
        s = p.w ** 2 + p.z ** 2
        residual = m * m - s * m + 2 * A * B * (p.w ** 2 - p.z ** 2 - 2 * A * B)
        assert abs(residual) <= 1e-10 * max(1.0, m * m)


def test_rejected_root_falls_inside_inner_circle(geometry):
    points = [EllipsePoint(0.5 * (geometry.c + geometry.a), 0.0),
              EllipsePoint(0.0, 0.5 * geometry.b),
              EllipsePoint(0.0, -0.9 * geometry.b)]
    for p in points:
        assert negative_root_radius_sq(p, geometry) < geometry.q ** 2
        assert ellipse_to_annulus(p, geometry).r > geometry.q


def test_focal_components_product(geometry, ellipse_points):
    for p in ellipse_points(geometry, 200):
        radial, angular = focal_components(p, geometry)
        assert radial * angular == pytest.approx(p.z ** 2 / geometry.focal_sq, rel=1e-9, abs=1e-15)
        assert 0.0 <= angular <= 1.0


def test_confocal_family(geometry):
    for r in (geometry.q * 1.01, 0.5 * (1 + geometry.q), 1.0):
        major, minor = confocal_semiaxes(r, geometry)
        assert major ** 2 - minor ** 2 == pytest.approx(geometry.focal_sq, rel=1e-12)
    major, minor = confocal_semiaxes(1.0, geometry)
    assert (major, minor) == (pytest.approx(geometry.a), pytest.approx(geometry.b))


def test_fixed_theta_rays_are_hyperbolas(geometry):
    theta = 0.7
    for r in np.linspace(geometry.q, 1.0, 7):
        p = annulus_to_ellipse(AnnulusCoord(float(r), theta), geometry)
        assert hyperbola_residual(p, theta, geometry) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(DomainError):
        hyperbola_residual(EllipsePoint(1.0, 0.0), 0.0, geometry)


def test_metric_factor_is_squared_derivative(geometry):
    A, B = geometry.A_cap, geometry.B_cap
    for r, theta in ((geometry.q, 0.3), (0.8, 2.0), (1.0, 4.0)):
        derivative = A - B * np.exp(-2j * theta) / r ** 2
        assert annulus_metric_factor(r, theta, geometry) == pytest.approx(abs(derivative) ** 2, rel=1e-12)


def test_origin_maps_to_inner_circle(geometry):
    c = ellipse_to_annulus(EllipsePoint(0.0, 0.0), geometry)
    assert c.r == pytest.approx(geometry.q, rel=1e-12)
    assert c.theta == pytest.approx(math.pi / 2)


def test_circular_case_is_polar():
    g = EllipseGeometry.from_spec(ProblemSpec(0.0, 2.0))
    c = ellipse_to_annulus(EllipsePoint(1.0, 1.0), g)
    assert c.r == pytest.approx(math.sqrt(2) / 2)
    assert c.theta == pytest.approx(math.pi / 4)
    p = annulus_to_ellipse(c, g)
    assert (p.w, p.z) == (pytest.approx(1.0), pytest.approx(1.0))


def test_domain_errors(geometry):
    with pytest.raises(DomainError):
        ellipse_to_annulus(EllipsePoint(1.01 * geometry.a, 0.0), geometry)
    with pytest.raises(DomainError):
        annulus_to_ellipse(AnnulusCoord(1.1, 0.0), geometry)
    with pytest.raises(DomainError):
        annulus_to_ellipse(AnnulusCoord(0.5 * geometry.q, 0.0), geometry)
