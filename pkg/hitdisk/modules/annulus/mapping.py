# mapping.py
# Conformal map between the canonical ellipse and the circular annulus q <= r <= 1

import math
import logging
from dataclasses import dataclass
from typing import Tuple

from hitdisk.modules.geometry.linear import (
    EllipseGeometry, EllipsePoint, wrap_angle,
)
from hitdisk.utils.errors import DomainError

logger = logging.getLogger("hitdisk.annulus")

RADIUS_TOL = 1e-12


@dataclass(frozen=True)
class AnnulusCoord:
    """Polar coordinates (r, theta) on the annulus"""
    r: float
    theta: float


@dataclass(frozen=True)
class InversionIntermediate:
    """Auxiliary root m = A^2 r^2 + B^2 / r^2 of the inversion"""
    m: float
    excess: float   # m - 2AB, kept separately to avoid cancellation near the focal segment


@dataclass(frozen=True)
class _FocalSplit:
    # s - d and the root sqrt((s - d)^2 + 4 d z^2), shared by both inversions
    shifted: float
    root: float


def _focal_split(p: EllipsePoint, geometry: EllipseGeometry) -> _FocalSplit:
    d = geometry.focal_sq
    shifted = p.w * p.w + p.z * p.z - d
    root = math.sqrt(shifted * shifted + 4.0 * d * p.z * p.z)
    return _FocalSplit(shifted=shifted, root=root)


def focal_components(p: EllipsePoint, geometry: EllipseGeometry) -> Tuple[float, float]:
    """Return ((s - d + root) / 2d, (-(s - d) + root) / 2d) without subtractive cancellation

    The first is sinh^2 of the elliptic radius, the second sin^2 of the angle.
    Their product is z^2 / d.
    """
    d = geometry.focal_sq
    split = _focal_split(p, geometry)
    if split.shifted >= 0.0:
        plus = split.shifted + split.root
        radial = plus / (2.0 * d)
        angular = 2.0 * p.z * p.z / plus if plus > 0.0 else 0.0
    else:
        minus = split.root - split.shifted
        angular = minus / (2.0 * d)
        radial = 2.0 * p.z * p.z / minus
    return radial, min(max(angular, 0.0), 1.0)


def check_inside(p: EllipsePoint, geometry: EllipseGeometry) -> None:
    if not geometry.contains(p):
        raise DomainError(f"point ({p.w}, {p.z}) lies outside the ellipse")


def confocal_semiaxes(r: float, geometry: EllipseGeometry) -> Tuple[float, float]:
    """Semiaxes of the confocal ellipse image of the circle of radius r"""
    if r <= 0.0:
        raise DomainError("radius must be positive")
    return geometry.A_cap * r + geometry.B_cap / r, geometry.A_cap * r - geometry.B_cap / r


def hyperbola_residual(p: EllipsePoint, theta: float, geometry: EllipseGeometry) -> float:
    """w^2/cos^2 - z^2/sin^2 - (a^2 - b^2); zero along the image of a fixed-theta ray"""
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    if abs(cos_t) < 1e-12 or abs(sin_t) < 1e-12:
        raise DomainError("hyperbola undefined on the coordinate axes")
    return p.w ** 2 / cos_t ** 2 - p.z ** 2 / sin_t ** 2 - geometry.focal_sq


def annulus_metric_factor(r: float, theta: float, geometry: EllipseGeometry) -> float:
    """Ratio of the polar Laplacian in (r, theta) to the Cartesian Laplacian in (w, z)"""
    return (geometry.A_cap - geometry.B_cap / (r * r)) ** 2 + geometry.focal_sq * math.sin(theta) ** 2 / (r * r)


def annulus_to_ellipse(c: AnnulusCoord, geometry: EllipseGeometry) -> EllipsePoint:
    q = geometry.q
    if c.r < q * (1.0 - RADIUS_TOL) or c.r > 1.0 + RADIUS_TOL:
        raise DomainError(f"annulus radius {c.r} outside [{q}, 1]")
    if geometry.is_circular:
        # polar coordinates scaled by A = R
        return EllipsePoint(geometry.A_cap * c.r * math.cos(c.theta),
                            geometry.A_cap * c.r * math.sin(c.theta))
    major, minor = confocal_semiaxes(c.r, geometry)
    return EllipsePoint(major * math.cos(c.theta), minor * math.sin(c.theta))


def inversion_intermediate(p: EllipsePoint, geometry: EllipseGeometry) -> InversionIntermediate:
    """Non-negative root m of m^2 - (w^2 + z^2) m + 2AB (w^2 - z^2 - 2AB) = 0"""
    d = geometry.focal_sq
    radial, _ = focal_components(p, geometry)
    excess = d * radial
    return InversionIntermediate(m=0.5 * d + excess, excess=excess)


def ellipse_to_annulus(p: EllipsePoint, geometry: EllipseGeometry) -> AnnulusCoord:
    check_inside(p, geometry)
    if geometry.is_circular:
        r = min(math.hypot(p.w, p.z) / geometry.A_cap, 1.0)
        return AnnulusCoord(r, wrap_angle(math.atan2(p.z, p.w)))

    A, B = geometry.A_cap, geometry.B_cap
    inter = inversion_intermediate(p, geometry)
    # m^2 - 4 A^2 B^2 factored as (m - 2AB)(m + 2AB)
    disc = inter.excess * (inter.m + 2.0 * A * B)
    if disc < 0.0:
        disc = 0.0
    r = math.sqrt((inter.m + math.sqrt(disc)) / (2.0 * A * A))
    r = min(max(r, geometry.q), 1.0)

    _, sin_sq = focal_components(p, geometry)
    # sin(theta) shares the sign of z for r > q; z = +0 on the focal segment gives theta in [0, pi]
    sin_t = math.sqrt(sin_sq) if p.z >= 0.0 else -math.sqrt(sin_sq)
    cos_t = p.w / (A * r + B / r)
    return AnnulusCoord(r, wrap_angle(math.atan2(sin_t, cos_t)))


def radius_expanded(p: EllipsePoint, geometry: EllipseGeometry) -> float:
    """Annulus radius from the two-square-root closed form"""
    check_inside(p, geometry)
    d = geometry.focal_sq
    s = p.w * p.w + p.z * p.z
    root = math.sqrt(max(s * s - 2.0 * d * (p.w * p.w - p.z * p.z) + d * d, 0.0))
    first = math.sqrt(max(s - d + root, 0.0))
    second = math.sqrt(s + d + root)
    return (first + second) / (math.sqrt(2.0) * (geometry.a + geometry.b))


def negative_root_radius_sq(p: EllipsePoint, geometry: EllipseGeometry) -> float:
    """r^2 from the rejected (minus sign) root of A^2 r^4 - m r^2 + B^2 = 0"""
    A, B = geometry.A_cap, geometry.B_cap
    inter = inversion_intermediate(p, geometry)
    disc = max(inter.excess * (inter.m + 2.0 * A * B), 0.0)
    return (inter.m - math.sqrt(disc)) / (2.0 * A * A)
