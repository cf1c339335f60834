# coordinates.py
# Elliptic coordinates on the canonical ellipse and their link to the annulus

import math
import logging
from dataclasses import dataclass

from hitdisk.modules.annulus.mapping import (
    RADIUS_TOL, AnnulusCoord, check_inside, focal_components,
)
from hitdisk.modules.geometry.linear import EllipseGeometry, EllipsePoint, wrap_angle
from hitdisk.utils.errors import DomainError

logger = logging.getLogger("hitdisk.elliptic")


@dataclass(frozen=True)
class EllipticCoord:
    """Elliptic coordinates: eta = 0 is the focal segment, eta = eta_hat the boundary"""
    eta: float
    phi: float


def _require_foci(geometry: EllipseGeometry) -> None:
    if geometry.is_circular:
        raise DomainError("elliptic coordinates degenerate for rho = 0 (coincident foci)")


def elliptic_to_ellipse(c: EllipticCoord, geometry: EllipseGeometry) -> EllipsePoint:
    _require_foci(geometry)
    if c.eta < 0.0:
        raise DomainError(f"eta must be non-negative (got {c.eta})")
    return EllipsePoint(geometry.c * math.cosh(c.eta) * math.cos(c.phi),
                        geometry.c * math.sinh(c.eta) * math.sin(c.phi))


def ellipse_to_elliptic(p: EllipsePoint, geometry: EllipseGeometry) -> EllipticCoord:
    _require_foci(geometry)
    check_inside(p, geometry)
    sinh_sq, sin_sq = focal_components(p, geometry)
    eta = min(math.asinh(math.sqrt(sinh_sq)), geometry.eta_hat)
    sin_phi = math.sqrt(sin_sq) if p.z >= 0.0 else -math.sqrt(sin_sq)
    cos_phi = p.w / (geometry.c * math.cosh(eta))
    return EllipticCoord(eta, wrap_angle(math.atan2(sin_phi, cos_phi)))


def annulus_elliptic_bridge(c: AnnulusCoord, geometry: EllipseGeometry) -> EllipticCoord:
    """(r, theta) -> (log(r / q), theta)"""
    _require_foci(geometry)
    if c.r < geometry.q * (1.0 - RADIUS_TOL):
        raise DomainError(f"annulus radius {c.r} below inner radius {geometry.q}")
    return EllipticCoord(max(math.log(c.r / geometry.q), 0.0), wrap_angle(c.theta))


def elliptic_annulus_bridge(c: EllipticCoord, geometry: EllipseGeometry) -> AnnulusCoord:
    _require_foci(geometry)
    return AnnulusCoord(geometry.q * math.exp(c.eta), wrap_angle(c.phi))


def elliptic_metric_factor(eta: float, phi: float, geometry: EllipseGeometry) -> float:
    """(a^2 - b^2)(sin^2 phi + sinh^2 eta)"""
    return geometry.focal_sq * (math.sin(phi) ** 2 + math.sinh(eta) ** 2)
