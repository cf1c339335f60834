# profile.py
# Exit-angle density on the original circle, assembled from the coordinate maps and kernels

import math
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from hitdisk.modules.annulus.mapping import ellipse_to_annulus
from hitdisk.modules.elliptic.coordinates import ellipse_to_elliptic
from hitdisk.modules.geometry.linear import (
    TWO_PI, CartesianPoint, EllipseGeometry, ProblemSpec,
    boundary_angle_to_tau, boundary_jacobian, forward_linear, is_interior,
)
from hitdisk.modules.kernels.series import (
    KernelValue, SeriesControl, annulus_kernel, classical_poisson,
    elliptic_kernel, poisson_superposition_kernel,
)
from hitdisk.utils.errors import DomainError, ParameterError

logger = logging.getLogger("hitdisk.density")

ArrayLike = Union[float, np.ndarray]

MIN_GRID = 16
MIN_FUNCTIONAL_SAMPLES = 64
CHUNK_SIZE = 256


class Method(Enum):
    ANNULUS = "annulus"
    ELLIPTIC = "elliptic"
    SUPERPOSITION = "superposition"
    MONTECARLO = "montecarlo"

    @classmethod
    def parse(cls, value: Union[str, "Method"]) -> "Method":
        if isinstance(value, Method):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ParameterError(f"unknown method '{value}' (expected one of {choices})")


ANALYTIC_METHODS = (Method.ANNULUS, Method.ELLIPTIC, Method.SUPERPOSITION)


@dataclass
class ProfileMeta:
    """Provenance of a DensityProfile"""
    method: Method
    spec: ProblemSpec
    start: CartesianPoint
    control: Optional[SeriesControl] = None
    normalization_residual: float = 0.0
    n_terms: int = 0
    max_terms_reached: bool = False
    near_boundary: bool = False
    per_arc_length: bool = False
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        meta = {
            "method": self.method.value,
            "rho": self.spec.rho,
            "R": self.spec.R,
            "start": [self.start.x, self.start.y],
            "normalization_residual": self.normalization_residual,
            "n_terms": self.n_terms,
            "max_terms_reached": self.max_terms_reached,
            "near_boundary": self.near_boundary,
            "per_arc_length": self.per_arc_length,
        }
        if self.control is not None:
            meta["max_terms"] = self.control.max_terms
            meta["tail_tol"] = self.control.tail_tol
        meta.update(self.extra)
        return meta


@dataclass
class DensityProfile:
    """Exit-angle density sampled on a sorted grid of angles in [0, 2pi)"""
    alphas: np.ndarray
    values: np.ndarray
    meta: ProfileMeta

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.alphas.shape != self.values.shape:
            raise ParameterError("alphas and values must have the same length")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"alpha": self.alphas, "density": self.values})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alphas.tolist(),
            "density": self.values.tolist(),
            "meta": self.meta.to_dict(),
        }


@dataclass(frozen=True)
class _StartCoordinates:
    # the transformed start in the frame the chosen kernel works in
    geometry: EllipseGeometry
    first: float
    second: float


def _prepare_start(start: CartesianPoint, spec: ProblemSpec, method: Method) -> _StartCoordinates:
    if not is_interior(start, spec):
        raise DomainError(f"start ({start.x}, {start.y}) is not strictly inside the disk of radius {spec.R}")
    if method not in ANALYTIC_METHODS:
        raise ParameterError(f"method '{method.value}' has no analytic kernel")
    geometry = EllipseGeometry.from_spec(spec)
    point = forward_linear(start, spec)
    if geometry.is_circular:
        # the transformed frame is the original disk rotated; polar coordinates there
        return _StartCoordinates(geometry, math.hypot(point.w, point.z), math.atan2(point.z, point.w))
    if method is Method.ELLIPTIC:
        coord = ellipse_to_elliptic(point, geometry)
        return _StartCoordinates(geometry, coord.eta, coord.phi)
    coord = ellipse_to_annulus(point, geometry)
    return _StartCoordinates(geometry, coord.r, coord.theta)


def _evaluate(coords: _StartCoordinates, tau: ArrayLike, method: Method, ctl: SeriesControl) -> KernelValue:
    geometry = coords.geometry
    if geometry.is_circular:
        return classical_poisson(coords.first, coords.second, geometry.spec.R, tau)
    if method is Method.ELLIPTIC:
        return elliptic_kernel(coords.first, coords.second, tau, geometry, ctl)
    if method is Method.SUPERPOSITION:
        return poisson_superposition_kernel(coords.first, coords.second, tau, geometry, ctl)
    return annulus_kernel(coords.first, coords.second, tau, geometry, ctl)


def kernel_in_tau(start: CartesianPoint, tau: ArrayLike, spec: ProblemSpec,
                  method: Union[str, Method] = Method.ANNULUS,
                  ctl: Optional[SeriesControl] = None) -> KernelValue:
    """Kernel of the transformed problem, density per radian of the ellipse parameter tau"""
    method = Method.parse(method)
    ctl = ctl or SeriesControl()
    coords = _prepare_start(start, spec, method)
    return _evaluate(coords, tau, method, ctl)


def _density_with_meta(start: CartesianPoint, alpha: ArrayLike, spec: ProblemSpec,
                       method: Method, ctl: SeriesControl) -> KernelValue:
    tau = boundary_angle_to_tau(alpha, spec)
    kernel = kernel_in_tau(start, tau, spec, method, ctl)
    value = np.asarray(kernel.value) * np.asarray(boundary_jacobian(alpha, spec))
    return replace(kernel, value=float(value) if np.ndim(value) == 0 else value)


def hitting_density(start: CartesianPoint, alpha: ArrayLike, spec: ProblemSpec,
                    method: Union[str, Method] = Method.ANNULUS,
                    ctl: Optional[SeriesControl] = None) -> ArrayLike:
    """Density per radian of the exit angle alpha on the circle of radius R"""
    method = Method.parse(method)
    ctl = ctl or SeriesControl()
    return _density_with_meta(start, alpha, spec, method, ctl).clamped()


def uniform_grid(n_grid: int) -> np.ndarray:
    return TWO_PI * np.arange(n_grid) / n_grid


def periodic_trapezoid(values: np.ndarray) -> float:
    """Trapezoid rule over [0, 2pi) for samples on uniform_grid"""
    return float(TWO_PI * np.mean(values))


def check_n_jobs(n_jobs: int) -> None:
    # joblib semantics: -1 means every core, 0 is meaningless
    if isinstance(n_jobs, bool) or not isinstance(n_jobs, (int, np.integer)) or n_jobs == 0:
        raise ParameterError(f"n_jobs must be a non-zero integer (got {n_jobs!r})")


def density_profile(start: CartesianPoint, spec: ProblemSpec,
                    method: Union[str, Method] = Method.ANNULUS,
                    ctl: Optional[SeriesControl] = None,
                    n_grid: int = 1024, n_jobs: int = 1) -> DensityProfile:
    method = Method.parse(method)
    ctl = ctl or SeriesControl()
    if int(n_grid) != n_grid or n_grid < MIN_GRID:
        raise ParameterError(f"n_grid must be an integer >= {MIN_GRID} (got {n_grid})")
    check_n_jobs(n_jobs)
    alphas = uniform_grid(int(n_grid))

    # chunk boundaries depend only on the grid, so any n_jobs gives identical output
    chunks = [alphas[i:i + CHUNK_SIZE] for i in range(0, alphas.size, CHUNK_SIZE)]
    if n_jobs == 1 or len(chunks) == 1:
        parts = [_density_with_meta(start, chunk, spec, method, ctl) for chunk in chunks]
    else:
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_density_with_meta)(start, chunk, spec, method, ctl) for chunk in chunks
        )

    values = np.maximum(np.concatenate([np.atleast_1d(p.value) for p in parts]), 0.0)
    residual = periodic_trapezoid(values) - 1.0
    meta = ProfileMeta(
        method=method,
        spec=spec,
        start=start,
        control=ctl,
        normalization_residual=residual,
        n_terms=max(p.n_terms for p in parts),
        max_terms_reached=any(p.truncated for p in parts),
        near_boundary=any(p.near_boundary for p in parts),
    )
    logger.debug("profile %s rho=%g start=(%g, %g): residual %.3e",
                 method.value, spec.rho, start.x, start.y, residual)
    return DensityProfile(alphas, values, meta)


def arc_length_density(profile: DensityProfile) -> DensityProfile:
    """Density per unit arc length, p(alpha) / R"""
    if profile.meta.per_arc_length:
        return profile
    meta = replace(profile.meta, per_arc_length=True)
    return DensityProfile(profile.alphas.copy(), profile.values / profile.meta.spec.R, meta)


def boundary_functional(start: CartesianPoint, spec: ProblemSpec, h_samples: np.ndarray,
                        ctl: Optional[SeriesControl] = None,
                        method: Union[str, Method] = Method.ANNULUS,
                        frame: str = "alpha") -> float:
    """E h(exit point) for boundary data sampled on a uniform angle grid

    frame="alpha" samples h at exit angles of the original circle,
    frame="tau" at parameters of the transformed ellipse.
    """
    h = np.asarray(h_samples, dtype=float)
    if h.ndim != 1 or h.size < MIN_FUNCTIONAL_SAMPLES:
        raise ParameterError(f"need at least {MIN_FUNCTIONAL_SAMPLES} boundary samples")
    method = Method.parse(method)
    ctl = ctl or SeriesControl()
    grid = uniform_grid(h.size)
    if frame == "alpha":
        weights = _density_with_meta(start, grid, spec, method, ctl).value
    elif frame == "tau":
        weights = kernel_in_tau(start, grid, spec, method, ctl).value
    else:
        raise ParameterError(f"unknown frame '{frame}' (expected alpha or tau)")
    return periodic_trapezoid(h * weights)


def bin_masses(profile: DensityProfile, n_bins: int) -> np.ndarray:
    """Probability mass of each of n_bins equal bins starting at angle 0"""
    n = profile.values.size
    width = TWO_PI / n_bins
    if profile.meta.method is Method.MONTECARLO:
        if n != n_bins:
            raise ParameterError("histogram profiles can only be compared on their own bins")
        return profile.values * width
    if n % n_bins:
        raise ParameterError(f"grid of {n} points does not split into {n_bins} bins")
    per_bin = n // n_bins
    step = TWO_PI / n
    closed = np.append(profile.values, profile.values[0])
    masses = np.empty(n_bins)
    for b in range(n_bins):
        segment = closed[b * per_bin:(b + 1) * per_bin + 1]
        masses[b] = step * (segment.sum() - 0.5 * (segment[0] + segment[-1]))
    return masses


def total_variation(first: DensityProfile, second: DensityProfile, n_bins: int) -> float:
    """Half the L1 distance between the binned laws"""
    return 0.5 * float(np.sum(np.abs(bin_masses(first, n_bins) - bin_masses(second, n_bins))))
