# series.py
# Series representations of the hitting kernel on the annulus and in elliptic coordinates

import math
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from hitdisk.modules.annulus.mapping import RADIUS_TOL
from hitdisk.modules.geometry.linear import EllipseGeometry
from hitdisk.utils.errors import DomainError, ParameterError

logger = logging.getLogger("hitdisk.kernels")

MIN_TERMS = 8
NEAR_BOUNDARY = 0.999
INV_TWO_PI = 1.0 / (2.0 * math.pi)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation order K and tail tolerance for every series evaluation"""
    max_terms: int = 4096
    tail_tol: float = 1e-14

    def __post_init__(self):
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ParameterError(f"max_terms must be a positive integer (got {self.max_terms})")
        if not math.isfinite(self.tail_tol) or self.tail_tol < 0.0:
            raise ParameterError(f"tail_tol must be non-negative (got {self.tail_tol})")
        object.__setattr__(self, "max_terms", int(self.max_terms))
        object.__setattr__(self, "tail_tol", float(self.tail_tol))


@dataclass(frozen=True)
class KernelValue:
    """Kernel density per radian plus the truncation bookkeeping"""
    value: ArrayLike
    n_terms: int
    truncated: bool = False
    near_boundary: bool = False

    def clamped(self) -> ArrayLike:
        value = np.maximum(self.value, 0.0)
        return float(value) if np.ndim(value) == 0 else value


def _as_output(tau, values: np.ndarray) -> ArrayLike:
    return float(values[0]) if np.ndim(tau) == 0 else values.reshape(np.shape(tau))


def _geometric_term_count(ratio: float, prefactor: float, ctl: SeriesControl) -> Tuple[int, bool]:
    """Smallest k >= MIN_TERMS with prefactor * ratio^k < tol, capped at K"""
    if ratio <= 0.0:
        return min(MIN_TERMS, ctl.max_terms), False
    if ctl.tail_tol == 0.0 or ratio >= 1.0:
        return ctl.max_terms, True
    needed = math.log(ctl.tail_tol / prefactor) / math.log(ratio)
    n = max(MIN_TERMS, int(math.ceil(needed)) + 1)
    if n > ctl.max_terms:
        return ctl.max_terms, True
    return n, False


def _warn_truncation(name: str, n_terms: int, truncated: bool, near_boundary: bool) -> None:
    if truncated:
        logger.warning("%s series stopped at K=%d before reaching the tail tolerance", name, n_terms)
    if near_boundary:
        logger.warning("%s evaluated near the boundary; convergence is slow", name)


def _trig_sum(tau, theta: float, k: np.ndarray, cos_coef: np.ndarray, sin_coef: np.ndarray) -> np.ndarray:
    """1/2pi + 1/pi sum_k [cos_coef_k cos k theta cos k tau + sin_coef_k sin k theta sin k tau]"""
    tau_flat = np.atleast_1d(np.asarray(tau, dtype=float)).ravel()
    a_k = cos_coef * np.cos(k * theta)
    b_k = sin_coef * np.sin(k * theta)
    phase = np.outer(tau_flat, k)
    # reduction order must not depend on BLAS threading
    return INV_TWO_PI + ((np.cos(phase) * a_k).sum(axis=1) + (np.sin(phase) * b_k).sum(axis=1)) / math.pi


def annulus_term_count(r: float, geometry: EllipseGeometry, ctl: SeriesControl) -> Tuple[int, bool]:
    # term bound 2 r^k (1 + (q/r)^2k) / (1 + q^2k) <= 4 r^k / (1 - q^2)
    return _geometric_term_count(r, 4.0 / (1.0 - geometry.q ** 2), ctl)


def annulus_kernel(r: float, theta: float, tau: ArrayLike, geometry: EllipseGeometry,
                   ctl: Optional[SeriesControl] = None) -> KernelValue:
    """Hitting kernel on the annulus from the separated Fourier solution"""
    ctl = ctl or SeriesControl()
    q = geometry.q
    if r >= 1.0:
        raise DomainError("annulus kernel is distributional at r = 1")
    if r < q * (1.0 - RADIUS_TOL) or r < 0.0:
        raise DomainError(f"annulus radius {r} below inner radius {q}")
    r = max(r, q)

    n_terms, truncated = annulus_term_count(r, geometry, ctl)
    near_boundary = r >= NEAR_BOUNDARY
    if truncated or near_boundary:
        _warn_truncation("annulus", n_terms, truncated, near_boundary)

    k = np.arange(1, n_terms + 1, dtype=float)
    r_k = r ** k
    q_2k = q ** (2.0 * k)
    ratio_2k = (q / r) ** (2.0 * k) if q > 0.0 else np.zeros_like(k)
    cos_coef = r_k * (1.0 + ratio_2k) / (1.0 + q_2k)
    sin_coef = r_k * (1.0 - ratio_2k) / (1.0 - q_2k)
    values = _trig_sum(tau, theta, k, cos_coef, sin_coef)
    return KernelValue(_as_output(tau, values), n_terms, truncated, near_boundary)


def elliptic_term_count(eta: float, geometry: EllipseGeometry, ctl: SeriesControl) -> Tuple[int, bool]:
    # term bound 2 exp(-k (eta_hat - eta))
    return _geometric_term_count(math.exp(-(geometry.eta_hat - eta)), 2.0, ctl)


def _check_elliptic_domain(eta: float, geometry: EllipseGeometry) -> None:
    if geometry.is_circular:
        raise DomainError("elliptic kernel undefined for rho = 0")
    if eta < 0.0:
        raise DomainError(f"eta must be non-negative (got {eta})")
    if eta >= geometry.eta_hat:
        raise DomainError(f"eta {eta} not inside the ellipse (eta_hat = {geometry.eta_hat})")


def elliptic_kernel(eta: float, phi: float, tau: ArrayLike, geometry: EllipseGeometry,
                    ctl: Optional[SeriesControl] = None) -> KernelValue:
    """Hitting kernel in elliptic coordinates

    Ratios cosh k eta / cosh k eta_hat and sinh k eta / sinh k eta_hat are
    evaluated in exponential form so large k does not overflow.
    """
    ctl = ctl or SeriesControl()
    _check_elliptic_domain(eta, geometry)
    eta_hat = geometry.eta_hat

    n_terms, truncated = elliptic_term_count(eta, geometry, ctl)
    near_boundary = geometry.q * math.exp(eta) >= NEAR_BOUNDARY
    if truncated or near_boundary:
        _warn_truncation("elliptic", n_terms, truncated, near_boundary)

    k = np.arange(1, n_terms + 1, dtype=float)
    decay = np.exp(-k * (eta_hat - eta))
    cosh_ratio = decay * (1.0 + np.exp(-2.0 * k * eta)) / (1.0 + np.exp(-2.0 * k * eta_hat))
    sinh_ratio = decay * (-np.expm1(-2.0 * k * eta)) / (-np.expm1(-2.0 * k * eta_hat))
    values = _trig_sum(tau, phi, k, cosh_ratio, sinh_ratio)
    return KernelValue(_as_output(tau, values), n_terms, truncated, near_boundary)


def displayed_elliptic_kernel(eta: float, phi: float, tau: ArrayLike, geometry: EllipseGeometry,
                              ctl: Optional[SeriesControl] = None) -> KernelValue:
    """Elliptic kernel with sinh(eta)/sinh(eta_hat) on the cosine pair and no k in the arguments

    This variant does not solve the boundary problem. It is kept as the
    negative control of the kernel-equivalence check and uses the same
    number of terms as elliptic_kernel.
    """
    ctl = ctl or SeriesControl()
    _check_elliptic_domain(eta, geometry)
    n_terms, truncated = elliptic_term_count(eta, geometry, ctl)
    k = np.arange(1, n_terms + 1, dtype=float)
    cos_coef = np.full_like(k, math.sinh(eta) / math.sinh(geometry.eta_hat))
    sin_coef = np.full_like(k, math.cosh(eta) / math.cosh(geometry.eta_hat))
    values = _trig_sum(tau, phi, k, cos_coef, sin_coef)
    return KernelValue(_as_output(tau, values), n_terms, truncated)


def classical_poisson(r: float, theta: float, R_out: float, tau: ArrayLike) -> KernelValue:
    """Poisson kernel of the disk of radius R_out for a start at polar (r, theta)"""
    if R_out <= 0.0:
        raise DomainError("outer radius must be positive")
    if r < 0.0 or r >= R_out:
        raise DomainError(f"start radius {r} not inside the disk of radius {R_out}")
    tau_arr = np.asarray(tau, dtype=float)
    value = INV_TWO_PI * (R_out * R_out - r * r) / (R_out * R_out - 2.0 * r * R_out * np.cos(theta - tau_arr) + r * r)
    return KernelValue(float(value) if np.ndim(value) == 0 else value, 0)


@dataclass(frozen=True)
class PoissonSource:
    """Signed start point of one classical Poisson kernel in the superposition"""
    radius: float
    angle: float
    sign: float


def superposition_sources(r: float, theta: float, geometry: EllipseGeometry, j: int) -> List[PoissonSource]:
    """The four signed starts of the j-th bracket, all inside the circle of radius q"""
    q = geometry.q
    odd_power = q ** (2 * (2 * j + 1))
    even_power = q ** (4 * (j + 1))
    return [
        PoissonSource(odd_power / r, -theta, 1.0),
        PoissonSource(r * odd_power, -theta, -1.0),
        PoissonSource(even_power / r, theta, -1.0),
        PoissonSource(r * even_power, theta, 1.0),
    ]


def superposition_bracket(r: float, theta: float, tau: ArrayLike, geometry: EllipseGeometry, j: int) -> ArrayLike:
    total = 0.0
    for source in superposition_sources(r, theta, geometry, j):
        total = total + source.sign * classical_poisson(source.radius, source.angle, 1.0, tau).value
    return total


def superposition_term_count(r: float, geometry: EllipseGeometry, ctl: SeriesControl) -> Tuple[int, bool]:
    """Number of brackets j = 0 .. n-1 needed

    Every Poisson term deviates from 1/2pi by at most x / (pi (1 - x)) and
    the largest radius in bracket j is q^(4j + 2) / r <= q^(4j + 1).
    """
    q = geometry.q
    if q == 0.0:
        return 0, False
    for j in range(ctl.max_terms):
        x = q ** (4 * j + 2) / r
        if 4.0 * x / (math.pi * (1.0 - x)) < ctl.tail_tol:
            return j, False
    return ctl.max_terms, ctl.tail_tol > 0.0


def poisson_superposition_kernel(r: float, theta: float, tau: ArrayLike, geometry: EllipseGeometry,
                                 ctl: Optional[SeriesControl] = None) -> KernelValue:
    """Hitting kernel as a signed sum of classical Poisson kernels"""
    ctl = ctl or SeriesControl()
    q = geometry.q
    if r >= 1.0 or r < q * (1.0 - RADIUS_TOL):
        raise DomainError(f"superposition radius {r} outside [{q}, 1)")
    r = max(r, q)
    if q > 0.0 and r <= q * q:
        raise DomainError("superposition series requires r > q^2")

    n_brackets, truncated = superposition_term_count(r, geometry, ctl)
    near_boundary = r >= NEAR_BOUNDARY
    if truncated or near_boundary:
        _warn_truncation("superposition", n_brackets, truncated, near_boundary)

    tau_arr = np.asarray(tau, dtype=float)
    values = classical_poisson(r, theta, 1.0, tau_arr).value
    for j in range(n_brackets):
        values = values + superposition_bracket(r, theta, tau_arr, geometry, j)
    values = np.asarray(values, dtype=float)
    return KernelValue(float(values) if np.ndim(tau) == 0 else values, n_brackets, truncated, near_boundary)


def kernel_term_count(kind: str, coordinate: float, geometry: EllipseGeometry,
                      ctl: Optional[SeriesControl] = None) -> Tuple[int, bool]:
    """Terms the stopping rule selects; coordinate is r for annulus/superposition, eta for elliptic"""
    ctl = ctl or SeriesControl()
    if kind == "annulus":
        return annulus_term_count(coordinate, geometry, ctl)
    if kind == "elliptic":
        return elliptic_term_count(coordinate, geometry, ctl)
    if kind == "superposition":
        return superposition_term_count(coordinate, geometry, ctl)
    raise ParameterError(f"unknown kernel '{kind}'")


def fourier_coefficients(h_samples: np.ndarray, geometry: EllipseGeometry,
                         n_terms: Optional[int] = None) -> Tuple[float, np.ndarray, np.ndarray]:
    """Coefficients (A_0, A_k, B_k) of the separated solution for boundary data h

    h is sampled on the uniform grid tau_i = 2 pi i / n. Modes at or above
    the Nyquist index are dropped.
    """
    h = np.asarray(h_samples, dtype=float)
    n = h.size
    if n < 4:
        raise ParameterError("need at least 4 boundary samples")
    spectrum = np.fft.rfft(h)
    k_max = (n - 1) // 2 if n_terms is None else min(n_terms, (n - 1) // 2)
    k = np.arange(1, k_max + 1, dtype=float)
    cos_int = 2.0 * spectrum.real[1:k_max + 1] / n
    sin_int = -2.0 * spectrum.imag[1:k_max + 1] / n
    q_2k = geometry.q ** (2.0 * k)
    A_0 = 2.0 * spectrum.real[0] / n
    return A_0, cos_int / (1.0 + q_2k), sin_int / (1.0 - q_2k)


def dirichlet_solution(r: float, theta: float, h_samples: np.ndarray, geometry: EllipseGeometry,
                       ctl: Optional[SeriesControl] = None) -> float:
    """Harmonic extension of boundary data h to the annulus point (r, theta)"""
    ctl = ctl or SeriesControl()
    q = geometry.q
    if r > 1.0 or r < q * (1.0 - RADIUS_TOL):
        raise DomainError(f"annulus radius {r} outside [{q}, 1]")
    r = max(r, q)
    A_0, A_k, B_k = fourier_coefficients(h_samples, geometry, ctl.max_terms)
    k = np.arange(1, A_k.size + 1, dtype=float)
    r_k = r ** k
    shadow = (q * q / r) ** k if q > 0.0 else np.zeros_like(k)
    radial_cos = r_k + shadow
    radial_sin = r_k - shadow
    return float(0.5 * A_0 + np.sum(A_k * radial_cos * np.cos(k * theta) + B_k * radial_sin * np.sin(k * theta)))
