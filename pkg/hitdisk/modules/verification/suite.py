# suite.py
# Cross-method verification harness behind the `verify` command

import json
import math
import logging
from dataclasses import dataclass, field
from datetime import datetime
from itertools import combinations
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from hitdisk.modules.annulus.mapping import (
    AnnulusCoord, annulus_to_ellipse, ellipse_to_annulus, negative_root_radius_sq, radius_expanded,
)
from hitdisk.modules.density.profile import (
    ANALYTIC_METHODS, Method, boundary_functional, density_profile, total_variation, uniform_grid,
)
from hitdisk.modules.elliptic.coordinates import (
    EllipticCoord, elliptic_to_ellipse, ellipse_to_elliptic,
)
from hitdisk.modules.geometry.linear import (
    TWO_PI, CartesianPoint, EllipseGeometry, EllipsePoint, ProblemSpec,
    boundary_angle_to_tau, boundary_jacobian, forward_coords, forward_linear, inverse_coords,
)
from hitdisk.modules.kernels.series import (
    SeriesControl, annulus_kernel, classical_poisson, dirichlet_solution,
    displayed_elliptic_kernel, elliptic_kernel, poisson_superposition_kernel,
)
from hitdisk.modules.montecarlo.simulator import SimConfig, empirical_profile, simulate_exits
from hitdisk.utils.errors import VerificationFailure

logger = logging.getLogger("hitdisk.verification")


@dataclass
class VerificationSettings:
    """Scale and fault-injection switches of a verification run"""
    rho_values: Tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 0.95)
    equivalence_rhos: Tuple[float, ...] = (0.3, 0.6, 0.9)
    n_random_starts: int = 20
    max_start_radius: float = 0.9
    n_grid: int = 1024
    n_round_trip: int = 10_000
    n_harmonic_points: int = 100
    mc_paths: int = 200_000
    mc_dt: float = 1e-4
    mc_bins: int = 72
    mc_starts: Tuple[Tuple[float, float], ...] = ((0.0, 0.0), (0.4, -0.2))
    mc_rho: float = 0.5
    skip_montecarlo: bool = False
    corrupt_elliptic_kernel: bool = False
    seed: int = 20240917
    control: SeriesControl = field(default_factory=SeriesControl)
    n_jobs: int = 1
    thread_cap: Optional[int] = None


@dataclass
class CheckResult:
    """Outcome of one numerical check"""
    name: str
    category: str
    passed: bool
    value: float
    threshold: float
    message: str = ""

    @property
    def status(self) -> str:
        return "passed" if self.passed else "failed"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "category": self.category,
            "status": self.status,
            "value": self.value,
            "threshold": self.threshold,
            "message": self.message,
        }


@dataclass
class VerificationReport:
    timestamp: str
    checks: List[CheckResult]

    @property
    def status(self) -> str:
        return "passed" if all(c.passed for c in self.checks) else "failed"

    def failed_checks(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "timestamp": self.timestamp,
            "status": self.status,
            "checks": {c.name: c.to_dict() for c in self.checks},
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def raise_for_status(self) -> None:
        failed = self.failed_checks()
        if failed:
            raise VerificationFailure(failed)


def _at_most(name: str, category: str, value: float, threshold: float, what: str) -> CheckResult:
    value = float(value)
    passed = bool(value <= threshold)
    return CheckResult(name, category, passed, value, threshold,
                       f"{what} {value:.3e} (limit {threshold:.1e})")


def _relative_gap(first: np.ndarray, second: np.ndarray) -> float:
    return float(np.max(np.abs(first - second) / np.maximum(1.0, np.abs(second))))


def _angle_gap(first: float, second: float) -> float:
    return abs((first - second + math.pi) % TWO_PI - math.pi)


def _fourth_order_laplacian(f: Callable[[float, float], Any], w: float, z: float, h: float) -> Any:
    """Five-point-per-axis Laplacian, error O(h^4)"""
    centre = np.asarray(f(w, z))
    total = -60.0 * centre
    for dw, dz in ((h, 0.0), (0.0, h)):
        total = total + 16.0 * (np.asarray(f(w + dw, z + dz)) + np.asarray(f(w - dw, z - dz)))
        total = total - (np.asarray(f(w + 2 * dw, z + 2 * dz)) + np.asarray(f(w - 2 * dw, z - 2 * dz)))
    return total / (12.0 * h * h)


class VerificationSuite:
    """Runs every check category and collects CheckResults"""

    def __init__(self, settings: Optional[VerificationSettings] = None):
        self.settings = settings or VerificationSettings()
        self.results: List[CheckResult] = []

    def run(self) -> VerificationReport:
        categories: List[Tuple[str, Callable[[], List[CheckResult]]]] = [
            ("normalization", self.check_normalization),
            ("kernel equivalence", self.check_kernel_equivalence),
            ("superposition", self.check_superposition),
            ("circular reduction", self.check_circular_reduction),
            ("round trips", self.check_round_trips),
            ("harmonicity", self.check_harmonicity),
            ("parity", self.check_parity),
            ("negative control", self.check_negative_control),
            ("jacobian", self.check_jacobian),
        ]
        if self.settings.skip_montecarlo:
            logger.info("Monte Carlo checks skipped")
        else:
            categories.append(("monte carlo", self.check_montecarlo))

        self.results = []
        for category, check in categories:
            logger.info("running %s checks", category)
            try:
                results = check()
            except Exception as e:
                logger.exception("error in %s checks", category)
                results = [CheckResult(category, category, False, math.nan, math.nan, str(e))]
            for result in results:
                log = logger.info if result.passed else logger.error
                log("%s: %s (%s)", result.name, result.status.upper(), result.message)
            self.results.extend(results)

        report = VerificationReport(datetime.now().isoformat(), list(self.results))
        logger.info("verification %s: %d checks, %d failed",
                    report.status, len(report.checks), len(report.failed_checks()))
        return report

    # --- helpers ---

    def _rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.settings.seed, salt])

    def _random_starts(self, spec: ProblemSpec, rng: np.random.Generator) -> List[CartesianPoint]:
        n = self.settings.n_random_starts
        radius = self.settings.max_start_radius * spec.R * np.sqrt(rng.random(n))
        angle = TWO_PI * rng.random(n)
        return [CartesianPoint(float(r * math.cos(t)), float(r * math.sin(t))) for r, t in zip(radius, angle)]

    @staticmethod
    def _random_ellipse_points(geometry: EllipseGeometry, n: int, rng: np.random.Generator,
                               scale: float = 1.0) -> List[EllipsePoint]:
        s = scale * np.sqrt(rng.random(n))
        t = TWO_PI * rng.random(n)
        return [EllipsePoint(float(geometry.a * si * math.cos(ti)), float(geometry.b * si * math.sin(ti)))
                for si, ti in zip(s, t)]

    # --- categories ---

    def check_normalization(self) -> List[CheckResult]:
        cfg = self.settings
        rng = self._rng(1)
        worst_residual = 0.0
        worst_gap = 0.0
        for rho in cfg.rho_values:
            spec = ProblemSpec(rho)
            for start in self._random_starts(spec, rng):
                profiles = [density_profile(start, spec, method, cfg.control, cfg.n_grid, cfg.n_jobs)
                            for method in ANALYTIC_METHODS]
                worst_residual = max(worst_residual, *(abs(p.meta.normalization_residual) for p in profiles))
                for first, second in combinations(profiles, 2):
                    worst_gap = max(worst_gap, float(np.max(np.abs(first.values - second.values))))
        return [
            _at_most("profile normalization", "normalization", worst_residual, 5e-6,
                     "largest |integral - 1|"),
            _at_most("method agreement", "normalization", worst_gap, 1e-7,
                     "largest pairwise density gap"),
        ]

    def check_kernel_equivalence(self) -> List[CheckResult]:
        cfg = self.settings
        kernel = displayed_elliptic_kernel if cfg.corrupt_elliptic_kernel else elliptic_kernel
        if cfg.corrupt_elliptic_kernel:
            logger.warning("kernel equivalence uses the displayed elliptic kernel (fault injected)")
        taus = uniform_grid(20)
        worst = 0.0
        for rho in cfg.equivalence_rhos:
            geometry = EllipseGeometry.from_spec(ProblemSpec(rho))
            for eta in np.linspace(0.0, 0.95 * geometry.eta_hat, 20):
                r = geometry.q * math.exp(eta)
                for phi in uniform_grid(20):
                    elliptic = kernel(float(eta), float(phi), taus, geometry, cfg.control).value
                    annulus = annulus_kernel(r, float(phi), taus, geometry, cfg.control).value
                    worst = max(worst, _relative_gap(elliptic, annulus))
        return [_at_most("elliptic vs annulus kernel", "kernel equivalence", worst, 1e-10,
                         "largest scaled gap")]

    def check_superposition(self) -> List[CheckResult]:
        cfg = self.settings
        geometry = EllipseGeometry.from_spec(ProblemSpec(0.5))
        taus = uniform_grid(10)
        worst = 0.0
        for r in np.linspace(geometry.q, 0.95, 10):
            for theta in uniform_grid(10):
                image = poisson_superposition_kernel(float(r), float(theta), taus, geometry, cfg.control).value
                fourier = annulus_kernel(float(r), float(theta), taus, geometry, cfg.control).value
                worst = max(worst, _relative_gap(image, fourier))
        return [_at_most("superposition vs annulus kernel", "superposition", worst, 1e-8,
                         "largest scaled gap")]

    def check_circular_reduction(self) -> List[CheckResult]:
        cfg = self.settings
        spec = ProblemSpec(0.0)
        geometry = EllipseGeometry.from_spec(spec)
        alphas = uniform_grid(cfg.n_grid)
        taus = boundary_angle_to_tau(alphas, spec)
        worst_kernel = 0.0
        worst_profile = 0.0
        for x, y in ((0.0, 0.0), (0.5, 0.0), (0.3, 0.4)):
            start = CartesianPoint(x, y)
            reference = classical_poisson(start.norm, math.atan2(y, x), spec.R, alphas).value
            image = forward_linear(start, spec)
            series = annulus_kernel(math.hypot(image.w, image.z) / spec.R, math.atan2(image.z, image.w),
                                    taus, geometry, cfg.control).value
            worst_kernel = max(worst_kernel, float(np.max(np.abs(series - reference))))
            profile = density_profile(start, spec, Method.ANNULUS, cfg.control, cfg.n_grid)
            worst_profile = max(worst_profile, float(np.max(np.abs(profile.values - reference))))

        start = CartesianPoint(0.3, 0.4)
        base = density_profile(start, spec, Method.ANNULUS, cfg.control, cfg.n_grid).values
        drift = max(
            float(np.max(np.abs(density_profile(start, ProblemSpec(rho), method, cfg.control, cfg.n_grid).values - base)))
            for rho in (1e-6, -1e-6) for method in ANALYTIC_METHODS
        )
        return [
            _at_most("annulus series at q = 0", "circular reduction", worst_kernel, 1e-10,
                     "sup gap to the Poisson kernel"),
            _at_most("profile at rho = 0", "circular reduction", worst_profile, 1e-10,
                     "sup gap to the Poisson kernel"),
            _at_most("continuity in rho", "circular reduction", drift, 1e-4,
                     "sup gap between rho = +-1e-6 and rho = 0"),
        ]

    def check_round_trips(self) -> List[CheckResult]:
        cfg = self.settings
        rng = self._rng(2)
        worst_annulus = 0.0
        worst_elliptic = 0.0
        worst_expanded = 0.0
        worst_bridge = 0.0
        worst_linear = 0.0
        root_violations = 0
        for rho in cfg.equivalence_rhos:
            spec = ProblemSpec(rho)
            geometry = EllipseGeometry.from_spec(spec)
            for p in self._random_ellipse_points(geometry, cfg.n_round_trip, rng):
                ann = ellipse_to_annulus(p, geometry)
                back = annulus_to_ellipse(ann, geometry)
                worst_annulus = max(worst_annulus, math.hypot(back.w - p.w, back.z - p.z) / geometry.a)
                ell = ellipse_to_elliptic(p, geometry)
                back = elliptic_to_ellipse(ell, geometry)
                worst_elliptic = max(worst_elliptic, math.hypot(back.w - p.w, back.z - p.z) / geometry.a)
                worst_expanded = max(worst_expanded, abs(radius_expanded(p, geometry) - ann.r))
                bridged = max(abs(math.log(ann.r / geometry.q) - ell.eta), _angle_gap(ann.theta, ell.phi))
                # the angle is conventional on the focal segment
                if ell.eta > 1e-6:
                    worst_bridge = max(worst_bridge, bridged)
            x, y = inverse_coords(np.array([0.3, -0.1]), np.array([-0.7, 0.2]), spec)
            w, z = forward_coords(x, y, spec)
            worst_linear = max(worst_linear, float(np.max(np.abs(np.array([0.3, -0.1]) - w))),
                               float(np.max(np.abs(np.array([-0.7, 0.2]) - z))))
            # off the focal segment the rejected root gives r < q
            axis_points = [EllipsePoint(0.5 * (geometry.c + geometry.a), 0.0),
                           EllipsePoint(-0.5 * (geometry.c + geometry.a), 0.0),
                           EllipsePoint(0.0, 0.5 * geometry.b), EllipsePoint(0.0, -0.5 * geometry.b)]
            for p in axis_points:
                if not negative_root_radius_sq(p, geometry) < geometry.q ** 2:
                    root_violations += 1
        return [
            _at_most("ellipse-annulus round trip", "round trips", worst_annulus, 1e-10, "largest scaled error"),
            _at_most("ellipse-elliptic round trip", "round trips", worst_elliptic, 1e-10, "largest scaled error"),
            _at_most("expanded radius formula", "round trips", worst_expanded, 1e-10, "largest radius gap"),
            _at_most("annulus-elliptic bridge", "round trips", worst_bridge, 1e-10, "largest coordinate gap"),
            _at_most("linear map round trip", "round trips", worst_linear, 1e-12, "largest error"),
            _at_most("positive root selection", "round trips", root_violations, 0, "axis points admitting the other root"),
        ]

    def check_harmonicity(self) -> List[CheckResult]:
        cfg = self.settings
        rng = self._rng(3)
        step = 1e-3
        taus = uniform_grid(256)
        data = np.exp(np.cos(taus)) * (1.0 + 0.3 * np.sin(2.0 * taus))
        poles = np.array([0.4, 2.2, 4.5])
        worst = 0.0
        worst_kernel = 0.0
        for rho in cfg.equivalence_rhos:
            geometry = EllipseGeometry.from_spec(ProblemSpec(rho))

            def u(w: float, z: float) -> float:
                c = ellipse_to_annulus(EllipsePoint(w, z), geometry)
                return dirichlet_solution(c.r, c.theta, data, geometry, cfg.control)

            def kernel(w: float, z: float) -> np.ndarray:
                c = ellipse_to_annulus(EllipsePoint(w, z), geometry)
                return annulus_kernel(c.r, c.theta, poles, geometry, cfg.control).value

            for p in self._random_ellipse_points(geometry, cfg.n_harmonic_points, rng, scale=0.6):
                centre = u(p.w, p.z)
                lap = (u(p.w + step, p.z) + u(p.w - step, p.z) + u(p.w, p.z + step)
                       + u(p.w, p.z - step) - 4.0 * centre) / (step * step)
                worst = max(worst, abs(lap) / max(1.0, abs(centre)))

            for p in self._random_ellipse_points(geometry, cfg.n_harmonic_points, rng, scale=0.5):
                centre = kernel(p.w, p.z)
                lap = _fourth_order_laplacian(kernel, p.w, p.z, step)
                worst_kernel = max(worst_kernel, float(np.max(np.abs(lap) / np.maximum(1.0, np.abs(centre)))))
        return [
            _at_most("discrete Laplacian", "harmonicity", worst, 1e-4, "largest scaled 5-point Laplacian"),
            _at_most("kernel discrete Laplacian", "harmonicity", worst_kernel, 1e-4,
                     "largest scaled Laplacian of the kernel at fixed tau"),
        ]

    def check_parity(self) -> List[CheckResult]:
        cfg = self.settings
        geometry = EllipseGeometry.from_spec(ProblemSpec(0.5))
        q = geometry.q
        step = 1e-5
        taus = uniform_grid(16)
        thetas = np.linspace(0.1, math.pi - 0.1, 16)
        worst_even = 0.0
        worst_odd = 0.0

        def kernel(r: float, theta: float) -> np.ndarray:
            return annulus_kernel(r, theta, taus, geometry, cfg.control).value

        def radial_derivative(theta: float) -> np.ndarray:
            # one-sided second-order difference; the series is not defined below r = q
            return (-3.0 * kernel(q, theta) + 4.0 * kernel(q + step, theta) - kernel(q + 2.0 * step, theta)) / (2.0 * step)

        for theta in thetas:
            worst_even = max(worst_even, float(np.max(np.abs(kernel(q, theta) - kernel(q, -theta)))))
            worst_odd = max(worst_odd, float(np.max(np.abs(radial_derivative(theta) + radial_derivative(-theta)))))
        return [
            _at_most("even on the inner circle", "parity", worst_even, 1e-10, "largest |f(q, t) - f(q, -t)|"),
            _at_most("odd radial derivative", "parity", worst_odd, 1e-6, "largest |f_r(q, t) + f_r(q, -t)|"),
        ]

    def check_negative_control(self) -> List[CheckResult]:
        cfg = self.settings
        geometry = EllipseGeometry.from_spec(ProblemSpec(0.6))
        taus = uniform_grid(20)
        gap = 0.0
        for eta in np.linspace(0.1 * geometry.eta_hat, 0.9 * geometry.eta_hat, 5):
            for phi in uniform_grid(8):
                displayed = displayed_elliptic_kernel(float(eta), float(phi), taus, geometry, cfg.control).value
                annulus = annulus_kernel(geometry.q * math.exp(eta), float(phi), taus, geometry, cfg.control).value
                gap = max(gap, float(np.max(np.abs(displayed - annulus))))
        passed = gap > 1e-2
        return [CheckResult("displayed elliptic kernel rejected", "negative control", passed, gap, 1e-2,
                            f"largest gap {gap:.3e} (must exceed 1.0e-02)")]

    def check_jacobian(self) -> List[CheckResult]:
        cfg = self.settings
        alphas = uniform_grid(cfg.n_grid)
        step = 1e-6
        worst_fd = 0.0
        worst_integral = 0.0
        worst_on_ellipse = 0.0
        worst_functional = 0.0
        for rho in (0.0, 0.3, -0.5, 0.8):
            spec = ProblemSpec(rho)
            geometry = EllipseGeometry.from_spec(spec)
            jac = boundary_jacobian(alphas, spec)
            ahead = boundary_angle_to_tau(alphas + step, spec)
            behind = boundary_angle_to_tau(alphas - step, spec)
            fd = ((ahead - behind + math.pi) % TWO_PI - math.pi) / (2.0 * step)
            worst_fd = max(worst_fd, float(np.max(np.abs(fd - jac))))
            worst_integral = max(worst_integral, abs(TWO_PI * float(np.mean(jac)) - TWO_PI))

            w, z = forward_coords(spec.R * np.cos(alphas), spec.R * np.sin(alphas), spec)
            worst_on_ellipse = max(worst_on_ellipse, float(np.max(np.abs((w / geometry.a) ** 2 + (z / geometry.b) ** 2 - 1.0))))

            # E h(exit) with h given on the circle, evaluated in both frames
            start = CartesianPoint(0.2, -0.35)
            taus = uniform_grid(cfg.n_grid)
            x, y = inverse_coords(geometry.a * np.cos(taus), geometry.b * np.sin(taus), spec)
            alpha_of_tau = np.arctan2(y, x)
            in_alpha = boundary_functional(start, spec, np.cos(alphas) + np.sin(2.0 * alphas) ** 2, cfg.control)
            in_tau = boundary_functional(start, spec, np.cos(alpha_of_tau) + np.sin(2.0 * alpha_of_tau) ** 2,
                                         cfg.control, frame="tau")
            worst_functional = max(worst_functional, abs(in_alpha - in_tau))
        return [
            _at_most("jacobian vs finite difference", "jacobian", worst_fd, 1e-8, "largest gap"),
            _at_most("jacobian integrates to 2pi", "jacobian", worst_integral, 1e-10, "largest gap"),
            _at_most("circle maps onto the ellipse", "jacobian", worst_on_ellipse, 1e-12, "largest residual"),
            _at_most("boundary functional in both frames", "jacobian", worst_functional, 1e-9, "largest gap"),
        ]

    def check_montecarlo(self) -> List[CheckResult]:
        cfg = self.settings
        spec = ProblemSpec(cfg.mc_rho)
        sim = SimConfig(n_paths=cfg.mc_paths, dt=cfg.mc_dt, seed=cfg.seed)
        results = []
        for x, y in cfg.mc_starts:
            start = CartesianPoint(x, y)
            batch = simulate_exits(start, spec, sim, thread_cap=cfg.thread_cap)
            empirical = empirical_profile(batch, cfg.mc_bins)
            analytic = density_profile(start, spec, Method.ANNULUS, cfg.control, 16 * cfg.mc_bins, cfg.n_jobs)
            tv = total_variation(empirical, analytic, cfg.mc_bins)
            results.append(_at_most(f"monte carlo start ({x:g}, {y:g})", "monte carlo", tv, 0.02,
                                    f"total variation over {cfg.mc_bins} bins"))
        return results


def run_suite(settings: Optional[VerificationSettings] = None) -> VerificationReport:
    return VerificationSuite(settings).run()
