# main.py
# Command-line entry: density, simulate, verify and transform subcommands

import sys
import math
import argparse
import logging
from dataclasses import replace
from typing import Any, Dict, List, Optional, Tuple

from hitdisk.core.config import Config
from hitdisk.core.logging_config import setup_logging
from hitdisk.modules.annulus.mapping import ellipse_to_annulus
from hitdisk.modules.density.profile import (
    ANALYTIC_METHODS, arc_length_density, check_n_jobs, density_profile, total_variation,
)
from hitdisk.modules.elliptic.coordinates import ellipse_to_elliptic
from hitdisk.modules.geometry.linear import (
    CartesianPoint, EllipseGeometry, ProblemSpec, forward_linear, is_interior,
)
from hitdisk.modules.kernels.series import SeriesControl
from hitdisk.modules.montecarlo.simulator import (
    BoundaryMode, SimConfig, empirical_profile, simulate_exits,
)
from hitdisk.modules.verification.suite import VerificationSettings, run_suite
from hitdisk.utils.errors import DomainError, HitDiskError, ParameterError
from hitdisk.utils.io import emit, to_json_text

logger = logging.getLogger("hitdisk.cli")

EXIT_OK = 0


def parse_point(text: str) -> Tuple[float, float]:
    """'x,y' -> (x, y); radians and plain decimals only"""
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got '{text}'")
    try:
        x, y = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two numbers 'x,y', got '{text}'")
    if not (math.isfinite(x) and math.isfinite(y)):
        raise argparse.ArgumentTypeError(f"coordinates must be finite, got '{text}'")
    return x, y


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rho", type=float, default=None, help="correlation coefficient, |rho| < 1")
    common.add_argument("--R", type=float, default=1.0, help="disk radius")
    common.add_argument("--start", type=parse_point, default=(0.0, 0.0), help="start point 'x,y'")
    common.add_argument("--method", choices=[m.value for m in ANALYTIC_METHODS], default=None)
    common.add_argument("--grid", type=int, default=None, help="number of exit angles")
    common.add_argument("--max-terms", type=int, default=None, help="series truncation order K")
    common.add_argument("--tol", type=float, default=None, help="series tail tolerance")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--output", default=None, help="output path (stdout when omitted)")
    common.add_argument("--per-arc-length", action="store_true", help="emit density per unit arc length")
    common.add_argument("--config", default=None, help="JSON configuration override")
    common.add_argument("--log-level", default=None)
    common.add_argument("--jobs", type=int, default=None, help="parallel chunks for density grids")

    parser = argparse.ArgumentParser(
        prog="hitdisk",
        description="Exit-point distribution of correlated planar Brownian motion on a disk",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("density", parents=[common], help="analytic exit-angle density")

    simulate = sub.add_parser("simulate", parents=[common], help="Monte Carlo exit-angle histogram")
    simulate.add_argument("--paths", type=int, default=None)
    simulate.add_argument("--dt", type=float, default=None, help="Euler step (default dt_per_R2 * R^2)")
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--bins", type=int, default=None)
    simulate.add_argument("--boundary-mode", choices=[m.value for m in BoundaryMode], default=None)
    simulate.add_argument("--compare", action="store_true", help="report TV distance to the analytic profile")

    verify = sub.add_parser("verify", parents=[common], help="cross-method verification suite")
    verify.add_argument("--mc-paths", type=int, default=None)
    verify.add_argument("--mc-dt", type=float, default=None)
    verify.add_argument("--skip-montecarlo", action="store_true")
    verify.add_argument("--corrupt-elliptic-kernel", action="store_true",
                        help="evaluate the displayed elliptic kernel in the equivalence check")
    verify.add_argument("--report", default=None, help="write the JSON report here")

    transform = sub.add_parser("transform", parents=[common], help="print the coordinate chain of a point")
    transform.add_argument("--point", type=parse_point, required=True)
    return parser


def _series_control(args: argparse.Namespace, config: Config) -> SeriesControl:
    ctl = config.series_control()
    if args.max_terms is not None:
        ctl = SeriesControl(max_terms=args.max_terms, tail_tol=ctl.tail_tol)
    if args.tol is not None:
        ctl = SeriesControl(max_terms=ctl.max_terms, tail_tol=args.tol)
    return ctl


def _problem_spec(args: argparse.Namespace) -> ProblemSpec:
    if args.rho is None:
        raise ParameterError(f"{args.command} needs --rho")
    return ProblemSpec(args.rho, args.R)


def _pick(flag: Any, config: Config, key: str) -> Any:
    return flag if flag is not None else config.get(key)


def cmd_density(args: argparse.Namespace, config: Config) -> int:
    spec = _problem_spec(args)
    start = CartesianPoint(*args.start)
    profile = density_profile(
        start, spec,
        method=_pick(args.method, config, "density.method"),
        ctl=_series_control(args, config),
        n_grid=_pick(args.grid, config, "density.n_grid"),
        n_jobs=_pick(args.jobs, config, "density.n_jobs"),
    )
    if abs(profile.meta.normalization_residual) > 5e-6:
        logger.warning("normalization residual %.3e exceeds 5e-6", profile.meta.normalization_residual)
    if args.per_arc_length:
        profile = arc_length_density(profile)
    fmt = _pick(args.format, config, "output.format")
    emit(profile.to_frame() if fmt == "csv" else profile.to_dict(), fmt, args.output, sys.stdout)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, config: Config) -> int:
    spec = _problem_spec(args)
    start = CartesianPoint(*args.start)
    sim = config.sim_config(spec.R)
    overrides: Dict[str, Any] = {}
    if args.paths is not None:
        overrides["n_paths"] = args.paths
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.boundary_mode is not None:
        overrides["boundary_mode"] = args.boundary_mode
    if overrides:
        sim = replace(sim, **overrides)

    n_bins = _pick(args.bins, config, "simulation.n_bins")
    batch = simulate_exits(start, spec, sim, thread_cap=config.thread_cap())
    profile = empirical_profile(batch, n_bins)

    if args.compare:
        analytic = density_profile(start, spec, _pick(args.method, config, "density.method"),
                                   _series_control(args, config), 16 * n_bins,
                                   _pick(args.jobs, config, "density.n_jobs"))
        tv = total_variation(profile, analytic, n_bins)
        logger.info("total variation to the %s profile: %.4f", analytic.meta.method.value, tv)
        profile.meta.extra["tv_to_analytic"] = tv
    if args.per_arc_length:
        profile = arc_length_density(profile)
    fmt = _pick(args.format, config, "output.format")
    emit(profile.to_frame() if fmt == "csv" else profile.to_dict(), fmt, args.output, sys.stdout)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: Config) -> int:
    # the suite scans its own rho grid; a given --rho is still validated
    if args.rho is not None:
        _problem_spec(args)
    settings = VerificationSettings(
        n_random_starts=config.get("verification.n_random_starts"),
        n_grid=_pick(args.grid, config, "verification.n_grid"),
        n_round_trip=config.get("verification.n_round_trip"),
        mc_paths=_pick(args.mc_paths, config, "verification.mc_paths"),
        mc_dt=_pick(args.mc_dt, config, "verification.mc_dt"),
        mc_bins=config.get("verification.mc_bins"),
        seed=config.get("verification.seed"),
        skip_montecarlo=args.skip_montecarlo,
        corrupt_elliptic_kernel=args.corrupt_elliptic_kernel,
        control=_series_control(args, config),
        n_jobs=_pick(args.jobs, config, "density.n_jobs"),
        thread_cap=config.thread_cap(),
    )
    SimConfig(n_paths=settings.mc_paths, dt=settings.mc_dt)
    check_n_jobs(settings.n_jobs)
    report = run_suite(settings)
    emit(report.to_dict(), "json", args.report, sys.stdout)
    report.raise_for_status()
    return EXIT_OK


def coordinate_chain(point: CartesianPoint, spec: ProblemSpec) -> Dict[str, Any]:
    """(x, y) -> (w, z) -> (r, theta) -> (eta, phi) for one point of the closed disk"""
    if point.norm > spec.R * (1.0 + 1e-12):
        raise DomainError(f"point ({point.x}, {point.y}) lies outside the disk of radius {spec.R}")
    geometry = EllipseGeometry.from_spec(spec)
    image = forward_linear(point, spec)
    annulus = ellipse_to_annulus(image, geometry)
    chain: Dict[str, Any] = {
        "rho": spec.rho,
        "R": spec.R,
        "geometry": {"a": geometry.a, "b": geometry.b, "c": geometry.c, "q": geometry.q,
                     "eta_hat": geometry.eta_hat},
        "xy": [point.x, point.y],
        "interior": is_interior(point, spec),
        "wz": [image.w, image.z],
        "r_theta": [annulus.r, annulus.theta],
    }
    if geometry.is_circular:
        chain["eta_phi"] = None
        chain["note"] = "rho = 0: elliptic coordinates are undefined, (r, theta) is polar"
        return chain
    elliptic = ellipse_to_elliptic(image, geometry)
    chain["eta_phi"] = [elliptic.eta, elliptic.phi]
    if image.z == 0.0 and abs(image.w) <= geometry.c:
        mirrored = (2.0 * math.pi - annulus.theta) % (2.0 * math.pi)
        chain["theta_alternatives"] = [annulus.theta, mirrored]
        chain["note"] = "point lies on the focal segment: theta and -theta give the same point"
    return chain


def cmd_transform(args: argparse.Namespace, config: Config) -> int:
    spec = _problem_spec(args)
    chain = coordinate_chain(CartesianPoint(*args.point), spec)
    sys.stdout.write(to_json_text(chain) + "\n")
    return EXIT_OK


COMMANDS = {
    "density": cmd_density,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "transform": cmd_transform,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = Config(args.config)
        setup_logging(_pick(args.log_level, config, "logging.level"), config.get("logging.file"))
        return COMMANDS[args.command](args, config)
    except HitDiskError as e:
        logger.error("%s", e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
