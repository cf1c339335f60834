# simulator.py
# Euler simulation of correlated planar Brownian paths until they leave the disk

import math
import time
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence, Union

import numpy as np
import numba
from numba import njit, prange

from hitdisk.modules.density.profile import DensityProfile, Method, ProfileMeta
from hitdisk.modules.geometry.linear import TWO_PI, CartesianPoint, ProblemSpec, is_interior
from hitdisk.utils.errors import DomainError, ParameterError

logger = logging.getLogger("hitdisk.montecarlo")

MIN_BINS = 8
MAX_TIME_PER_R2 = 50.0

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_STREAM = np.uint64(0xD1B54A32D192ED03)
_SHIFT_30 = np.uint64(30)
_SHIFT_27 = np.uint64(27)
_SHIFT_31 = np.uint64(31)
_SHIFT_11 = np.uint64(11)
_ONE = np.uint64(1)
_TO_UNIT = 1.0 / 9007199254740992.0  # 2^-53


class BoundaryMode(Enum):
    INTERPOLATE = "interpolate"
    REJECT_OVERSHOOT = "reject-overshoot"

    @classmethod
    def parse(cls, value: Union[str, "BoundaryMode"]) -> "BoundaryMode":
        if isinstance(value, BoundaryMode):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"unknown boundary mode '{value}' (expected interpolate or reject-overshoot)")


@dataclass(frozen=True)
class SimConfig:
    """Path count, Euler step, seed and exit handling of one simulation"""
    n_paths: int = 1_000_000
    dt: float = 1e-5
    seed: int = 0
    boundary_mode: BoundaryMode = BoundaryMode.INTERPOLATE
    max_time: Optional[float] = None   # None means 50 R^2

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ParameterError(f"n_paths must be a positive integer (got {self.n_paths})")
        if not math.isfinite(self.dt) or self.dt <= 0.0:
            raise ParameterError(f"dt must be positive (got {self.dt})")
        if int(self.seed) != self.seed:
            raise ParameterError(f"seed must be an integer (got {self.seed})")
        if self.max_time is not None and not self.max_time > 0.0:
            raise ParameterError(f"max_time must be positive (got {self.max_time})")
        object.__setattr__(self, "n_paths", int(self.n_paths))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "boundary_mode", BoundaryMode.parse(self.boundary_mode))

    def time_limit(self, spec: ProblemSpec) -> float:
        return self.max_time if self.max_time is not None else MAX_TIME_PER_R2 * spec.R * spec.R


@dataclass(frozen=True)
class ExitSample:
    """Exit angle in [0, 2pi) of the original frame and the exit time estimate"""
    alpha: float
    t_exit: float


@dataclass
class ExitBatch:
    """Exit samples of all paths that left the disk before max_time"""
    alphas: np.ndarray
    times: np.ndarray
    n_censored: int
    spec: ProblemSpec
    start: CartesianPoint
    config: SimConfig

    def __len__(self) -> int:
        return int(self.alphas.size)

    def __iter__(self) -> Iterator[ExitSample]:
        for alpha, t_exit in zip(self.alphas, self.times):
            yield ExitSample(float(alpha), float(t_exit))


# --- counter-based generator: one splitmix64 stream per (seed, index) ---

@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> _SHIFT_30)) * _MIX_1
    z = (z ^ (z >> _SHIFT_27)) * _MIX_2
    return z ^ (z >> _SHIFT_31)


@njit(inline="always")
def _stream_state(seed, index):
    return _mix(seed ^ ((np.uint64(index) + _ONE) * _STREAM))


@njit(inline="always")
def _next_uniform(state):
    state = state + _GOLDEN
    bits = _mix(state) >> _SHIFT_11
    # in (0, 1] so the logarithm below stays finite
    return state, (np.float64(bits) + 1.0) * _TO_UNIT


@njit(inline="always")
def _normal_pair(state):
    state, u1 = _next_uniform(state)
    state, u2 = _next_uniform(state)
    radius = math.sqrt(-2.0 * math.log(u1))
    angle = 2.0 * math.pi * u2
    return state, radius * math.cos(angle), radius * math.sin(angle)


@njit(inline="always")
def _crossing_fraction(x, y, dx, dy, r2):
    """Root s in (0, 1] of |(x, y) + s (dx, dy)|^2 = r2 for an inside start"""
    a = dx * dx + dy * dy
    b = 2.0 * (x * dx + y * dy)
    c = x * x + y * y - r2
    disc = math.sqrt(b * b - 4.0 * a * c)
    if b >= 0.0:
        s = 2.0 * c / (-b - disc)
    else:
        s = (-b + disc) / (2.0 * a)
    return min(max(s, 0.0), 1.0)


@njit(parallel=True)
def _exit_kernel(x0, y0, radius, rho, dt, max_steps, seed, reject_overshoot, alphas, times):
    n = alphas.shape[0]
    sq_dt = math.sqrt(dt)
    rho_c = math.sqrt(1.0 - rho * rho)
    r2 = radius * radius
    two_pi = 2.0 * math.pi
    for i in prange(n):
        state = _stream_state(seed, i)
        x = x0
        y = y0
        alphas[i] = np.nan
        times[i] = np.nan
        for step in range(max_steps):
            state, g1, g2 = _normal_pair(state)
            dx = sq_dt * g1
            dy = sq_dt * (rho * g1 + rho_c * g2)
            nx = x + dx
            ny = y + dy
            if nx * nx + ny * ny >= r2:
                if reject_overshoot:
                    frac = 1.0
                else:
                    frac = _crossing_fraction(x, y, dx, dy, r2)
                # radial projection onto the circle keeps the angle
                angle = math.atan2(y + frac * dy, x + frac * dx)
                if angle < 0.0:
                    angle += two_pi
                if angle >= two_pi:
                    angle = 0.0
                alphas[i] = angle
                times[i] = (step + frac) * dt
                break
            x = nx
            y = ny


@njit(parallel=True)
def _increment_kernel(rho, dt, seed, out):
    sq_dt = math.sqrt(dt)
    rho_c = math.sqrt(1.0 - rho * rho)
    for i in prange(out.shape[0]):
        state = _stream_state(seed, i)
        state, g1, g2 = _normal_pair(state)
        out[i, 0] = sq_dt * g1
        out[i, 1] = sq_dt * (rho * g1 + rho_c * g2)


def _seed_bits(seed: int) -> np.uint64:
    return np.uint64(int(seed) % (1 << 64))


def apply_thread_cap(cap: Optional[int]) -> None:
    """Limit numba worker threads; results do not depend on the count"""
    if cap is None:
        return
    threads = max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(threads)
    logger.debug("numba threads capped at %d", threads)


def increment_samples(n: int, dt: float, rho: float, seed: int = 0) -> np.ndarray:
    """First increment (dB1, dB2) of n generator streams, shape (n, 2)"""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer (got {n})")
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive (got {dt})")
    spec = ProblemSpec(rho)
    out = np.empty((int(n), 2))
    _increment_kernel(spec.rho, float(dt), _seed_bits(seed), out)
    return out


def simulate_exits(start: CartesianPoint, spec: ProblemSpec, cfg: SimConfig,
                   thread_cap: Optional[int] = None) -> ExitBatch:
    if not is_interior(start, spec):
        raise DomainError(f"start ({start.x}, {start.y}) is not strictly inside the disk of radius {spec.R}")
    apply_thread_cap(thread_cap)

    limit = cfg.time_limit(spec)
    max_steps = int(math.ceil(limit / cfg.dt))
    alphas = np.empty(cfg.n_paths)
    times = np.empty(cfg.n_paths)

    logger.info("simulating %d paths: rho=%g R=%g dt=%g mode=%s seed=%d",
                cfg.n_paths, spec.rho, spec.R, cfg.dt, cfg.boundary_mode.value, cfg.seed)
    began = time.perf_counter()
    _exit_kernel(float(start.x), float(start.y), spec.R, spec.rho, cfg.dt, max_steps,
                 _seed_bits(cfg.seed), cfg.boundary_mode is BoundaryMode.REJECT_OVERSHOOT,
                 alphas, times)
    elapsed = time.perf_counter() - began

    exited = ~np.isnan(alphas)
    n_censored = int(cfg.n_paths - exited.sum())
    if n_censored:
        logger.warning("%d of %d paths still inside after t=%g; excluded from the sample",
                       n_censored, cfg.n_paths, limit)
    logger.info("simulation finished in %.2f s", elapsed)
    return ExitBatch(alphas[exited], times[exited], n_censored, spec, start, cfg)


def empirical_profile(samples: Union[ExitBatch, Sequence[ExitSample]], n_bins: int = 72,
                      spec: Optional[ProblemSpec] = None,
                      start: Optional[CartesianPoint] = None) -> DensityProfile:
    """Histogram density per radian on n_bins equal bins, values at the bin centres"""
    if int(n_bins) != n_bins or n_bins < MIN_BINS:
        raise ParameterError(f"n_bins must be an integer >= {MIN_BINS} (got {n_bins})")
    n_bins = int(n_bins)
    extra = {"n_bins": n_bins}
    if isinstance(samples, ExitBatch):
        alphas = samples.alphas
        spec = spec or samples.spec
        start = start or samples.start
        extra.update(n_paths=samples.config.n_paths, dt=samples.config.dt,
                     seed=samples.config.seed, n_censored=samples.n_censored,
                     boundary_mode=samples.config.boundary_mode.value)
    else:
        alphas = np.array([s.alpha for s in samples], dtype=float)
        if spec is None or start is None:
            raise ParameterError("spec and start are required for a plain sample list")
    if alphas.size == 0:
        raise ParameterError("no exit samples to histogram")

    counts, edges = np.histogram(alphas, bins=n_bins, range=(0.0, TWO_PI))
    width = TWO_PI / n_bins
    values = counts / (alphas.size * width)
    centres = 0.5 * (edges[:-1] + edges[1:])
    extra["n_samples"] = int(alphas.size)
    meta = ProfileMeta(method=Method.MONTECARLO, spec=spec, start=start, extra=extra)
    return DensityProfile(centres, values, meta)
