# linear.py
# Linear change of variables taking the correlated disk problem to a Laplace problem on an ellipse

import math
import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from hitdisk.utils.errors import ParameterError

logger = logging.getLogger("hitdisk.geometry")

TWO_PI = 2.0 * math.pi
RHO_LIMIT = 1.0 - 1e-12
BOUNDARY_TOL = 1e-12

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ProblemSpec:
    """Correlation coefficient and disk radius of the hitting problem"""
    rho: float
    R: float = 1.0

    def __post_init__(self):
        rho = float(self.rho)
        R = float(self.R)
        if not math.isfinite(rho) or abs(rho) >= RHO_LIMIT:
            raise ParameterError(f"rho must satisfy |rho| < 1 (got {self.rho})")
        if not math.isfinite(R) or R <= 0.0:
            raise ParameterError(f"R must be positive (got {self.R})")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "R", R)

    @property
    def sign(self) -> float:
        # sgn(0) is taken as +1 so that rho = 0 gives a pure rotation
        return -1.0 if self.rho < 0.0 else 1.0


@dataclass(frozen=True)
class CartesianPoint:
    """Point in the original (x, y) frame"""
    x: float
    y: float

    @property
    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class EllipsePoint:
    """Point in the transformed (w, z) frame"""
    w: float
    z: float


@dataclass(frozen=True)
class EllipseGeometry:
    """Constants of the canonical ellipse induced by a ProblemSpec"""
    spec: ProblemSpec
    a: float
    b: float
    c: float
    q: float
    eta_hat: float
    A_cap: float
    B_cap: float

    @classmethod
    def from_spec(cls, spec: ProblemSpec) -> "EllipseGeometry":
        abs_rho = abs(spec.rho)
        a = spec.R / math.sqrt(1.0 - abs_rho)
        b = spec.R / math.sqrt(1.0 + abs_rho)
        # a - b without cancellation for small |rho|
        a_minus_b = spec.R * 2.0 * abs_rho / (
            (math.sqrt(1.0 + abs_rho) + math.sqrt(1.0 - abs_rho)) * math.sqrt(1.0 - abs_rho * abs_rho)
        )
        A_cap = 0.5 * (a + b)
        B_cap = 0.5 * a_minus_b
        c = 2.0 * math.sqrt(A_cap * B_cap)
        q = math.sqrt(B_cap / A_cap)
        eta_hat = -math.log(q) if q > 0.0 else math.inf
        return cls(spec=spec, a=a, b=b, c=c, q=q, eta_hat=eta_hat, A_cap=A_cap, B_cap=B_cap)

    @property
    def is_circular(self) -> bool:
        return self.q == 0.0

    @property
    def focal_sq(self) -> float:
        """a^2 - b^2 computed as 4 A B"""
        return 4.0 * self.A_cap * self.B_cap

    def contains(self, p: EllipsePoint, tol: float = BOUNDARY_TOL) -> bool:
        return (p.w / self.a) ** 2 + (p.z / self.b) ** 2 <= 1.0 + tol


def ellipse_geometry(spec: ProblemSpec) -> EllipseGeometry:
    return EllipseGeometry.from_spec(spec)


def wrap_angle(angle: ArrayLike) -> ArrayLike:
    """Normalize angles to [0, 2pi)"""
    wrapped = np.mod(angle, TWO_PI)
    # np.mod can round tiny negatives up to exactly 2pi
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def transform_matrix(spec: ProblemSpec) -> np.ndarray:
    """Matrix T with (w, z) = T (x, y)"""
    s = spec.sign
    lo = math.sqrt(2.0 * (1.0 - abs(spec.rho)))
    hi = math.sqrt(2.0 * (1.0 + abs(spec.rho)))
    return np.array([[1.0 / lo, -s / lo],
                     [s / hi, 1.0 / hi]])


def decompose_transform(spec: ProblemSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Split T into the rotation M and the whitening factor N, T = M N"""
    s = spec.sign
    abs_rho = abs(spec.rho)
    cos_part = math.sqrt((1.0 + abs_rho) / 2.0)
    sin_part = s * math.sqrt((1.0 - abs_rho) / 2.0)
    M = np.array([[cos_part, -sin_part],
                  [sin_part, cos_part]])
    scale = 1.0 / math.sqrt(1.0 - spec.rho * spec.rho)
    N = np.array([[scale, -spec.rho * scale],
                  [0.0, 1.0]])
    return M, N


def rotation_angle(spec: ProblemSpec) -> float:
    """Counter-clockwise angle of the rotation M"""
    abs_rho = abs(spec.rho)
    return spec.sign * math.atan(math.sqrt((1.0 - abs_rho) / (1.0 + abs_rho)))


def covariance_matrix(spec: ProblemSpec) -> np.ndarray:
    return np.array([[1.0, spec.rho],
                     [spec.rho, 1.0]])


def is_interior(p: CartesianPoint, spec: ProblemSpec) -> bool:
    return p.x * p.x + p.y * p.y < spec.R * spec.R


def forward_coords(x: ArrayLike, y: ArrayLike, spec: ProblemSpec) -> Tuple[ArrayLike, ArrayLike]:
    T = transform_matrix(spec)
    return T[0, 0] * x + T[0, 1] * y, T[1, 0] * x + T[1, 1] * y


def inverse_coords(w: ArrayLike, z: ArrayLike, spec: ProblemSpec) -> Tuple[ArrayLike, ArrayLike]:
    # T^-1 = M N inverted piecewise: N^-1 is upper triangular, M^-1 = M^T
    M, N = decompose_transform(spec)
    u = M[0, 0] * w + M[1, 0] * z
    v = M[0, 1] * w + M[1, 1] * z
    sq = math.sqrt(1.0 - spec.rho * spec.rho)
    return sq * u + spec.rho * v, v


def forward_linear(p: CartesianPoint, spec: ProblemSpec) -> EllipsePoint:
    w, z = forward_coords(p.x, p.y, spec)
    return EllipsePoint(float(w), float(z))


def inverse_linear(p: EllipsePoint, spec: ProblemSpec) -> CartesianPoint:
    x, y = inverse_coords(p.w, p.z, spec)
    return CartesianPoint(float(x), float(y))


def _scaled_boundary(alpha: ArrayLike, spec: ProblemSpec, geometry: EllipseGeometry):
    """(w/a, z/b) on the image of the circle and its derivative in alpha"""
    T = transform_matrix(spec)
    cos_a = np.cos(alpha)
    sin_a = np.sin(alpha)
    R = spec.R
    w_hat = R * (T[0, 0] * cos_a + T[0, 1] * sin_a) / geometry.a
    z_hat = R * (T[1, 0] * cos_a + T[1, 1] * sin_a) / geometry.b
    dw_hat = R * (-T[0, 0] * sin_a + T[0, 1] * cos_a) / geometry.a
    dz_hat = R * (-T[1, 0] * sin_a + T[1, 1] * cos_a) / geometry.b
    return w_hat, z_hat, dw_hat, dz_hat


def boundary_angle_to_tau(alpha: ArrayLike, spec: ProblemSpec) -> ArrayLike:
    """Ellipse boundary parameter tau of the image of the circle point at angle alpha"""
    geometry = EllipseGeometry.from_spec(spec)
    w_hat, z_hat, _, _ = _scaled_boundary(alpha, spec, geometry)
    return wrap_angle(np.arctan2(z_hat, w_hat))


def boundary_jacobian(alpha: ArrayLike, spec: ProblemSpec) -> ArrayLike:
    """d tau / d alpha along the boundary"""
    geometry = EllipseGeometry.from_spec(spec)
    w_hat, z_hat, dw_hat, dz_hat = _scaled_boundary(alpha, spec, geometry)
    jac = (w_hat * dz_hat - z_hat * dw_hat) / (w_hat * w_hat + z_hat * z_hat)
    if np.ndim(jac) == 0:
        return float(jac)
    return jac
