"""Interface geometry: shapes, motion laws, distances, normals, classification.

An interface is a closed surface (or a hyperplane segment) splitting the
computational box into two open regions.  Every query takes a time argument;
static shapes ignore it, moving shapes are evaluated by mapping the query
point into the body frame at time t (translation / rotation are isometries,
so distances computed in the body frame are exact).

Conventions
-----------
* ``omega1_side`` names which side of the interface is region 1:
  ``INSIDE`` / ``OUTSIDE`` for closed shapes, ``POSITIVE_HALF`` for
  hyperplanes (region 1 = points with coordinate above the offset).
* ``normal`` always points from region 1 into region 2.
* Unsigned distance tolerances: 1e-10 for analytic shapes (hyperplane,
  sphere, ellipsoid), 1e-8 for parametric polar curves.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

ANALYTIC_TOL = 1e-10
PARAMETRIC_TOL = 1e-8
ON_INTERFACE_TOL = 1e-10  # classification band
_NORMAL_QUERY_TOL = 1e-8  # how far off the surface normal() tolerates
_CURVE_SWEEP = 2048  # coarse angular samples before golden-section refinement


class RegionLabel(enum.Enum):
    OMEGA1 = "omega1"
    OMEGA2 = "omega2"
    ON_INTERFACE = "on_interface"


class Omega1Side(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    POSITIVE_HALF = "positive_half"


# ---------------------------------------------------------------------------
# shape kinds


@dataclass(frozen=True)
class Hyperplane:
    """Axis-aligned hyperplane {x[axis] = offset}.

    ``extent`` bounds the remaining coordinates (pairs of (lo, hi)) so the
    interface segment can be sampled; unbounded planes cannot be.
    """

    axis: int
    offset: float
    extent: Optional[tuple] = None  # ((lo, hi), ...) for the d-1 free axes


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")


@dataclass(frozen=True)
class Ellipsoid:
    center: tuple
    semi_axes: tuple

    def __post_init__(self):
        if any(a <= 0 for a in self.semi_axes):
            raise ValueError("semi-axes must be strictly positive")


@dataclass(frozen=True)
class PolarCurve:
    """Closed 2D curve r(theta) = r0 + sign * r1 * wave(lobes * theta).

    ``wave`` is "sin" or "cos"; ``sign`` is +1 or -1.  Requires r0 > r1 >= 0
    so the curve stays simple and encloses its center.
    """

    center: tuple
    r0: float
    r1: float
    lobes: int
    wave: str = "sin"
    sign: float = 1.0

    def __post_init__(self):
        if not (self.r0 > self.r1 >= 0):
            raise ValueError("polar curve needs r0 > r1 >= 0")
        if self.wave not in ("sin", "cos"):
            raise ValueError("wave must be 'sin' or 'cos'")


@dataclass(frozen=True)
class StarDeforming:
    """Polar curve whose wave amplitude grows linearly in time.

    At time t the body-frame radius is
    r(theta, t) = r0 + sign * (r1 + amplitude_rate * t) * wave(lobes * theta).
    """

    base: PolarCurve
    amplitude_rate: float


Kind = Union[Hyperplane, Sphere, Ellipsoid, PolarCurve, StarDeforming]


# ---------------------------------------------------------------------------
# motion laws


@dataclass(frozen=True)
class Static:
    pass


@dataclass(frozen=True)
class Translate:
    velocity: tuple


@dataclass(frozen=True)
class TranslateAndDeform:
    """Translation plus squared-semi-axis drift: a_i(t) = sqrt(a_i^2 + rate_i*t)."""

    velocity: tuple
    axis_sq_rates: tuple


@dataclass(frozen=True)
class TranslateRotateDeform:
    """Translation plus counter-clockwise rotation by angular_rate * t (2D).

    Radial deformation is carried by the StarDeforming kind; it is applied in
    the body frame before the rotation.
    """

    velocity: tuple
    angular_rate: float


Motion = Union[Static, Translate, TranslateAndDeform, TranslateRotateDeform]

STATIC = Static()


@dataclass(frozen=True)
class InterfaceShape:
    kind: Kind
    dim: int
    motion: Motion = STATIC
    horizon: Optional[float] = None  # moving shapes reject t outside [0, horizon]

    def is_parametric(self) -> bool:
        return isinstance(self.kind, (PolarCurve, StarDeforming))

    def tolerance(self) -> float:
        return PARAMETRIC_TOL if self.is_parametric() else ANALYTIC_TOL


# ---------------------------------------------------------------------------
# body-frame snapshots

_ROT_EPS = 1e-15


def _check_time(shape: InterfaceShape, t: float) -> None:
    if not isinstance(shape.motion, Static) or isinstance(shape.kind, StarDeforming):
        if shape.horizon is not None and not (-1e-12 <= t <= shape.horizon + 1e-12):
            raise ValueError(f"time {t} outside horizon [0, {shape.horizon}]")


def _check_dim(shape: InterfaceShape, x: np.ndarray) -> None:
    if x.shape[-1] != shape.dim:
        raise ValueError(f"point dimension {x.shape[-1]} != shape dimension {shape.dim}")


def _frame(shape: InterfaceShape, t: float):
    """Return (center_t, rotation_angle, kind_at_t) for the body frame at t."""
    kind = shape.kind
    motion = shape.motion
    phi = 0.0
    if isinstance(kind, Hyperplane):
        offset = kind.offset
        if isinstance(motion, Translate):
            offset = offset + motion.velocity[kind.axis] * t
        elif not isinstance(motion, Static):
            raise ValueError("hyperplanes support Static/Translate motion only")
        return None, 0.0, Hyperplane(kind.axis, offset, kind.extent)

    center = np.asarray(_kind_center(kind), dtype=float)
    if isinstance(motion, (Translate, TranslateAndDeform, TranslateRotateDeform)):
        center = center + np.asarray(motion.velocity, dtype=float) * t
    if isinstance(motion, TranslateRotateDeform):
        if shape.dim != 2:
            raise ValueError("rotation is only supported in 2D")
        phi = motion.angular_rate * t

    if isinstance(kind, Sphere):
        local = Sphere(tuple(np.zeros(shape.dim)), kind.radius)
    elif isinstance(kind, Ellipsoid):
        axes = np.asarray(kind.semi_axes, dtype=float)
        if isinstance(motion, TranslateAndDeform):
            sq = axes**2 + np.asarray(motion.axis_sq_rates, dtype=float) * t
            if np.any(sq <= 0):
                raise ValueError("deformation collapsed a semi-axis")
            axes = np.sqrt(sq)
        local = Ellipsoid(tuple(np.zeros(shape.dim)), tuple(axes))
    elif isinstance(kind, PolarCurve):
        local = PolarCurve((0.0, 0.0), kind.r0, kind.r1, kind.lobes, kind.wave, kind.sign)
    elif isinstance(kind, StarDeforming):
        b = kind.base
        r1_t = b.r1 + kind.amplitude_rate * t
        if not (b.r0 > abs(r1_t)):
            raise ValueError("deformation amplitude exceeded base radius")
        local = PolarCurve((0.0, 0.0), b.r0, abs(r1_t), b.lobes, b.wave,
                           b.sign * (1.0 if r1_t >= 0 else -1.0))
    else:
        raise TypeError(f"unknown shape kind {type(kind)!r}")
    return center, phi, local


def _kind_center(kind: Kind):
    if isinstance(kind, StarDeforming):
        return kind.base.center
    return kind.center


def _to_body(x: np.ndarray, center, phi: float) -> np.ndarray:
    y = x - center
    if abs(phi) > _ROT_EPS:
        c, s = math.cos(phi), math.sin(phi)
        # inverse rotation R(-phi)
        y = np.stack([c * y[..., 0] + s * y[..., 1],
                      -s * y[..., 0] + c * y[..., 1]], axis=-1)
    return y


def _vec_to_world(v: np.ndarray, phi: float) -> np.ndarray:
    if abs(phi) > _ROT_EPS:
        c, s = math.cos(phi), math.sin(phi)
        v = np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])
    return v


# ---------------------------------------------------------------------------
# polar curve helpers (body frame, curve centered at origin)


def _curve_radius(curve: PolarCurve, theta):
    w = np.sin if curve.wave == "sin" else np.cos
    return curve.r0 + curve.sign * curve.r1 * w(curve.lobes * theta)


def _curve_radius_deriv(curve: PolarCurve, theta):
    k = curve.lobes
    if curve.wave == "sin":
        return curve.sign * curve.r1 * k * np.cos(k * theta)
    return -curve.sign * curve.r1 * k * np.sin(k * theta)


def _curve_point(curve: PolarCurve, theta):
    r = _curve_radius(curve, theta)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)


def _curve_distance_sq(curve: PolarCurve, y: np.ndarray, theta):
    # coordinate-difference form: no cancellation floor for points near the curve
    r = _curve_radius(curve, theta)
    return (y[0] - r * np.cos(theta)) ** 2 + (y[1] - r * np.sin(theta)) ** 2


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, a: float, b: float, tol: float = 1e-10):
    """Golden-section minimum of f on [a, b] to bracket width tol."""
    x1 = b - _GOLD * (b - a)
    x2 = a + _GOLD * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLD * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLD * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def _curve_nearest_theta(curve: PolarCurve, y: np.ndarray) -> float:
    """Angle of the nearest curve point: coarse sweep, refine every local min."""
    thetas = np.linspace(0.0, 2.0 * math.pi, _CURVE_SWEEP, endpoint=False)
    d2 = _curve_distance_sq(curve, y, thetas)
    is_min = (d2 <= np.roll(d2, 1)) & (d2 <= np.roll(d2, -1))
    h = 2.0 * math.pi / _CURVE_SWEEP
    best_theta, best_val = 0.0, np.inf
    for k in np.nonzero(is_min)[0]:
        th = _golden_min(lambda s: _curve_distance_sq(curve, y, s),
                         thetas[k] - h, thetas[k] + h)
        val = _curve_distance_sq(curve, y, th)
        if val < best_val:
            best_theta, best_val = th, val
    return best_theta


def _curve_distance(curve: PolarCurve, y: np.ndarray) -> float:
    th = _curve_nearest_theta(curve, y)
    return float(np.linalg.norm(y - _curve_point(curve, th)))


def _curve_distance_batch(curve: PolarCurve, Y: np.ndarray) -> np.ndarray:
    """Vectorized curve distance: per-point sweep + golden refinement.

    Refines only the best coarse bracket per point; with _CURVE_SWEEP samples
    the global basin spans many cells for every catalog curve, so the best
    sample always lies inside it.
    """
    thetas = np.linspace(0.0, 2.0 * math.pi, _CURVE_SWEEP, endpoint=False)
    r = _curve_radius(curve, thetas)  # (S,)
    cx = r * np.cos(thetas)
    cy = r * np.sin(thetas)
    out = np.empty(len(Y))
    for start in range(0, len(Y), 256):
        blk = Y[start:start + 256]
        d2 = (blk[:, :1] - cx[None, :]) ** 2 + (blk[:, 1:] - cy[None, :]) ** 2
        k = np.argmin(d2, axis=1)
        h = 2.0 * math.pi / _CURVE_SWEEP
        a = thetas[k] - h
        b = thetas[k] + h

        def f(th):
            rr = _curve_radius(curve, th)
            return (blk[:, 0] - rr * np.cos(th)) ** 2 + (blk[:, 1] - rr * np.sin(th)) ** 2

        # masked batched golden section: one f evaluation per iteration
        x1 = b - _GOLD * (b - a)
        x2 = a + _GOLD * (b - a)
        f1, f2 = f(x1), f(x2)
        for _ in range(60):
            left = f1 <= f2
            b = np.where(left, x2, b)
            a = np.where(left, a, x1)
            probe = np.where(left, b - _GOLD * (b - a), a + _GOLD * (b - a))
            fprobe = f(probe)
            x1, f1, x2, f2 = (np.where(left, probe, x2), np.where(left, fprobe, f2),
                              np.where(left, x1, probe), np.where(left, f1, fprobe))
        th = 0.5 * (a + b)
        out[start:start + 256] = np.sqrt(np.maximum(f(th), 0.0))
    return out


# ---------------------------------------------------------------------------
# ellipsoid foot point (Lagrange-multiplier Newton with saddle branches)


def _ellipsoid_foot(y: np.ndarray, axes: np.ndarray) -> np.ndarray:
    """Nearest point on the origin-centered ellipsoid sum((p/a)^2)=1 to y.

    Newton iteration on F(lam) = sum (a_i y_i / (a_i^2 + lam))^2 - 1, which is
    strictly decreasing on (-min a_i^2, inf) over the nonzero components, with
    bisection safeguarding.  Components that vanish contribute extra candidate
    branches at lam = -a_j^2 (the off-axis feet inside the evolute).
    """
    a = np.asarray(axes, dtype=float)
    if np.ptp(a) == 0.0:  # genuinely a sphere
        rho = np.linalg.norm(y)
        if rho == 0.0:
            p = np.zeros_like(y)
            p[0] = a[0]
            return p
        return y * (a[0] / rho)

    snap = 1e-12 * a
    yy = np.where(np.abs(y) < snap, 0.0, y)
    nz = yy != 0.0
    candidates = []

    if not np.any(nz):  # query at the center
        j = int(np.argmin(a))
        p = np.zeros_like(yy)
        p[j] = a[j]
        return p

    # main branch
    a_nz = a[nz]
    y_nz = yy[nz]
    lam_lo = -np.min(a_nz) ** 2

    def F(lam):
        return float(np.sum((a_nz * y_nz / (a_nz**2 + lam)) ** 2) - 1.0)

    lo = lam_lo + 1e-14 * np.max(a) ** 2
    while F(lo) <= 0.0 and lo - lam_lo > 1e-300:
        lo = lam_lo + (lo - lam_lo) * 0.5
    hi = max(lo, 0.0) + np.max(a) * (np.linalg.norm(yy) + np.max(a))
    while F(hi) > 0.0:
        hi = lam_lo + 2.0 * (hi - lam_lo)
    # initial iterate from the angular parametrization p0 = y / |y/a|:
    # solving p0_i = a_i^2 y_i / (a_i^2 + lam) per component gives
    # lam_i = a_i^2 (|y/a| - 1); start from their mean, clipped to the bracket
    nu = float(np.linalg.norm(y_nz / a_nz))
    lam = float(np.mean(a_nz**2) * (nu - 1.0))
    if not (lo < lam < hi):
        lam = 0.5 * (lo + hi)
    for _ in range(200):
        val = F(lam)
        if abs(val) <= 1e-13:
            break
        if val > 0.0:
            lo = lam
        else:
            hi = lam
        dval = float(np.sum(-2.0 * (a_nz * y_nz) ** 2 / (a_nz**2 + lam) ** 3))
        step = -val / dval if dval != 0.0 else 0.0
        nxt = lam + step
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
            step = nxt - lam
        lam = nxt
        if abs(step) <= 1e-15 * max(1.0, abs(lam)) or hi - lo <= 1e-15 * max(1.0, abs(lam)):
            break
    p = np.where(nz, yy * a**2 / (a**2 + lam), 0.0)
    candidates.append(p)

    # saddle branches for exactly-zero components
    for j in np.nonzero(~nz)[0]:
        aj2 = a[j] ** 2
        denom = a**2 - aj2
        if np.any(nz & (np.abs(denom) < 1e-14)):
            continue  # coincident axis with a nonzero component: branch empty
        q = np.zeros_like(yy)
        q[nz] = yy[nz] * a[nz] ** 2 / denom[nz]
        slack = 1.0 - float(np.sum((q[nz] / a[nz]) ** 2))
        if slack < 0.0:
            continue
        q[j] = a[j] * math.sqrt(slack)
        candidates.append(q)

    dists = [np.linalg.norm(yy - c) for c in candidates]
    best = candidates[int(np.argmin(dists))]
    if abs(float(np.sum((best / a) ** 2)) - 1.0) > 1e-9:
        raise RuntimeError("ellipsoid projection failed to land on the surface")
    return best


# ---------------------------------------------------------------------------
# public operations


def distance(shape: InterfaceShape, x, t: float = 0.0) -> float:
    """Unsigned Euclidean distance from x to the interface at time t."""
    x = np.asarray(x, dtype=float)
    _check_dim(shape, x)
    _check_time(shape, t)
    center, phi, kind = _frame(shape, t)
    if isinstance(kind, Hyperplane):
        return abs(float(x[kind.axis]) - kind.offset)
    y = _to_body(x, center, phi)
    if isinstance(kind, Sphere):
        return abs(float(np.linalg.norm(y)) - kind.radius)
    if isinstance(kind, Ellipsoid):
        p = _ellipsoid_foot(y, np.asarray(kind.semi_axes))
        return float(np.linalg.norm(y - p))
    return _curve_distance(kind, y)


def distance_batch(shape: InterfaceShape, X, t=0.0) -> np.ndarray:
    """Vectorized distance; ``t`` may be a scalar or one time per point."""
    X = np.asarray(X, dtype=float)
    _check_dim(shape, X)
    times = np.broadcast_to(np.asarray(t, dtype=float), (len(X),))
    if np.ndim(t) == 0:
        _check_time(shape, float(t))
        center, phi, kind = _frame(shape, float(t))
        if isinstance(kind, Hyperplane):
            return np.abs(X[:, kind.axis] - kind.offset)
        Y = _to_body(X, center, phi)
        if isinstance(kind, Sphere):
            return np.abs(np.linalg.norm(Y, axis=1) - kind.radius)
        if isinstance(kind, Ellipsoid):
            return np.array([np.linalg.norm(Y[i] - _ellipsoid_foot(Y[i], np.asarray(kind.semi_axes)))
                             for i in range(len(Y))])
        return _curve_distance_batch(kind, Y)
    # per-point times: group identical times to keep the vector paths
    out = np.empty(len(X))
    for tv in np.unique(times):
        sel = times == tv
        out[sel] = distance_batch(shape, X[sel], float(tv))
    return out


def normal(shape: InterfaceShape, p, t: float = 0.0,
           omega1_side: Omega1Side = Omega1Side.INSIDE) -> np.ndarray:
    """Unit normal at an on-interface point, pointing from region 1 to region 2."""
    p = np.asarray(p, dtype=float)
    _check_dim(shape, p)
    if distance(shape, p, t) > _NORMAL_QUERY_TOL:
        raise ValueError("normal() requires a point on the interface")
    center, phi, kind = _frame(shape, t)
    if isinstance(kind, Hyperplane):
        if omega1_side is not Omega1Side.POSITIVE_HALF:
            raise ValueError("hyperplane interfaces use POSITIVE_HALF orientation")
        n = np.zeros(shape.dim)
        n[kind.axis] = -1.0  # from {coord > offset} into {coord < offset}
        return n
    if omega1_side is Omega1Side.POSITIVE_HALF:
        raise ValueError("closed shapes use INSIDE/OUTSIDE orientation")
    y = _to_body(p, center, phi)
    if isinstance(kind, Sphere):
        out = y / np.linalg.norm(y)
    elif isinstance(kind, Ellipsoid):
        a = np.asarray(kind.semi_axes)
        g = y / a**2
        out = g / np.linalg.norm(g)
    else:  # polar curve: rotate the tangent, orient by the radial test
        theta = math.atan2(y[1], y[0])
        r = float(_curve_radius(kind, theta))
        dr = float(_curve_radius_deriv(kind, theta))
        tang = np.array([dr * math.cos(theta) - r * math.sin(theta),
                         dr * math.sin(theta) + r * math.cos(theta)])
        out = np.array([tang[1], -tang[0]])
        out /= np.linalg.norm(out)
        if np.dot(out, [math.cos(theta), math.sin(theta)]) < 0:
            out = -out
    out_world = _vec_to_world(out, phi)
    if omega1_side is Omega1Side.OUTSIDE:
        out_world = -out_world
    return out_world


def _check_side(shape: InterfaceShape, omega1_side: Omega1Side) -> None:
    is_plane = isinstance(shape.kind, Hyperplane)
    if is_plane != (omega1_side is Omega1Side.POSITIVE_HALF):
        raise ValueError("POSITIVE_HALF orientation is for hyperplanes, INSIDE/OUTSIDE for closed shapes")


def classify(shape: InterfaceShape, x, t: float = 0.0,
             omega1_side: Omega1Side = Omega1Side.INSIDE,
             tol: float = ON_INTERFACE_TOL) -> RegionLabel:
    """Label a point region 1 / region 2 / on-interface (within ``tol``)."""
    _check_side(shape, omega1_side)
    s = _signed_side(shape, np.asarray(x, dtype=float), t, tol)
    if s == 0:
        return RegionLabel.ON_INTERFACE
    inside = s < 0
    if omega1_side is Omega1Side.POSITIVE_HALF:
        omega1 = s > 0
    elif omega1_side is Omega1Side.INSIDE:
        omega1 = inside
    else:
        omega1 = not inside
    return RegionLabel.OMEGA1 if omega1 else RegionLabel.OMEGA2


def _signed_side(shape: InterfaceShape, x: np.ndarray, t: float, tol: float) -> int:
    """-1 inside / +1 outside (positive half for planes) / 0 within tol of the surface."""
    _check_dim(shape, x)
    _check_time(shape, t)
    center, phi, kind = _frame(shape, t)
    if isinstance(kind, Hyperplane):
        s = float(x[kind.axis]) - kind.offset
        return 0 if abs(s) <= tol else (1 if s > 0 else -1)
    y = _to_body(x, center, phi)
    if isinstance(kind, Sphere):
        s = float(np.linalg.norm(y)) - kind.radius
        return 0 if abs(s) <= tol else (1 if s > 0 else -1)
    if isinstance(kind, Ellipsoid):
        a = np.asarray(kind.semi_axes)
        lvl = float(np.sum((y / a) ** 2)) - 1.0
        if abs(lvl) > 1e-6:
            return 1 if lvl > 0 else -1
        d = float(np.linalg.norm(y - _ellipsoid_foot(y, a)))
        return 0 if d <= tol else (1 if lvl > 0 else -1)
    theta = math.atan2(y[1], y[0])
    lvl = float(np.hypot(y[0], y[1])) - float(_curve_radius(kind, theta))
    if abs(lvl) > 1e-6:
        return 1 if lvl > 0 else -1
    d = _curve_distance(kind, y)
    return 0 if d <= tol else (1 if lvl > 0 else -1)


def _side_batch(shape: InterfaceShape, X: np.ndarray, t: float, tol: float) -> np.ndarray:
    """Vectorized _signed_side over points sharing one time."""
    _check_time(shape, t)
    center, phi, kind = _frame(shape, t)
    if isinstance(kind, Hyperplane):
        s = X[:, kind.axis] - kind.offset
        out = np.sign(s).astype(np.int8)
        out[np.abs(s) <= tol] = 0
        return out
    Y = _to_body(X, center, phi)
    if isinstance(kind, Sphere):
        s = np.linalg.norm(Y, axis=1) - kind.radius
        out = np.sign(s).astype(np.int8)
        out[np.abs(s) <= tol] = 0
        return out
    if isinstance(kind, Ellipsoid):
        a = np.asarray(kind.semi_axes)
        lvl = np.sum((Y / a) ** 2, axis=1) - 1.0
        out = np.where(lvl > 0, 1, -1).astype(np.int8)
        near = np.abs(lvl) <= 1e-6
        for i in np.nonzero(near)[0]:
            d = float(np.linalg.norm(Y[i] - _ellipsoid_foot(Y[i], a)))
            if d <= tol:
                out[i] = 0
        return out
    theta = np.arctan2(Y[:, 1], Y[:, 0])
    lvl = np.hypot(Y[:, 0], Y[:, 1]) - _curve_radius(kind, theta)
    out = np.where(lvl > 0, 1, -1).astype(np.int8)
    near = np.abs(lvl) <= 1e-6
    for i in np.nonzero(near)[0]:
        if _curve_distance(kind, Y[i]) <= tol:
            out[i] = 0
    return out


def classify_batch(shape: InterfaceShape, X, t=0.0,
                   omega1_side: Omega1Side = Omega1Side.INSIDE,
                   tol: float = ON_INTERFACE_TOL) -> np.ndarray:
    """Vectorized classify: int8 array with 1 = region 1, 2 = region 2, 0 = on interface.

    ``t`` may be a scalar or one time per point.
    """
    _check_side(shape, omega1_side)
    X = np.asarray(X, dtype=float)
    _check_dim(shape, X)
    times = np.broadcast_to(np.asarray(t, dtype=float), (len(X),))
    side = np.empty(len(X), dtype=np.int8)
    for tv in np.unique(times):
        sel = times == tv
        side[sel] = _side_batch(shape, X[sel], float(tv), tol)
    if omega1_side is Omega1Side.POSITIVE_HALF:
        omega1 = side > 0
    elif omega1_side is Omega1Side.INSIDE:
        omega1 = side < 0
    else:
        omega1 = side > 0
    out = np.where(omega1, 1, 2).astype(np.int8)
    out[side == 0] = 0
    return out


def sample_interface(shape: InterfaceShape, n: int, t: float = 0.0,
                     rng_seed: int = 0, strategy: str = "random") -> np.ndarray:
    """n points on the interface at time t; deterministic given the seed.

    ``strategy`` "random" draws parameters uniformly; "grid" spaces them
    evenly (cell-centered) where the shape has a 1D parametrization.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    _check_time(shape, t)
    rng = np.random.default_rng(rng_seed)
    center, phi, kind = _frame(shape, t)
    d = shape.dim

    if isinstance(kind, Hyperplane):
        if kind.extent is None:
            raise ValueError("hyperplane sampling needs extent bounds")
        pts = np.empty((n, d))
        pts[:, kind.axis] = kind.offset
        free = [i for i in range(d) if i != kind.axis]
        for col, (lo, hi) in zip(free, kind.extent):
            if strategy == "grid" and len(free) == 1:
                pts[:, col] = lo + (np.arange(n) + 0.5) * (hi - lo) / n
            else:
                pts[:, col] = rng.uniform(lo, hi, size=n)
        return pts

    if isinstance(kind, (Sphere, Ellipsoid)):
        radii = (np.full(d, kind.radius) if isinstance(kind, Sphere)
                 else np.asarray(kind.semi_axes, dtype=float))
        if d == 2:
            if strategy == "grid":
                ang = (np.arange(n) + 0.5) * 2.0 * math.pi / n
            else:
                ang = rng.uniform(0.0, 2.0 * math.pi, size=n)
            u = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        else:
            g = rng.standard_normal((n, d))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            u = g
        body = u * radii
    else:  # polar curve
        if strategy == "grid":
            ang = (np.arange(n) + 0.5) * 2.0 * math.pi / n
        else:
            ang = rng.uniform(0.0, 2.0 * math.pi, size=n)
        body = _curve_point(kind, ang)

    if abs(phi) > _ROT_EPS:
        c, s = math.cos(phi), math.sin(phi)
        body = body @ np.array([[c, s], [-s, c]])  # row-vector form of R(phi)
    return body + center


def interface_normals(shape: InterfaceShape, P: np.ndarray, t: float,
                      omega1_side: Omega1Side) -> np.ndarray:
    """Normals at a batch of on-interface points (region 1 -> region 2)."""
    return np.stack([normal(shape, P[i], t, omega1_side) for i in range(len(P))])
