"""Catalog of manufactured interface problems.

Each problem states a piecewise exact solution (u1 in region 1, u2 in
region 2) from which every data function is produced analytically:

* sources   f_i = -beta_i * lap(u_i)            (elliptic)
            f_i = d_t u_i - beta_i * lap(u_i)   (parabolic)
* jumps     g1 = u1 - u2 on the interface,
            g2 = beta1 grad(u1).n - beta2 grad(u2).n  (n: region 1 -> region 2)
* boundary  gD = trace of the exact solution of the region owning the point
* initial   g0 = exact solution at t = 0

Sources are derived from the stated solutions (see the inline Laplacians),
so the whole suite is self-consistent by construction; the test suite
verifies this against a finite-difference oracle.

All evaluators are vectorized: X has shape (N, d), T shape (N,) for
parabolic problems (None otherwise), returning shape (N,).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import (
    Ellipsoid,
    Hyperplane,
    InterfaceShape,
    Omega1Side,
    PolarCurve,
    RegionLabel,
    Sphere,
    StarDeforming,
    Translate,
    TranslateAndDeform,
    TranslateRotateDeform,
    classify,
    classify_batch,
    interface_normals,
)

Evaluator = Callable[..., np.ndarray]


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    dim: int
    parabolic: bool
    horizon: Optional[float]
    domain: tuple  # ((lo, hi), ...) per axis; bounding box for curved domains
    interface: InterfaceShape
    omega1_side: Omega1Side
    beta1: float
    beta2: float
    exact_u1: Evaluator
    exact_u2: Evaluator
    grad_u1: Evaluator  # spatial gradient, (N, d)
    grad_u2: Evaluator
    f1: Evaluator
    f2: Evaluator
    outer_curve: Optional[PolarCurve] = None  # non-box outer boundary (flower domain)

    def beta(self, region: int) -> float:
        return self.beta1 if region == 1 else self.beta2

    def exact(self, region: int, X, T=None) -> np.ndarray:
        fn = self.exact_u1 if region == 1 else self.exact_u2
        return fn(X, T) if self.parabolic else fn(X)

    def grad(self, region: int, X, T=None) -> np.ndarray:
        fn = self.grad_u1 if region == 1 else self.grad_u2
        return fn(X, T) if self.parabolic else fn(X)

    def source(self, region: int, X, T=None) -> np.ndarray:
        fn = self.f1 if region == 1 else self.f2
        return fn(X, T) if self.parabolic else fn(X)


# ---------------------------------------------------------------------------
# elliptic problems


def _line2d() -> ProblemSpec:
    two_pi = 2.0 * math.pi

    def u1(X):
        return -np.sin(two_pi * X[:, 0]) * np.sin(two_pi * X[:, 1]) - 1.0

    def u2(X):
        return np.sin(two_pi * X[:, 0]) * np.sin(two_pi * X[:, 1]) + 1.0

    def grad_u1(X):
        s0, c0 = np.sin(two_pi * X[:, 0]), np.cos(two_pi * X[:, 0])
        s1, c1 = np.sin(two_pi * X[:, 1]), np.cos(two_pi * X[:, 1])
        return np.stack([-two_pi * c0 * s1, -two_pi * s0 * c1], axis=1)

    def grad_u2(X):
        return -grad_u1(X)

    # lap u1 = +8 pi^2 sin sin, lap u2 = -8 pi^2 sin sin
    def f1(X):
        return 8.0 * math.pi**2 * np.sin(two_pi * X[:, 0]) * np.sin(two_pi * X[:, 1])

    f2 = f1  # -beta2 * lap u2 with beta2 = +1 equals f1 (beta1 = -1)

    return ProblemSpec(
        name="line2d", dim=2, parabolic=False, horizon=None,
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        interface=InterfaceShape(Hyperplane(0, 0.0, ((-1.0, 1.0),)), dim=2),
        omega1_side=Omega1Side.POSITIVE_HALF,
        beta1=-1.0, beta2=1.0,
        exact_u1=u1, exact_u2=u2, grad_u1=grad_u1, grad_u2=grad_u2, f1=f1, f2=f2,
    )


def _sunflower2d() -> ProblemSpec:
    beta2 = 10.0

    def u1(X):
        return X[:, 0] ** 2 + X[:, 1] ** 2

    def u2(X):
        r2 = X[:, 0] ** 2 + X[:, 1] ** 2
        return (r2**2 - 0.1 * np.log(2.0 * np.sqrt(r2))) / beta2

    def grad_u1(X):
        return 2.0 * X

    def grad_u2(X):
        r2 = (X[:, 0] ** 2 + X[:, 1] ** 2)[:, None]
        return (4.0 * r2 * X - 0.1 * X / r2) / beta2

    def f1(X):
        return np.full(len(X), -4.0)  # -beta1 * lap(r^2), beta1 = 1

    def f2(X):
        # lap(r^4) = 16 r^2 in 2D and log r is harmonic away from the origin
        return -16.0 * (X[:, 0] ** 2 + X[:, 1] ** 2)

    c = 0.02 * math.sqrt(5.0)
    return ProblemSpec(
        name="sunflower2d", dim=2, parabolic=False, horizon=None,
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        interface=InterfaceShape(PolarCurve((c, c), 0.4, 0.2, 20, "sin", 1.0), dim=2),
        omega1_side=Omega1Side.INSIDE,
        beta1=1.0, beta2=beta2,
        exact_u1=u1, exact_u2=u2, grad_u1=grad_u1, grad_u2=grad_u2, f1=f1, f2=f2,
    )


def _exp_sin_pair(dim: int, beta1: float, beta2: float):
    """u1 = exp(sum x_i), u2 = prod sin(x_i); gradients and sources in d dims."""

    def u1(X):
        return np.exp(X.sum(axis=1))

    def u2(X):
        return np.prod(np.sin(X), axis=1)

    def grad_u1(X):
        return np.exp(X.sum(axis=1))[:, None].repeat(dim, axis=1)

    def grad_u2(X):
        s = np.sin(X)
        prod = np.prod(s, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(s != 0.0, prod[:, None] / s, 0.0)
        # where sin(x_j) == 0 the quotient form fails; rebuild that column
        bad = s == 0.0
        if np.any(bad):
            for i, j in zip(*np.nonzero(bad)):
                others = np.prod(np.delete(s[i], j))
                ratio[i, j] = others
        return ratio * np.cos(X)

    def f1(X):
        return -beta1 * dim * np.exp(X.sum(axis=1))

    def f2(X):
        return beta2 * dim * np.prod(np.sin(X), axis=1)

    return u1, u2, grad_u1, grad_u2, f1, f2


def _ellipse2d() -> ProblemSpec:
    u1, u2, g1, g2, f1, f2 = _exp_sin_pair(2, 1e-3, 1.0)
    return ProblemSpec(
        name="ellipse2d", dim=2, parabolic=False, horizon=None,
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        interface=InterfaceShape(Ellipsoid((0.0, 0.0), (0.2, 0.5)), dim=2),
        omega1_side=Omega1Side.INSIDE,
        beta1=1e-3, beta2=1.0,
        exact_u1=u1, exact_u2=u2, grad_u1=g1, grad_u2=g2, f1=f1, f2=f2,
    )


def _flower2d() -> ProblemSpec:
    u1, u2, g1, g2, f1, f2 = _exp_sin_pair(2, 1.0, 10.0)
    return ProblemSpec(
        name="flower2d", dim=2, parabolic=False, horizon=None,
        domain=((-1.3, 1.3), (-1.3, 1.3)),
        interface=InterfaceShape(PolarCurve((0.0, 0.0), 0.4, 0.2, 5, "cos", -1.0), dim=2),
        omega1_side=Omega1Side.INSIDE,
        beta1=1.0, beta2=10.0,
        exact_u1=u1, exact_u2=u2, grad_u1=g1, grad_u2=g2, f1=f1, f2=f2,
        outer_curve=PolarCurve((0.0, 0.0), 1.0, 0.3, 5, "cos", -1.0),
    )


def _ellipsoid3d() -> ProblemSpec:
    u1, u2, g1, g2, f1, f2 = _exp_sin_pair(3, 1e-3, 1.0)
    return ProblemSpec(
        name="ellipsoid3d", dim=3, parabolic=False, horizon=None,
        domain=tuple(((-1.0, 1.0),) * 3),
        interface=InterfaceShape(Ellipsoid((0.0, 0.0, 0.0), (0.7, 0.5, 0.3)), dim=3),
        omega1_side=Omega1Side.INSIDE,
        beta1=1e-3, beta2=1.0,
        exact_u1=u1, exact_u2=u2, grad_u1=g1, grad_u2=g2, f1=f1, f2=f2,
    )


def _hypersphere10d() -> ProblemSpec:
    u1, u2, g1, g2, f1, f2 = _exp_sin_pair(10, 1e-3, 1.0)
    return ProblemSpec(
        name="hypersphere10d", dim=10, parabolic=False, horizon=None,
        domain=tuple(((-1.0, 1.0),) * 10),
        interface=InterfaceShape(Sphere(tuple([0.0] * 10), 0.5), dim=10),
        omega1_side=Omega1Side.INSIDE,
        beta1=1e-3, beta2=1.0,
        exact_u1=u1, exact_u2=u2, grad_u1=g1, grad_u2=g2, f1=f1, f2=f2,
    )


# ---------------------------------------------------------------------------
# parabolic problems: shared solution pair on [0, 3.5]^2 x [0, 1]
#   u1 = 0.01 e^t e^(x+y)  (exterior),  u2 = e^t sin(x) sin(y)  (interior)

_P_BETA1, _P_BETA2 = 1.0, 10.0


def _pu1(X, T):
    return 0.01 * np.exp(T + X[:, 0] + X[:, 1])


def _pu2(X, T):
    return np.exp(T) * np.sin(X[:, 0]) * np.sin(X[:, 1])


def _pgrad1(X, T):
    v = _pu1(X, T)
    return np.stack([v, v], axis=1)


def _pgrad2(X, T):
    e = np.exp(T)
    return np.stack([e * np.cos(X[:, 0]) * np.sin(X[:, 1]),
                     e * np.sin(X[:, 0]) * np.cos(X[:, 1])], axis=1)


def _pf1(X, T):
    # d_t u1 = u1, lap u1 = 2 u1  ->  f1 = (1 - 2 beta1) u1
    return (1.0 - 2.0 * _P_BETA1) * _pu1(X, T)


def _pf2(X, T):
    # d_t u2 = u2, lap u2 = -2 u2  ->  f2 = (1 + 2 beta2) u2
    return (1.0 + 2.0 * _P_BETA2) * _pu2(X, T)


def _parabolic(name: str, interface: InterfaceShape) -> ProblemSpec:
    return ProblemSpec(
        name=name, dim=2, parabolic=True, horizon=1.0,
        domain=((0.0, 3.5), (0.0, 3.5)),
        interface=interface,
        omega1_side=Omega1Side.OUTSIDE,
        beta1=_P_BETA1, beta2=_P_BETA2,
        exact_u1=_pu1, exact_u2=_pu2, grad_u1=_pgrad1, grad_u2=_pgrad2,
        f1=_pf1, f2=_pf2,
    )


def _fixed_circle() -> ProblemSpec:
    return _parabolic("fixed_circle",
                      InterfaceShape(Sphere((1.5, 1.5), 1.0), dim=2, horizon=1.0))


def _moving_circle() -> ProblemSpec:
    return _parabolic("moving_circle",
                      InterfaceShape(Sphere((1.2, 1.2), 1.0), dim=2,
                                     motion=Translate((1.0, 1.0)), horizon=1.0))


def _deforming_ellipse() -> ProblemSpec:
    return _parabolic("deforming_ellipse",
                      InterfaceShape(Ellipsoid((1.2, 1.2), (1.0, 1.0)), dim=2,
                                     motion=TranslateAndDeform((0.8, 0.8), (0.1, -0.1)),
                                     horizon=1.0))


def _deforming_star() -> ProblemSpec:
    base = PolarCurve((1.2, 1.2), 1.0, 0.0, 5, "cos", -1.0)
    return _parabolic("deforming_star",
                      InterfaceShape(StarDeforming(base, 0.3), dim=2,
                                     motion=TranslateRotateDeform((0.8, 0.8), 2.0 * math.pi),
                                     horizon=1.0))


_BUILDERS = (
    _line2d, _sunflower2d, _ellipse2d, _flower2d, _ellipsoid3d, _hypersphere10d,
    _fixed_circle, _moving_circle, _deforming_ellipse, _deforming_star,
)


def catalog() -> tuple:
    """All ten manufactured problems."""
    return tuple(b() for b in _BUILDERS)


def get(name: str) -> ProblemSpec:
    for b in _BUILDERS:
        p = b()
        if p.name == name:
            return p
    names = ", ".join(b().name for b in _BUILDERS)
    raise KeyError(f"unknown problem {name!r}; expected one of: {names}")


def names() -> tuple:
    return tuple(b().name for b in _BUILDERS)


# ---------------------------------------------------------------------------
# point-wise operations


def _normalize_region(region) -> int:
    if isinstance(region, RegionLabel):
        if region is RegionLabel.OMEGA1:
            return 1
        if region is RegionLabel.OMEGA2:
            return 2
        raise ValueError("a bulk region is required, not the interface")
    region = int(region)
    if region not in (1, 2):
        raise ValueError("region must be 1 or 2")
    return region


def region_of(problem: ProblemSpec, X, T=None) -> np.ndarray:
    """int8 labels (1/2, 0 on the interface) at the points' own times."""
    t = T if T is not None else 0.0
    return classify_batch(problem.interface, X, t, problem.omega1_side)


def exact(problem: ProblemSpec, region, x, t: Optional[float] = None) -> float:
    """Exact solution of one region at a single point (must lie in its closure)."""
    region = _normalize_region(region)
    x = np.asarray(x, dtype=float)
    label = classify(problem.interface, x, t if t is not None else 0.0, problem.omega1_side)
    if label is not RegionLabel.ON_INTERFACE and label is not (
            RegionLabel.OMEGA1 if region == 1 else RegionLabel.OMEGA2):
        raise ValueError(f"point {x} is not in the closure of region {region}")
    T = None if t is None else np.array([float(t)])
    return float(problem.exact(region, x[None, :], T)[0])


def source(problem: ProblemSpec, region, x, t: Optional[float] = None) -> float:
    """Source term of one region at a single point."""
    region = _normalize_region(region)
    x = np.asarray(x, dtype=float)
    T = None if t is None else np.array([float(t)])
    return float(problem.source(region, x[None, :], T)[0])


def jump_data(problem: ProblemSpec, p, t: Optional[float] = None):
    """(g1, g2) at an on-interface point, from the exact solutions and normal."""
    p = np.asarray(p, dtype=float)
    tv = 0.0 if t is None else float(t)
    if classify(problem.interface, p, tv, problem.omega1_side) is not RegionLabel.ON_INTERFACE:
        raise ValueError("jump data is only defined on the interface")
    P = p[None, :]
    T = None if not problem.parabolic else np.array([tv])
    g1v, g2v = jump_data_batch(problem, P, T)
    return float(g1v[0]), float(g2v[0])


def jump_data_batch(problem: ProblemSpec, P: np.ndarray, T=None):
    """Vectorized (g1, g2) on interface points (one shared or per-point time)."""
    if problem.parabolic and T is None:
        raise ValueError("parabolic problems need interface times")
    g1v = problem.exact(1, P, T) - problem.exact(2, P, T)
    if T is None:
        normals = interface_normals(problem.interface, P, 0.0, problem.omega1_side)
    else:
        normals = np.empty_like(P)
        for tv in np.unique(np.asarray(T, dtype=float)):
            sel = np.asarray(T) == tv
            normals[sel] = interface_normals(problem.interface, P[sel], float(tv),
                                             problem.omega1_side)
    flux1 = problem.beta1 * np.sum(problem.grad(1, P, T) * normals, axis=1)
    flux2 = problem.beta2 * np.sum(problem.grad(2, P, T) * normals, axis=1)
    return g1v, flux1 - flux2


def boundary_data(problem: ProblemSpec, X: np.ndarray, T, regions: np.ndarray) -> np.ndarray:
    """Dirichlet data: trace of the exact solution of the owning region."""
    out = np.empty(len(X))
    for r in (1, 2):
        sel = regions == r
        if np.any(sel):
            out[sel] = problem.exact(r, X[sel], None if T is None else T[sel])
    return out


def initial_data(problem: ProblemSpec, X: np.ndarray, regions: np.ndarray) -> np.ndarray:
    """Initial state at t = 0: the exact solution, region-routed."""
    T0 = np.zeros(len(X))
    return boundary_data(problem, X, T0, regions)


def describe(problem: ProblemSpec) -> str:
    """One structured text block of problem metadata."""
    kind = problem.interface.kind
    lines = [
        f"problem:   {problem.name}",
        f"type:      {'parabolic' if problem.parabolic else 'elliptic'}  (d = {problem.dim})",
        f"domain:    " + " x ".join(f"[{lo:g}, {hi:g}]" for lo, hi in problem.domain)
        + (f"  (outer boundary: polar curve r0={problem.outer_curve.r0:g},"
           f" r1={problem.outer_curve.r1:g}, lobes={problem.outer_curve.lobes})"
           if problem.outer_curve else ""),
        f"interface: {type(kind).__name__} {kind}",
        f"motion:    {type(problem.interface.motion).__name__}",
        f"region 1:  {problem.omega1_side.value}",
        f"beta:      beta1={problem.beta1:g}, beta2={problem.beta2:g}",
    ]
    if problem.parabolic:
        lines.append(f"horizon:   T={problem.horizon:g}")
    return "\n".join(lines)
