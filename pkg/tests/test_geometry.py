import math

import numpy as np
import pytest

from interface_pinn import geometry as geo
from interface_pinn.geometry import (
    Ellipsoid,
    Hyperplane,
    InterfaceShape,
    Omega1Side,
    PolarCurve,
    RegionLabel,
    Sphere,
    StarDeforming,
    Static,
    Translate,
    TranslateAndDeform,
    TranslateRotateDeform,
    classify,
    classify_batch,
    distance,
    distance_batch,
    normal,
    sample_interface,
)

INSIDE = Omega1Side.INSIDE
OUTSIDE = Omega1Side.OUTSIDE
POSITIVE = Omega1Side.POSITIVE_HALF


def plane_x0():
    return InterfaceShape(Hyperplane(0, 0.0, ((-1.0, 1.0),)), dim=2)


def circle_15():
    return InterfaceShape(Sphere((1.5, 1.5), 1.0), dim=2)


def ellipse_25():
    return InterfaceShape(Ellipsoid((0.0, 0.0), (0.2, 0.5)), dim=2)


def sunflower():
    c = 0.02 * math.sqrt(5.0)
    return InterfaceShape(PolarCurve((c, c), 0.4, 0.2, 20, "sin", 1.0), dim=2)


def flower():
    return InterfaceShape(PolarCurve((0.0, 0.0), 0.4, 0.2, 5, "cos", -1.0), dim=2)


def hypersphere_10d():
    return InterfaceShape(Sphere(tuple([0.0] * 10), 0.5), dim=10)


def moving_star():
    base = PolarCurve((1.2, 1.2), 1.0, 0.0, 5, "cos", -1.0)
    return InterfaceShape(StarDeforming(base, 0.3), dim=2,
                          motion=TranslateRotateDeform((0.8, 0.8), 2.0 * math.pi),
                          horizon=1.0)


def surface_cloud(shape, n, t=0.0):
    """Brute-force oracle support: n surface points by parametrization."""
    return sample_interface(shape, n, t, rng_seed=123)


def oracle_distance(shape, x, t=0.0, n=200_000):
    """Dense surface sweep plus golden-section refinement on the best cell.

    Independent of the production code path: uses only the parametric map
    through sample_interface with a dense *grid* parameter sweep.
    """
    kind = shape.kind
    x = np.asarray(x, dtype=float)
    if isinstance(kind, Hyperplane):
        return abs(x[kind.axis] - kind.offset)
    if isinstance(kind, Sphere) and shape.dim > 2:
        c = np.asarray(kind.center)
        return abs(np.linalg.norm(x - c) - kind.radius)
    pts = sample_interface(shape, n, t, rng_seed=0, strategy="grid")
    d2 = ((pts - x) ** 2).sum(axis=1)
    k = int(np.argmin(d2))
    # refine on the bracketing parameter cell
    h = 2.0 * math.pi / n
    th0 = (k + 0.5) * h

    def f(th):
        p = _param_point(shape, th, t)
        return float(((p - x) ** 2).sum())

    lo, hi = th0 - h, th0 + h
    gold = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = hi - gold * (hi - lo), lo + gold * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > 1e-12:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - gold * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + gold * (hi - lo)
            f2 = f(x2)
    return math.sqrt(f(0.5 * (lo + hi)))


def _param_point(shape, theta, t):
    """One surface point at angle theta (2D closed shapes only)."""
    center, phi, kind = geo._frame(shape, t)
    if isinstance(kind, Sphere):
        body = kind.radius * np.array([math.cos(theta), math.sin(theta)])
    elif isinstance(kind, Ellipsoid):
        a = np.asarray(kind.semi_axes)
        body = a * np.array([math.cos(theta), math.sin(theta)])
    else:
        r = geo._curve_radius(kind, theta)
        body = np.array([r * math.cos(theta), r * math.sin(theta)])
    return geo._vec_to_world(body, phi) + center


# ---------------------------------------------------------------------------
# distance


def test_distance_hyperplane():
    assert distance(plane_x0(), [0.3, -0.5]) == pytest.approx(0.3, abs=1e-15)


def test_distance_sphere_center():
    assert distance(circle_15(), [1.5, 1.5]) == pytest.approx(1.0, abs=1e-15)


def test_distance_ellipse_on_axis():
    # exterior point on the minor axis: nearest point is the vertex (0.2, 0)
    d = distance(ellipse_25(), [0.4, 0.0])
    assert d == pytest.approx(0.2, abs=1e-10)
    assert d == pytest.approx(oracle_distance(ellipse_25(), [0.4, 0.0]), abs=1e-8)


def test_distance_hypersphere_origin():
    assert distance(hypersphere_10d(), [0.0] * 10) == pytest.approx(0.5, abs=1e-15)


def test_distance_rejects_dim_mismatch():
    with pytest.raises(ValueError):
        distance(circle_15(), [1.0, 2.0, 3.0])


def test_distance_rejects_time_outside_horizon():
    with pytest.raises(ValueError):
        distance(moving_star(), [1.0, 1.0], t=2.0)


def test_distance_oracle_equivalence():
    rng = np.random.default_rng(7)
    shapes = [ellipse_25(), sunflower(), flower(), moving_star()]
    times = [0.0, 0.0, 0.0, 0.5]
    for shape, t in zip(shapes, times):
        X = rng.uniform(-1.4, 1.4, size=(25, 2))
        if isinstance(shape.kind, StarDeforming):
            X = X + 1.2  # keep queries near the translated star
        for x in X:
            assert distance(shape, x, t) == pytest.approx(oracle_distance(shape, x, t), abs=1e-6)


def test_distance_batch_matches_scalar():
    shape = sunflower()
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 1, size=(50, 2))
    db = distance_batch(shape, X)
    ds = np.array([distance(shape, x) for x in X])
    np.testing.assert_allclose(db, ds, atol=1e-9)


def test_ellipsoid_interior_points_with_zero_components():
    # interior point on the long axis inside the evolute: off-axis foot wins
    ell = InterfaceShape(Ellipsoid((0.0, 0.0), (2.0, 1.0)), dim=2)
    d = distance(ell, [0.1, 0.0])
    assert d == pytest.approx(oracle_distance(ell, [0.1, 0.0], n=400_000), abs=1e-8)
    assert d < 1.9  # strictly better than the vertex at (2, 0)


def test_ellipsoid_projection_consistency():
    rng = np.random.default_rng(11)
    for axes in [(0.2, 0.5), (0.7, 0.5, 0.3)]:
        a = np.asarray(axes)
        for _ in range(50):
            y = rng.uniform(-1, 1, size=len(axes))
            p = geo._ellipsoid_foot(y, a)
            assert abs(np.sum((p / a) ** 2) - 1.0) <= 1e-10
            # (y - p) parallel to the surface gradient p / a^2
            g = p / a**2
            if len(axes) == 2:
                cross = abs((y - p)[0] * g[1] - (y - p)[1] * g[0])
            else:
                cross = np.linalg.norm(np.cross(y - p, g))
            assert cross <= 1e-6 * max(1.0, np.linalg.norm(y - p) * np.linalg.norm(g))


def test_motion_consistency_translation():
    sph0 = InterfaceShape(Sphere((1.2, 1.2), 1.0), dim=2)
    mov = InterfaceShape(Sphere((1.2, 1.2), 1.0), dim=2, motion=Translate((1.0, 1.0)), horizon=1.0)
    rng = np.random.default_rng(5)
    for t in (0.0, 0.3, 1.0):
        for x in rng.uniform(0, 3.5, size=(20, 2)):
            assert distance(mov, x, t) == pytest.approx(
                distance(sph0, x - np.array([1.0, 1.0]) * t), abs=1e-12)


def test_deforming_ellipse_axes():
    ell = InterfaceShape(Ellipsoid((1.2, 1.2), (1.0, 1.0)), dim=2,
                         motion=TranslateAndDeform((0.8, 0.8), (0.1, -0.1)), horizon=1.0)
    t = 1.0
    cx = 1.2 + 0.8 * t
    a, b = math.sqrt(1.1), math.sqrt(0.9)
    # the semi-axis tips are on the interface
    assert distance(ell, [cx + a, cx], t) <= 1e-10
    assert distance(ell, [cx, cx + b], t) <= 1e-10


# ---------------------------------------------------------------------------
# normal


def test_normal_sphere_orientation():
    sph = circle_15()
    np.testing.assert_allclose(normal(sph, [2.5, 1.5], 0.0, OUTSIDE), [-1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(normal(sph, [2.5, 1.5], 0.0, INSIDE), [1.0, 0.0], atol=1e-12)


def test_normal_hyperplane():
    np.testing.assert_allclose(normal(plane_x0(), [0.0, 0.7], 0.0, POSITIVE), [-1.0, 0.0], atol=1e-15)


def test_normal_flower_matches_level_function_gradient():
    # oracle: central differences of the implicit level rho - r(theta)
    shape = flower()
    p = np.array([0.2, 0.0])

    def level(x):
        y = x - np.array(shape.kind.center)
        th = math.atan2(y[1], y[0])
        return np.hypot(y[0], y[1]) - float(geo._curve_radius(shape.kind, th))

    h = 1e-6
    grad = np.array([
        (level(p + [h, 0]) - level(p - [h, 0])) / (2 * h),
        (level(p + [0, h]) - level(p - [0, h])) / (2 * h),
    ])
    grad /= np.linalg.norm(grad)
    np.testing.assert_allclose(normal(shape, p, 0.0, INSIDE), grad, atol=1e-6)


def test_normal_is_unit_and_antisymmetric():
    rng = np.random.default_rng(13)
    for shape, t in [(circle_15(), 0.0), (ellipse_25(), 0.0), (sunflower(), 0.0),
                     (flower(), 0.0), (moving_star(), 0.5)]:
        for p in sample_interface(shape, 20, t, rng_seed=int(rng.integers(1 << 30))):
            n_in = normal(shape, p, t, INSIDE)
            n_out = normal(shape, p, t, OUTSIDE)
            assert np.linalg.norm(n_in) == pytest.approx(1.0, abs=1e-12)
            np.testing.assert_array_equal(n_in, -n_out)


def test_normal_rejects_off_interface_point():
    with pytest.raises(ValueError):
        normal(circle_15(), [1.5, 1.5], 0.0, INSIDE)


# ---------------------------------------------------------------------------
# classify


def test_classify_examples():
    assert classify(circle_15(), [1.5, 1.5], 0.0, OUTSIDE) is RegionLabel.OMEGA2
    assert classify(plane_x0(), [0.5, 0.0], 0.0, POSITIVE) is RegionLabel.OMEGA1
    assert classify(ellipse_25(), [0.2, 0.0], 0.0, INSIDE) is RegionLabel.ON_INTERFACE


def test_classify_batch_matches_scalar():
    shape = sunflower()
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, size=(200, 2))
    got = classify_batch(shape, X, 0.0, INSIDE)
    want = np.array([1 if classify(shape, x, 0.0, INSIDE) is RegionLabel.OMEGA1 else 2 for x in X])
    np.testing.assert_array_equal(got, want)


def test_classification_partition_area():
    # Monte Carlo area reconstruction within 1% for closed 2D shapes
    rng = np.random.default_rng(19)
    X = rng.uniform(-1.0, 1.0, size=(400_000, 2))
    box_area = 4.0
    cases = [
        (circle_15(), math.pi * 1.0**2, np.array([1.5, 1.5]) + X),  # recentered box
        (sunflower(), math.pi * (0.4**2 + 0.2**2 / 2.0), X),
        (flower(), math.pi * (0.4**2 + 0.2**2 / 2.0), X),
    ]
    for shape, area_true, pts in cases:
        lab = classify_batch(shape, pts, 0.0, INSIDE)
        assert np.all((lab == 1) | (lab == 2))
        area_mc = box_area * np.mean(lab == 1)
        assert area_mc == pytest.approx(area_true, rel=0.01)


# ---------------------------------------------------------------------------
# sample_interface


def test_sample_circle_residual():
    P = sample_interface(circle_15(), 100, 0.0, rng_seed=0)
    res = np.abs(np.linalg.norm(P - [1.5, 1.5], axis=1) - 1.0)
    assert res.max() <= 1e-12


def test_sample_hypersphere_residual():
    P = sample_interface(hypersphere_10d(), 200, 0.0, rng_seed=1)
    assert np.abs(np.linalg.norm(P, axis=1) - 0.5).max() <= 1e-12


def test_sample_star_satisfies_implicit_equation():
    shape = moving_star()
    t = 0.5
    P = sample_interface(shape, 100, t, rng_seed=4)
    # invert the parametric map: rotate back, subtract the translated center
    c = np.array([1.2 + 0.8 * t, 1.2 + 0.8 * t])
    phi = 2.0 * math.pi * t
    R_inv = np.array([[math.cos(phi), math.sin(phi)], [-math.sin(phi), math.cos(phi)]])
    Y = (P - c) @ R_inv.T
    theta = np.arctan2(Y[:, 1], Y[:, 0])
    r_expect = 1.0 - 0.3 * t * np.cos(5 * theta)
    assert np.abs(np.hypot(Y[:, 0], Y[:, 1]) - r_expect).max() <= 1e-8
    assert distance_batch(shape, P, t).max() <= 1e-8


def test_sample_is_deterministic():
    a = sample_interface(sunflower(), 64, 0.0, rng_seed=9)
    b = sample_interface(sunflower(), 64, 0.0, rng_seed=9)
    np.testing.assert_array_equal(a, b)


def test_sample_hyperplane_needs_extent():
    bare = InterfaceShape(Hyperplane(0, 0.0), dim=2)
    with pytest.raises(ValueError):
        sample_interface(bare, 10, 0.0, 0)
    P = sample_interface(plane_x0(), 10, 0.0, 0)
    assert np.all(P[:, 0] == 0.0)
    assert np.all((P[:, 1] > -1) & (P[:, 1] < 1))
