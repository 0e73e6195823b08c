"""Collocation sampling: interior, boundary, interface and initial point sets.

Two strategies: cell-centered uniform grids ("grid") and Latin-hypercube
("lhs").  Every sampler is deterministic given its seed; sub-streams for the
individual point families are spawned from one SeedSequence so the families
are independent yet reproducible.

Interior candidates are generated on the bounding box, then filtered: points
inside the on-interface tolerance band are discarded (never projected), as
are points outside a curved outer boundary and points on the box faces.
Reported counts are post-filter.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import geometry
from .geometry import ON_INTERFACE_TOL, classify_batch, sample_interface
from .problems import ProblemSpec

STRATEGIES = ("grid", "lhs")
N_TIME_SLICES = 10  # structured space-time slices t_k = k T / 10, k = 1..10


@dataclass
class CollocationSet:
    """Sampled point families; columns are x1..xd plus a trailing time column
    for parabolic problems (initial points carry t = 0)."""

    interior1: np.ndarray
    interior2: np.ndarray
    boundary: np.ndarray
    boundary_regions: np.ndarray
    interface: np.ndarray
    initial: Optional[np.ndarray]
    initial_regions: Optional[np.ndarray]
    seed: int
    strategy: str

    @property
    def m_interior(self) -> int:
        return len(self.interior1) + len(self.interior2)


def _check_strategy(strategy: str) -> str:
    key = {"grid": "grid", "lhs": "lhs", "latin_hypercube": "lhs"}.get(strategy)
    if key is None:
        raise ValueError(f"unknown strategy {strategy!r}; use one of {STRATEGIES}")
    return key


def latin_hypercube(n: int, bounds, rng: np.random.Generator) -> np.ndarray:
    """One sample per stratum per coordinate, independently permuted."""
    bounds = np.asarray(bounds, dtype=float)
    d = len(bounds)
    u = (np.arange(n)[:, None] + rng.uniform(size=(n, d))) / n
    for i in range(d):
        u[:, i] = u[rng.permutation(n), i]
    return bounds[:, 0] + u * (bounds[:, 1] - bounds[:, 0])


def centered_grid(m_total: int, bounds) -> np.ndarray:
    """Cell-centered grid with round(m_total^(1/d)) cells per axis."""
    bounds = np.asarray(bounds, dtype=float)
    d = len(bounds)
    n_side = max(1, round(m_total ** (1.0 / d)))
    axes = [lo + (np.arange(n_side) + 0.5) * (hi - lo) / n_side for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _inside_outer_curve(problem: ProblemSpec, X: np.ndarray, margin: float = 1e-8) -> np.ndarray:
    if problem.outer_curve is None:
        return np.ones(len(X), dtype=bool)
    c = problem.outer_curve
    y = X - np.asarray(c.center)
    theta = np.arctan2(y[:, 1], y[:, 0])
    return np.hypot(y[:, 0], y[:, 1]) < geometry._curve_radius(c, theta) - margin


def _off_box_faces(X: np.ndarray, bounds, tol: float = 1e-10) -> np.ndarray:
    bounds = np.asarray(bounds, dtype=float)
    ok = np.ones(len(X), dtype=bool)
    for i, (lo, hi) in enumerate(bounds):
        ok &= (X[:, i] - lo > tol) & (hi - X[:, i] > tol)
    return ok


# ---------------------------------------------------------------------------
# elliptic samplers


def sample_interior(problem: ProblemSpec, m_total: int, strategy: str,
                    seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """(region-1 points, region-2 points) for an elliptic problem."""
    if m_total < 2:
        raise ValueError("need at least two interior points")
    strategy = _check_strategy(strategy)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    if strategy == "grid":
        X = centered_grid(m_total, problem.domain)
    else:
        X = latin_hypercube(m_total, problem.domain, rng)
    keep = _off_box_faces(X, problem.domain) & _inside_outer_curve(problem, X)
    X = X[keep]
    lab = classify_batch(problem.interface, X, 0.0, problem.omega1_side)
    pts1, pts2 = X[lab == 1], X[lab == 2]
    if len(pts1) == 0 or len(pts2) == 0:
        raise ValueError(f"a region received no interior points "
                         f"({len(pts1)}/{len(pts2)} of {m_total} requested)")
    return pts1, pts2


def _face_grid_counts(m: int, n_faces: int) -> list:
    base = m // n_faces
    counts = [base] * n_faces
    for i in range(m - base * n_faces):
        counts[i] += 1
    return counts


def _points_on_face(problem: ProblemSpec, axis: int, side: int, k: int,
                    strategy: str, rng: np.random.Generator) -> np.ndarray:
    bounds = np.asarray(problem.domain, dtype=float)
    d = len(bounds)
    pts = np.empty((k, d))
    pts[:, axis] = bounds[axis, side]
    free = [i for i in range(d) if i != axis]
    if strategy == "grid" and d == 2:
        lo, hi = bounds[free[0]]
        pts[:, free[0]] = lo + (np.arange(k) + 0.5) * (hi - lo) / k
    elif strategy == "grid":
        # no integer-sided grid exists for arbitrary k in d-1 >= 2 face dims;
        # stratify with a face-local Latin hypercube instead
        pts[:, free] = latin_hypercube(k, bounds[free], rng)
    else:
        pts[:, free] = latin_hypercube(k, bounds[free], rng)
    return pts


def sample_boundary(problem: ProblemSpec, m: int, strategy: str,
                    seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """(points, region tags) on the outer boundary of an elliptic problem."""
    if m < 1:
        raise ValueError("need at least one boundary point")
    strategy = _check_strategy(strategy)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    X = _boundary_positions(problem, m, strategy, rng)
    lab = classify_batch(problem.interface, X, 0.0, problem.omega1_side)
    keep = lab != 0  # drop points inside the interface tolerance band
    X, lab = X[keep], lab[keep]
    return X, lab


def _boundary_positions(problem: ProblemSpec, m: int, strategy: str,
                        rng: np.random.Generator, t: Optional[float] = None) -> np.ndarray:
    if problem.outer_curve is not None:
        if strategy == "grid":
            theta = (np.arange(m) + 0.5) * 2.0 * math.pi / m
        else:
            theta = rng.uniform(0.0, 2.0 * math.pi, size=m)
        c = problem.outer_curve
        r = geometry._curve_radius(c, theta)
        return np.asarray(c.center) + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    bounds = np.asarray(problem.domain, dtype=float)
    d = len(bounds)
    if strategy == "grid":
        counts = _face_grid_counts(m, 2 * d)
        faces = [(axis, side) for axis in range(d) for side in (0, 1)]
        chunks = [_points_on_face(problem, ax, sd, k, strategy, rng)
                  for (ax, sd), k in zip(faces, counts) if k > 0]
        return np.concatenate(chunks)
    # random placement: area-weighted face choice
    widths = bounds[:, 1] - bounds[:, 0]
    areas = np.array([np.prod(np.delete(widths, ax)) for ax in range(d) for _ in (0, 1)])
    face_idx = rng.choice(2 * d, size=m, p=areas / areas.sum())
    X = np.empty((m, d))
    for fi in range(2 * d):
        sel = face_idx == fi
        if np.any(sel):
            X[sel] = _points_on_face(problem, fi // 2, fi % 2, int(sel.sum()), strategy, rng)
    return X


def interface_points(problem: ProblemSpec, m: int, strategy: str, seed: int,
                     t: float = 0.0) -> np.ndarray:
    return sample_interface(problem.interface, m, t, rng_seed=seed,
                            strategy="grid" if strategy == "grid" else "random")


def sample_collocation(problem: ProblemSpec, m_interior: int, m_boundary: int,
                       m_interface: int, strategy: str, seed: int,
                       m_initial: int = 0) -> CollocationSet:
    """Full collocation bundle for one problem (routes by problem type)."""
    strategy = _check_strategy(strategy)
    if problem.parabolic:
        return sample_spacetime(problem, m_interior, m_boundary, m_interface,
                                m_initial, strategy, seed)
    ss = np.random.SeedSequence(seed).spawn(3)
    pts1, pts2 = sample_interior(problem, m_interior, strategy, seed)
    bnd, bnd_lab = sample_boundary(problem, m_boundary, strategy,
                                   int(ss[1].generate_state(1)[0]))
    ifc = interface_points(problem, m_interface, strategy,
                           int(ss[2].generate_state(1)[0]))
    return CollocationSet(pts1, pts2, bnd, bnd_lab, ifc, None, None, seed, strategy)


# ---------------------------------------------------------------------------
# parabolic (space-time) sampler


def _structured_times(horizon: float) -> np.ndarray:
    return horizon * np.arange(1, N_TIME_SLICES + 1) / N_TIME_SLICES


def _slice_counts(m: int, strategy: str) -> Tuple[list, int]:
    """Counts per structured slice and the number of random-time points."""
    n_struct = m if strategy == "grid" else m - m // 2
    per = _face_grid_counts(n_struct, N_TIME_SLICES)
    return per, m - n_struct


def sample_spacetime(problem: ProblemSpec, m_interior: int, m_boundary: int,
                     m_interface: int, m_initial: int, strategy: str,
                     seed: int) -> CollocationSet:
    if not problem.parabolic:
        raise ValueError("space-time sampling needs a parabolic problem")
    if m_initial < 1:
        raise ValueError("parabolic problems need initial points (m_initial >= 1)")
    strategy = _check_strategy(strategy)
    T = problem.horizon
    ss = np.random.SeedSequence(seed).spawn(5)
    rngs = [np.random.default_rng(s) for s in ss]

    # interior: sample the (d+1)-dimensional box, classify at each point's time
    bounds_xt = tuple(problem.domain) + ((0.0, T),)
    if strategy == "grid":
        Xt = centered_grid(m_interior, bounds_xt)
    else:
        Xt = latin_hypercube(m_interior, bounds_xt, rngs[0])
    Xt = Xt[Xt[:, -1] > 1e-12]
    keep = _off_box_faces(Xt[:, :-1], problem.domain)
    Xt = Xt[keep]
    lab = classify_batch(problem.interface, Xt[:, :-1], Xt[:, -1], problem.omega1_side)
    int1, int2 = Xt[lab == 1], Xt[lab == 2]
    if len(int1) == 0 or len(int2) == 0:
        raise ValueError("a region received no space-time interior points")

    # interface: structured time slices plus uniform random times
    per_slice, n_rand = _slice_counts(m_interface, strategy)
    chunks = []
    for k, (t_k, n_k) in enumerate(zip(_structured_times(T), per_slice)):
        if n_k > 0:
            P = sample_interface(problem.interface, n_k, float(t_k),
                                 rng_seed=int(ss[1].generate_state(2)[0]) + k,
                                 strategy="grid" if strategy == "grid" else "random")
            chunks.append(np.column_stack([P, np.full(n_k, t_k)]))
    for t_r in rngs[1].uniform(0.0, T, size=n_rand):
        P = sample_interface(problem.interface, 1, float(t_r),
                             rng_seed=int(rngs[1].integers(1 << 62)))
        chunks.append(np.column_stack([P, [t_r]]))
    ifc = np.concatenate(chunks)

    # boundary: same temporal mix, spatial positions on the box faces
    per_slice_b, n_rand_b = _slice_counts(m_boundary, strategy)
    chunks = []
    for t_k, n_k in zip(_structured_times(T), per_slice_b):
        if n_k > 0:
            B = _boundary_positions(problem, n_k, strategy, rngs[2])
            chunks.append(np.column_stack([B, np.full(n_k, t_k)]))
    if n_rand_b:
        B = _boundary_positions(problem, n_rand_b, "lhs", rngs[2])
        chunks.append(np.column_stack([B, rngs[2].uniform(0.0, T, size=n_rand_b)]))
    bnd = np.concatenate(chunks)
    bnd_lab = classify_batch(problem.interface, bnd[:, :-1], bnd[:, -1], problem.omega1_side)
    ok = bnd_lab != 0
    bnd, bnd_lab = bnd[ok], bnd_lab[ok]

    # initial points at t = 0 over the spatial box
    if strategy == "grid":
        X0 = centered_grid(m_initial, problem.domain)
    else:
        X0 = latin_hypercube(m_initial, problem.domain, rngs[3])
    X0 = X0[_off_box_faces(X0, problem.domain)]
    lab0 = classify_batch(problem.interface, X0, 0.0, problem.omega1_side)
    X0, lab0 = X0[lab0 != 0], lab0[lab0 != 0]
    init = np.column_stack([X0, np.zeros(len(X0))])

    return CollocationSet(int1, int2, bnd, bnd_lab, ifc, init, lab0, seed, strategy)


# ---------------------------------------------------------------------------
# CSV export


def to_csv(colloc: CollocationSet, path, dim: int) -> None:
    """Dump all families: columns x1..xd[,t],set_tag,region (region 0 = on interface)."""
    has_time = colloc.interface.shape[1] > dim
    cols = [f"x{i + 1}" for i in range(dim)] + (["t"] if has_time else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols + ["set_tag", "region"])

        def rows(X, tag, regions):
            for i in range(len(X)):
                writer.writerow([f"{v:.17g}" for v in X[i]] + [tag, int(regions[i])])

        rows(colloc.interior1, "interior", np.ones(len(colloc.interior1)))
        rows(colloc.interior2, "interior", np.full(len(colloc.interior2), 2))
        rows(colloc.boundary, "boundary", colloc.boundary_regions)
        rows(colloc.interface, "interface", np.zeros(len(colloc.interface)))
        if colloc.initial is not None:
            rows(colloc.initial, "initial", colloc.initial_regions)
