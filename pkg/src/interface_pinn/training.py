"""Training: composite loss over a collocation bundle, Adam, validation metrics.

The total loss couples the two subdomain networks:

    total = w_pde1 * pde1 + w_pde2 * pde2 + (w_bc1 * bc1 + w_bc2 * bc2)
          + gamma1 * ifc_jump + gamma2 * ifc_flux + w_init * init

with mean-square residual components

    pde_i     |d_t u_i - beta_i lap(u_i) - f|^2   (d_t term for parabolic only)
    bc_i      |u_i - gD|^2 over boundary points owned by region i
    ifc_jump  |u_1 - u_2 - g1|^2 on the interface
    ifc_flux  |beta1 grad(u_1).n - beta2 grad(u_2).n - g2| ^2
    init      |u_i - g0|^2 pooled over both regions' t=0 points

Optimization is full-batch Adam over the fixed collocation set.  Logged rows
store raw components except ``bc``, which folds in the two boundary weights
(one CSV column for both regions); the total is the weighted sum above.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from . import autodiff as ad
from . import network as net
from . import problems as prob
from . import sampling
from .geometry import distance_batch
from .network import ActivationMode, NetworkParams

VALIDATION_SEED_OFFSET = 10**6
VALIDATION_FACTOR = 4  # validation interior cloud = 4x training interior count

CSV_COLUMNS = ("step", "total", "pde1", "pde2", "bc", "ifc_jump", "ifc_flux",
               "init", "val_rel_l2")


@dataclass(frozen=True)
class LossWeights:
    w_pde1: float = 1.0
    w_pde2: float = 1.0
    w_bc1: float = 1.0
    w_bc2: float = 1.0
    w_init: float = 1.0
    gamma1: float = 1.0
    gamma2: float = 1.0

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"loss weight {name} must be finite and >= 0")


@dataclass
class TrainConfig:
    problem: str
    m_interior: int = 400
    m_boundary: int = 80
    m_interface: int = 50
    m_initial: int = 0  # parabolic only; 0 means "use m_boundary"
    strategy: str = "grid"
    sample_seed: int = 0
    init_seed: int = 0
    validation_seed: Optional[int] = None  # default: sample_seed + offset
    hidden: Tuple[int, ...] = (50, 50, 50)
    mode: ActivationMode = ActivationMode.MULTI
    gauss_gamma: float = 1.0
    weight_decay_rate: float = 10.0
    weights: LossWeights = field(default_factory=LossWeights)
    steps: int = 20000
    lr: float = 1e-3
    log_every: int = 500
    differentiate_weights: bool = False

    def resolved_validation_seed(self) -> int:
        if self.validation_seed is not None:
            return self.validation_seed
        return self.sample_seed + VALIDATION_SEED_OFFSET

    def resolved_m_initial(self) -> int:
        return self.m_initial if self.m_initial > 0 else self.m_boundary


@dataclass
class TrainRecord:
    rows: list  # dicts with CSV_COLUMNS keys
    params1: NetworkParams
    params2: NetworkParams
    wall_clock_s: float
    config: TrainConfig
    final_val_rel_l2: float

    def to_csv(self, path_or_buf) -> None:
        own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
        fh = open(path_or_buf, "w", newline="") if own else path_or_buf
        try:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for row in self.rows:
                w.writerow([row["step"]] + [f"{row[c]:.17g}" for c in CSV_COLUMNS[1:]])
        finally:
            if own:
                fh.close()

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


# ---------------------------------------------------------------------------
# loss-data preparation


def _split_time(problem: prob.ProblemSpec, X: np.ndarray):
    if problem.parabolic:
        return X[:, :-1], X[:, -1]
    return X, None


def _omega(problem: prob.ProblemSpec, X: np.ndarray, rate: float):
    sp, T = _split_time(problem, X)
    d = distance_batch(problem.interface, sp, T if T is not None else 0.0)
    w2 = np.exp(-rate * d)
    return 1.0 - w2, w2, d


def _omega_derivatives(problem: prob.ProblemSpec, X: np.ndarray, rate: float,
                       h: float = 1e-5):
    """(dw1, d2w1) of the blend weight by central differences of the distance.

    Points closer to the interface than 2h keep zero derivatives (the unsigned
    distance has a kink there); the time coordinate uses one-sided stencils at
    the horizon ends.
    """
    sp, T = _split_time(problem, X)
    n, din = X.shape
    dist = distance_batch(problem.interface, sp, T if T is not None else 0.0)
    w2 = np.exp(-rate * dist)
    dd = np.zeros((n, din))
    d2d = np.zeros((n, din))
    safe = dist > 2.0 * h

    def dist_at(Xs, Ts):
        return distance_batch(problem.interface, Xs, Ts if Ts is not None else 0.0)

    for i in range(sp.shape[1]):
        e = np.zeros(sp.shape[1])
        e[i] = h
        dp = dist_at(sp + e, T)
        dm = dist_at(sp - e, T)
        dd[:, i] = (dp - dm) / (2 * h)
        d2d[:, i] = (dp - 2 * dist + dm) / h**2
    if T is not None:
        tl = np.clip(T - h, 0.0, problem.horizon)
        tr = np.clip(T + h, 0.0, problem.horizon)
        span = tr - tl
        dp = dist_at(sp, tr)
        dm = dist_at(sp, tl)
        dd[:, -1] = (dp - dm) / span
        mid = dist_at(sp, 0.5 * (tl + tr))
        d2d[:, -1] = (dp - 2 * mid + dm) / (0.5 * span) ** 2
    dw2 = -rate * w2[:, None] * dd
    d2w2 = w2[:, None] * (rate**2 * dd**2 - rate * d2d)
    dw1 = np.where(safe[:, None], -dw2, 0.0)
    d2w1 = np.where(safe[:, None], -d2w2, 0.0)
    return dw1, d2w1


def _term_set(problem, X, data_values, rate, differentiate):
    w1, w2, _ = _omega(problem, X, rate)
    dw1 = d2w1 = None
    if differentiate:
        dw1, d2w1 = _omega_derivatives(problem, X, rate)
    return ad.TermSet(X, w1, w2, np.asarray(data_values, dtype=float), dw1, d2w1)


def prepare_loss_data(problem: prob.ProblemSpec, colloc: sampling.CollocationSet,
                      rate: float = 10.0, differentiate_weights: bool = False) -> ad.LossData:
    """Evaluate all data functions and blend weights once, up front."""

    def interior(X, region):
        sp, T = _split_time(problem, X)
        return _term_set(problem, X, problem.source(region, sp, T), rate,
                         differentiate_weights)

    def boundary(region):
        sel = colloc.boundary_regions == region
        X = colloc.boundary[sel]
        if len(X) == 0:
            return None
        sp, T = _split_time(problem, X)
        g = prob.boundary_data(problem, sp, T, np.full(len(X), region, dtype=np.int8))
        return _term_set(problem, X, g, rate, differentiate_weights)

    ifc_X = colloc.interface
    sp, T = _split_time(problem, ifc_X)
    w1, w2, _ = _omega(problem, ifc_X, rate)
    g1v, g2v = prob.jump_data_batch(problem, sp, T)
    normals = np.empty_like(sp)
    times = T if T is not None else np.zeros(len(sp))
    for tv in np.unique(times):
        sel = times == tv
        normals[sel] = prob.interface_normals(problem.interface, sp[sel], float(tv),
                                              problem.omega1_side)
    interface = ad.InterfaceSet(ifc_X, w1, w2, normals, g1v, g2v)
    if differentiate_weights:
        interface.dw1, interface.d2w1 = _omega_derivatives(problem, ifc_X, rate)

    init1 = init2 = None
    if colloc.initial is not None and len(colloc.initial):
        for region in (1, 2):
            sel = colloc.initial_regions == region
            X = colloc.initial[sel]
            if len(X) == 0:
                continue
            g0 = prob.initial_data(problem, X[:, :-1], np.full(len(X), region, dtype=np.int8))
            ts = _term_set(problem, X, g0, rate, differentiate_weights)
            if region == 1:
                init1 = ts
            else:
                init2 = ts

    return ad.LossData(
        spatial_dim=problem.dim, parabolic=problem.parabolic,
        beta1=problem.beta1, beta2=problem.beta2,
        interior1=interior(colloc.interior1, 1),
        interior2=interior(colloc.interior2, 2),
        interface=interface,
        boundary1=boundary(1), boundary2=boundary(2),
        initial1=init1, initial2=init2,
    )


def compute_loss(params1: NetworkParams, params2: NetworkParams, colloc_or_data,
                 problem: prob.ProblemSpec, weights: LossWeights = LossWeights(),
                 **kwargs):
    """(total, components) of the composite loss on a collocation set."""
    data = colloc_or_data
    if isinstance(colloc_or_data, sampling.CollocationSet):
        rate = kwargs.pop("rate", 10.0)
        data = prepare_loss_data(problem, colloc_or_data, rate=rate)
    return ad.loss_components(params1, params2, data, weights, **kwargs)


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    theta1: np.ndarray
    theta2: np.ndarray
    m1: np.ndarray
    v1: np.ndarray
    m2: np.ndarray
    v2: np.ndarray
    step: int = 0

    @classmethod
    def init(cls, theta1: np.ndarray, theta2: np.ndarray) -> "AdamState":
        return cls(theta1.copy(), theta2.copy(),
                   np.zeros_like(theta1), np.zeros_like(theta1),
                   np.zeros_like(theta2), np.zeros_like(theta2))


def adam_step(state: AdamState, grads, lr: float, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """One bias-corrected Adam update applied independently per parameter set."""
    g1, g2 = grads
    t = state.step + 1
    out = []
    for theta, m, v, g in ((state.theta1, state.m1, state.v1, g1),
                           (state.theta2, state.m2, state.v2, g2)):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        theta = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
        out.append((theta, m, v))
    (t1, m1, v1), (t2, m2, v2) = out
    return AdamState(t1, t2, m1, v1, m2, v2, t)


# ---------------------------------------------------------------------------
# validation metric


@dataclass
class ValidationSet:
    X: np.ndarray  # (N, d_in) network inputs (time column included if parabolic)
    regions: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    u_exact: np.ndarray


def make_validation(problem: prob.ProblemSpec, n: int, strategy: str, seed: int,
                    rate: float = 10.0) -> ValidationSet:
    if problem.parabolic:
        colloc = sampling.sample_spacetime(problem, n, 1, 1, 1, strategy, seed)
    else:
        colloc = sampling.sample_collocation(problem, n, 1, 1, strategy, seed)
    X = np.concatenate([colloc.interior1, colloc.interior2])
    regions = np.concatenate([np.ones(len(colloc.interior1), dtype=np.int8),
                              np.full(len(colloc.interior2), 2, dtype=np.int8)])
    w1, w2, _ = _omega(problem, X, rate)
    sp, T = _split_time(problem, X)
    u = np.empty(len(X))
    for r in (1, 2):
        sel = regions == r
        u[sel] = problem.exact(r, sp[sel], T[sel] if T is not None else None)
    return ValidationSet(X, regions, w1, w2, u)


def relative_l2(params1: NetworkParams, params2: NetworkParams,
                problem: prob.ProblemSpec, val: ValidationSet) -> float:
    """Monte Carlo relative L2 error over a region-routed evaluation cloud."""
    if len(val.X) == 0:
        raise ValueError("empty evaluation set")
    u_nn = np.empty(len(val.X))
    for r, params in ((1, params1), (2, params2)):
        sel = val.regions == r
        if np.any(sel):
            u_nn[sel] = net.forward_batch(params, val.X[sel], val.w1[sel], val.w2[sel])
    denom = float(np.sqrt(np.sum(val.u_exact**2)))
    if denom == 0.0:
        raise ValueError("exact solution has zero norm on the evaluation set")
    return float(np.sqrt(np.sum((u_nn - val.u_exact) ** 2)) / denom)


# ---------------------------------------------------------------------------
# training loop


def train(problem_or_name, config: TrainConfig) -> TrainRecord:
    """Full-batch Adam on a fixed collocation set; deterministic given seeds."""
    problem = (prob.get(problem_or_name) if isinstance(problem_or_name, str)
               else problem_or_name)
    t0 = time.perf_counter()
    colloc = sampling.sample_collocation(
        problem, config.m_interior, config.m_boundary, config.m_interface,
        config.strategy, config.sample_seed,
        m_initial=config.resolved_m_initial() if problem.parabolic else 0)
    data = prepare_loss_data(problem, colloc, rate=config.weight_decay_rate,
                             differentiate_weights=config.differentiate_weights)
    val = make_validation(problem, VALIDATION_FACTOR * config.m_interior,
                          config.strategy, config.resolved_validation_seed(),
                          rate=config.weight_decay_rate)

    d_in = problem.dim + (1 if problem.parabolic else 0)
    p1 = net.initialize(d_in, config.hidden, config.mode, config.init_seed,
                        config.gauss_gamma, config.weight_decay_rate)
    p2 = net.initialize(d_in, config.hidden, config.mode, config.init_seed + 1,
                        config.gauss_gamma, config.weight_decay_rate)
    state = AdamState.init(net.pack(p1), net.pack(p2))

    rows = []

    def log_row(step, comps):
        rows.append({
            "step": step, "total": comps["total"], "pde1": comps["pde1"],
            "pde2": comps["pde2"], "bc": comps["bc"], "ifc_jump": comps["ifc_jump"],
            "ifc_flux": comps["ifc_flux"], "init": comps["init"],
            "val_rel_l2": relative_l2(p1, p2, problem, val),
        })

    for k in range(config.steps):
        g1, g2, total, comps = ad.loss_gradient(p1, p2, data, config.weights)
        if k % config.log_every == 0:
            log_row(k, comps)
        state = adam_step(state, (g1, g2), config.lr)
        p1 = net.unpack_like(p1, state.theta1)
        p2 = net.unpack_like(p2, state.theta2)

    _, comps = ad.loss_components(p1, p2, data, config.weights)
    log_row(config.steps, comps)
    return TrainRecord(rows, p1, p2, time.perf_counter() - t0, config,
                       rows[-1]["val_rel_l2"])


def summary_text(record: TrainRecord) -> str:
    """Structured run summary; the config echo allows byte-identical re-runs."""
    cfg = record.config
    lines = [
        f"final_val_rel_l2 = {record.final_val_rel_l2:.17g}",
        f"final_total_loss = {record.rows[-1]['total']:.17g}",
        f"wall_clock_s = {record.wall_clock_s:.3f}",
        "",
        "[config]",
        f"problem = {cfg.problem}",
        f"m_interior = {cfg.m_interior}",
        f"m_boundary = {cfg.m_boundary}",
        f"m_interface = {cfg.m_interface}",
        f"m_initial = {cfg.m_initial}",
        f"strategy = {cfg.strategy}",
        f"sample_seed = {cfg.sample_seed}",
        f"init_seed = {cfg.init_seed}",
        f"validation_seed = {cfg.resolved_validation_seed()}",
        f"hidden = {','.join(str(h) for h in cfg.hidden)}",
        f"activation_mode = {cfg.mode.value}",
        f"gauss_gamma = {cfg.gauss_gamma:.17g}",
        f"weight_decay_rate = {cfg.weight_decay_rate:.17g}",
        f"steps = {cfg.steps}",
        f"lr = {cfg.lr:.17g}",
        f"log_every = {cfg.log_every}",
        f"differentiate_weights = {str(cfg.differentiate_weights).lower()}",
    ]
    w = cfg.weights
    lines += [f"{k} = {getattr(w, k):.17g}" for k in
              ("w_pde1", "w_pde2", "w_bc1", "w_bc2", "w_init", "gamma1", "gamma2")]
    return "\n".join(lines) + "\n"
