"""Derivative engine for the subdomain networks.

Input derivatives (gradient, Laplacian, time derivative) are obtained by
second-order forward jet propagation: alongside each hidden state we carry,
per input coordinate, the first and the pure (diagonal) second derivative.
Affine maps act row-wise on this bundle; the blended activation applies the
scalar chain rule per component, which is exact because layers are affine
maps followed by elementwise nonlinearities (no off-diagonal terms are ever
needed for the Laplacian).

Parameter gradients come from reverse accumulation over a tape recorded
during the jet propagation, so losses may mix values, gradients, Laplacians
and time derivatives freely.  The reverse pass therefore needs activation
derivatives one order higher than the forward pass (up to the third).

The jet bundle is stored as S with shape (R, N, m): row 0 the value, rows
1..din the first derivatives, rows 1+din..2*din the second derivatives.
All arithmetic is float64.

Blend weights w1, w2 are per-point constants by default (the "frozen"
contract): input derivatives differentiate only the tanh/Gaussian branches.
Passing per-point derivative arrays (dw1, d2w1) of the blend weight enables
the fully-differentiated alternative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .network import ActivationMode, NetworkParams, pack, param_count, weight_functions

VALUE, GRAD, JET = "value", "grad", "jet"


@dataclass
class Jet:
    """Value, spatial gradient, Laplacian and (optionally) time derivative."""

    value: float
    grad: np.ndarray
    lap: float
    dt: Optional[float] = None


@dataclass
class JetBatch:
    value: np.ndarray  # (N,)
    grad: Optional[np.ndarray]  # (N, spatial) or None when not propagated
    lap: Optional[np.ndarray]  # (N,)
    dt: Optional[np.ndarray]  # (N,) for space-time inputs


@dataclass
class _LayerTape:
    s_in: np.ndarray
    lin_t: np.ndarray
    lin_g: Optional[np.ndarray]
    t: np.ndarray
    t1: np.ndarray
    e: Optional[np.ndarray]
    g1: Optional[np.ndarray]


@dataclass
class _Tape:
    layers: List[_LayerTape]
    s_last: np.ndarray
    rows: int
    din: int
    spatial: int
    w1: Optional[np.ndarray]  # (N, 1) or None in tanh-only mode
    w2: Optional[np.ndarray]
    dw1: Optional[np.ndarray]  # (N, din) blend-weight first derivatives
    d2w1: Optional[np.ndarray]


def _rows_for(need: str, din: int) -> int:
    if need == VALUE:
        return 1
    if need == GRAD:
        return 1 + din
    if need == JET:
        return 1 + 2 * din
    raise ValueError(f"unknown derivative level {need!r}")


def _lin(S: np.ndarray, W: np.ndarray) -> np.ndarray:
    r, n, m_in = S.shape
    return (S.reshape(r * n, m_in) @ W.T).reshape(r, n, W.shape[0])


def forward_jets(params: NetworkParams, X: np.ndarray, w1=None, w2=None,
                 need: str = JET, spatial: Optional[int] = None,
                 dw1=None, d2w1=None, with_tape: bool = False):
    """Propagate the jet bundle through the network.

    X: (N, d_in) inputs, time appended as the last column for space-time nets
    (then ``spatial`` = d_in - 1).  Returns a JetBatch, plus the tape when
    ``with_tape`` (needed for backward()).
    """
    X = np.asarray(X, dtype=float)
    n, din = X.shape
    if din != params.d_in:
        raise ValueError(f"input size {din} != network d_in {params.d_in}")
    spatial = din if spatial is None else spatial
    rows = _rows_for(need, din)
    multi = params.mode is ActivationMode.MULTI
    if multi:
        if w1 is None or w2 is None:
            raise ValueError("multi-activation jets need blend weights")
        w1 = np.asarray(w1, dtype=float).reshape(n, 1)
        w2 = np.asarray(w2, dtype=float).reshape(n, 1)
    if dw1 is not None:
        dw1 = np.asarray(dw1, dtype=float).reshape(n, din)
        d2w1 = np.asarray(d2w1, dtype=float).reshape(n, din)

    S = np.zeros((rows, n, din))
    S[0] = X
    for i in range(min(rows - 1, din)):
        S[1 + i, :, i] = 1.0

    layers_tape: List[_LayerTape] = []
    gam = params.gauss_gamma
    for layer in params.layers:
        lin_t = _lin(S, layer.w_tanh)
        lin_t[0] += layer.b_tanh
        at = lin_t[0]
        t = np.tanh(at)
        t1 = 1.0 - t**2
        if multi:
            lin_g = _lin(S, layer.w_gauss)
            ag = lin_g[0]
            e = np.exp(-(ag**2) / gam)
            g1 = (-2.0 * ag / gam) * e
        else:
            lin_g = e = g1 = None

        out = np.empty((rows, n, layer.w_tanh.shape[0]))
        if multi:
            out[0] = w1 * t + w2 * e
        else:
            out[0] = t
        if rows > 1:
            jt = lin_t[1:1 + din]
            if multi:
                jg = lin_g[1:1 + din]
                out[1:1 + din] = w1 * t1 * jt + w2 * g1 * jg
                if dw1 is not None:
                    out[1:1 + din] += dw1.T[:, :, None] * (t - e)
            else:
                out[1:1 + din] = t1 * jt
        if rows > 1 + din:
            t2 = -2.0 * t * t1
            ht = lin_t[1 + din:]
            if multi:
                g2 = (4.0 * ag**2 / gam**2 - 2.0 / gam) * e
                hg = lin_g[1 + din:]
                out[1 + din:] = (w1 * (t2 * jt**2 + t1 * ht)
                                 + w2 * (g2 * jg**2 + g1 * hg))
                if dw1 is not None:
                    out[1 + din:] += (2.0 * dw1.T[:, :, None] * (t1 * jt - g1 * jg)
                                      + d2w1.T[:, :, None] * (t - e))
            else:
                out[1 + din:] = t2 * jt**2 + t1 * ht
        if with_tape:
            layers_tape.append(_LayerTape(S, lin_t, lin_g, t, t1, e, g1))
        S = out
        if not np.all(np.isfinite(S)):
            raise FloatingPointError(
                f"non-finite values in hidden layer {len(layers_tape)}")

    lin_o = np.einsum("rnm,m->rn", S, params.out_w)
    value = lin_o[0] + params.out_b
    grad = lin_o[1:1 + din].T if rows > 1 else None  # (n, din)
    lap = lin_o[1 + din:1 + din + spatial].sum(axis=0) if rows > 1 + din else None
    dt = None
    if spatial < din and rows > 1:
        dt = lin_o[din]  # first-derivative row of the time coordinate
    batch = JetBatch(value, grad[:, :spatial] if grad is not None else None, lap, dt)
    if not with_tape:
        return batch
    tape = _Tape(layers_tape, S, rows, din, spatial, w1, w2, dw1, d2w1)
    return batch, tape


def backward(tape: _Tape, params: NetworkParams, vbar=None, gbar=None,
             lapbar=None, dtbar=None) -> np.ndarray:
    """Parameter gradient (flat, pack() order) of sum_k of the linear form

        vbar_k * value_k + gbar_k . grad_k + lapbar_k * lap_k + dtbar_k * dt_k.
    """
    rows, din, spatial = tape.rows, tape.din, tape.spatial
    n = tape.s_last.shape[1]
    cot = np.zeros((rows, n))
    if vbar is not None:
        cot[0] = vbar
    if gbar is not None:
        cot[1:1 + spatial] = np.asarray(gbar).T
    if dtbar is not None:
        cot[din] = dtbar  # time first-derivative row
    if lapbar is not None:
        cot[1 + din:1 + din + spatial] += lapbar

    # output layer
    grad_out_w = np.einsum("rn,rnm->m", cot, tape.s_last)
    grad_out_b = float(cot[0].sum())
    S_bar = cot[:, :, None] * params.out_w[None, None, :]

    multi = params.mode is ActivationMode.MULTI
    gam = params.gauss_gamma
    w1, w2, dw1, d2w1 = tape.w1, tape.w2, tape.dw1, tape.d2w1
    grads_layers = []
    for layer, rec in zip(reversed(params.layers), reversed(tape.layers)):
        zbar = S_bar[0]
        t, t1 = rec.t, rec.t1
        t2 = -2.0 * t * t1
        jt = rec.lin_t[1:1 + din] if rows > 1 else None
        ht = rec.lin_t[1 + din:] if rows > 1 + din else None
        jbar = S_bar[1:1 + din] if rows > 1 else None
        hbar = S_bar[1 + din:] if rows > 1 + din else None

        C_t = np.empty_like(rec.lin_t)
        if multi:
            e, g1 = rec.e, rec.g1
            ag = rec.lin_g[0]
            g2 = (4.0 * ag**2 / gam**2 - 2.0 / gam) * e
            jg = rec.lin_g[1:1 + din] if rows > 1 else None
            hg = rec.lin_g[1 + din:] if rows > 1 + din else None
            C_g = np.empty_like(rec.lin_g)

            at_bar = zbar * w1 * t1
            ag_bar = zbar * w2 * g1
            if rows > 1:
                at_bar = at_bar + w1 * t2 * (jbar * jt).sum(axis=0)
                ag_bar = ag_bar + w2 * g2 * (jbar * jg).sum(axis=0)
                C_t[1:1 + din] = jbar * (w1 * t1)
                C_g[1:1 + din] = jbar * (w2 * g1)
                if dw1 is not None:
                    # value row of the branches also feeds the J/H output rows
                    at_bar = at_bar + t1 * (jbar * dw1.T[:, :, None]).sum(axis=0)
                    ag_bar = ag_bar - g1 * (jbar * dw1.T[:, :, None]).sum(axis=0)
            if rows > 1 + din:
                t3 = (6.0 * t**2 - 2.0) * t1
                g3 = (12.0 * ag / gam**2 - 8.0 * ag**3 / gam**3) * e
                at_bar = at_bar + w1 * (t3 * (hbar * jt**2).sum(axis=0)
                                        + t2 * (hbar * ht).sum(axis=0))
                ag_bar = ag_bar + w2 * (g3 * (hbar * jg**2).sum(axis=0)
                                        + g2 * (hbar * hg).sum(axis=0))
                C_t[1:1 + din] += hbar * (2.0 * w1 * t2) * jt
                C_g[1:1 + din] += hbar * (2.0 * w2 * g2) * jg
                C_t[1 + din:] = hbar * (w1 * t1)
                C_g[1 + din:] = hbar * (w2 * g1)
                if dw1 is not None:
                    dwT = dw1.T[:, :, None]
                    at_bar = at_bar + 2.0 * t2 * (hbar * dwT * jt).sum(axis=0) \
                        + t1 * (hbar * d2w1.T[:, :, None]).sum(axis=0)
                    ag_bar = ag_bar - 2.0 * g2 * (hbar * dwT * jg).sum(axis=0) \
                        - g1 * (hbar * d2w1.T[:, :, None]).sum(axis=0)
                    C_t[1:1 + din] += hbar * 2.0 * t1 * dwT
                    C_g[1:1 + din] -= hbar * 2.0 * g1 * dwT
            C_t[0] = at_bar
            C_g[0] = ag_bar
            grad_w_g = np.einsum("rnm,rnk->mk", C_g, rec.s_in)
        else:
            at_bar = zbar * t1
            if rows > 1:
                at_bar = at_bar + t2 * (jbar * jt).sum(axis=0)
                C_t[1:1 + din] = jbar * t1
            if rows > 1 + din:
                t3 = (6.0 * t**2 - 2.0) * t1
                at_bar = at_bar + t3 * (hbar * jt**2).sum(axis=0) \
                    + t2 * (hbar * ht).sum(axis=0)
                C_t[1:1 + din] += hbar * 2.0 * t2 * jt
                C_t[1 + din:] = hbar * t1
            C_t[0] = at_bar
            grad_w_g = None

        grad_w_t = np.einsum("rnm,rnk->mk", C_t, rec.s_in)
        grad_b_t = C_t[0].sum(axis=0)
        grads_layers.append((grad_w_t, grad_b_t, grad_w_g))

        r, nn, m_out = C_t.shape
        S_bar = (C_t.reshape(r * nn, m_out) @ layer.w_tanh).reshape(r, nn, -1)
        if multi:
            S_bar += (C_g.reshape(r * nn, m_out) @ layer.w_gauss).reshape(r, nn, -1)

    chunks = []
    for grad_w_t, grad_b_t, grad_w_g in reversed(grads_layers):
        chunks.append(grad_w_t.ravel())
        chunks.append(grad_b_t)
        if grad_w_g is not None:
            chunks.append(grad_w_g.ravel())
    chunks.append(grad_out_w)
    chunks.append(np.array([grad_out_b]))
    return np.concatenate(chunks)


def eval_jet(params: NetworkParams, x, t: Optional[float] = None,
             omega_weights=None, shape=None) -> Jet:
    """Jet of the network at a single point; blend weights held constant."""
    x = np.asarray(x, dtype=float)
    z = x if t is None else np.append(x, t)
    w1 = w2 = None
    if params.mode is ActivationMode.MULTI:
        if omega_weights is None:
            if shape is None:
                raise ValueError("multi-activation jets need omega_weights or a shape")
            omega_weights = weight_functions(x, shape, 0.0 if t is None else t,
                                             params.weight_decay_rate)
        w1 = np.array([omega_weights[0]])
        w2 = np.array([omega_weights[1]])
    spatial = x.shape[0]
    jb = forward_jets(params, z[None, :], w1, w2, need=JET, spatial=spatial)
    return Jet(float(jb.value[0]), jb.grad[0].copy(), float(jb.lap[0]),
               None if t is None else float(jb.dt[0]))


# ---------------------------------------------------------------------------
# loss assembly over a collocation bundle


@dataclass
class TermSet:
    """Points of one loss term with their per-point blend weights and data."""

    X: np.ndarray  # (N, d_in)
    w1: Optional[np.ndarray]
    w2: Optional[np.ndarray]
    data: np.ndarray  # f / gD / g0 values, shape (N,)
    dw1: Optional[np.ndarray] = None  # (N, d_in) when differentiating the blend
    d2w1: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.X)


@dataclass
class InterfaceSet:
    X: np.ndarray
    w1: Optional[np.ndarray]
    w2: Optional[np.ndarray]
    normals: np.ndarray  # (N, spatial)
    g1: np.ndarray
    g2: np.ndarray
    dw1: Optional[np.ndarray] = None
    d2w1: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.X)


@dataclass
class LossData:
    spatial_dim: int
    parabolic: bool
    beta1: float
    beta2: float
    interior1: TermSet
    interior2: TermSet
    interface: InterfaceSet
    boundary1: Optional[TermSet] = None
    boundary2: Optional[TermSet] = None
    initial1: Optional[TermSet] = None
    initial2: Optional[TermSet] = None


class LossBlowup(FloatingPointError):
    """Non-finite value in a named loss term."""

    def __init__(self, term: str):
        super().__init__(f"non-finite loss in term {term!r}")
        self.term = term


def _jets(params, ts, need, spatial, with_tape):
    return forward_jets(params, ts.X, ts.w1, ts.w2, need=need, spatial=spatial,
                        dw1=ts.dw1, d2w1=ts.d2w1, with_tape=with_tape)


def _mse(r: np.ndarray, term: str) -> float:
    out = float(np.mean(r**2)) if len(r) else 0.0
    if not np.isfinite(out):
        raise LossBlowup(term)
    return out


def loss_components(params1: NetworkParams, params2: NetworkParams,
                    data: LossData, weights, jet_provider: Optional[Callable] = None):
    """(total, components dict).

    Components are raw mean-square residuals except ``bc``, which is logged
    with the boundary weights already applied (the two regions share one
    column); total = w_pde1*pde1 + w_pde2*pde2 + bc + gamma1*ifc_jump
    + gamma2*ifc_flux + w_init*init.

    ``jet_provider(net_index, term_set, need)`` may replace the network
    evaluation (used to probe the loss with oracle inputs).
    """
    provider = jet_provider or (lambda idx, ts, need: _jets(
        params1 if idx == 1 else params2, ts, need, data.spatial_dim, False))

    comps = {}
    residuals = _term_residuals(provider, data)
    comps["pde1"] = _mse(residuals["pde1"], "pde1")
    comps["pde2"] = _mse(residuals["pde2"], "pde2")
    bc1 = _mse(residuals["bc1"], "bc1") if residuals["bc1"] is not None else 0.0
    bc2 = _mse(residuals["bc2"], "bc2") if residuals["bc2"] is not None else 0.0
    comps["bc"] = weights.w_bc1 * bc1 + weights.w_bc2 * bc2
    comps["ifc_jump"] = _mse(residuals["jump"], "ifc_jump")
    comps["ifc_flux"] = _mse(residuals["flux"], "ifc_flux")
    if residuals["init"] is not None:
        comps["init"] = _mse(residuals["init"], "init")
    else:
        comps["init"] = 0.0
    total = (weights.w_pde1 * comps["pde1"] + weights.w_pde2 * comps["pde2"]
             + comps["bc"] + weights.gamma1 * comps["ifc_jump"]
             + weights.gamma2 * comps["ifc_flux"] + weights.w_init * comps["init"])
    comps["total"] = total
    return total, comps


def _term_residuals(provider, data: LossData) -> dict:
    res = {}
    for idx, ts, beta, key in ((1, data.interior1, data.beta1, "pde1"),
                               (2, data.interior2, data.beta2, "pde2")):
        jb = provider(idx, ts, JET)
        r = -beta * jb.lap - ts.data
        if data.parabolic:
            r = r + jb.dt
        res[key] = r
    for idx, ts, key in ((1, data.boundary1, "bc1"), (2, data.boundary2, "bc2")):
        if ts is None or len(ts) == 0:
            res[key] = None
            continue
        res[key] = provider(idx, ts, VALUE).value - ts.data
    ifc = data.interface
    j1 = provider(1, ifc, GRAD)
    j2 = provider(2, ifc, GRAD)
    res["jump"] = j1.value - j2.value - ifc.g1
    res["flux"] = (data.beta1 * np.sum(j1.grad * ifc.normals, axis=1)
                   - data.beta2 * np.sum(j2.grad * ifc.normals, axis=1) - ifc.g2)
    init_r = []
    for idx, ts in ((1, data.initial1), (2, data.initial2)):
        if ts is not None and len(ts):
            init_r.append(provider(idx, ts, VALUE).value - ts.data)
    res["init"] = np.concatenate(init_r) if init_r else None
    return res


def loss_gradient(params1: NetworkParams, params2: NetworkParams,
                  data: LossData, weights):
    """(grad1, grad2, total, components): exact parameter gradients of the
    weighted total loss with respect to both parameter sets."""
    comps = {}
    g1 = np.zeros(param_count(params1))
    g2 = np.zeros(param_count(params2))
    sp = data.spatial_dim

    # interior terms
    for idx, ts, beta, w, key in ((1, data.interior1, data.beta1, weights.w_pde1, "pde1"),
                                  (2, data.interior2, data.beta2, weights.w_pde2, "pde2")):
        if ts is None or len(ts) == 0:
            comps[key] = 0.0
            continue
        params = params1 if idx == 1 else params2
        jb, tape = _jets(params, ts, JET, sp, True)
        r = -beta * jb.lap - ts.data
        if data.parabolic:
            r = r + jb.dt
        comps[key] = _mse(r, key)
        scale = w * 2.0 / len(ts)
        gvec = backward(tape, params, lapbar=-beta * scale * r,
                        dtbar=scale * r if data.parabolic else None)
        if idx == 1:
            g1 += gvec
        else:
            g2 += gvec

    # boundary terms
    bc_vals = []
    for idx, ts, w, key in ((1, data.boundary1, weights.w_bc1, "bc1"),
                            (2, data.boundary2, weights.w_bc2, "bc2")):
        if ts is None or len(ts) == 0:
            bc_vals.append(0.0)
            continue
        params = params1 if idx == 1 else params2
        jb, tape = _jets(params, ts, VALUE, sp, True)
        r = jb.value - ts.data
        bc_vals.append(_mse(r, key))
        gvec = backward(tape, params, vbar=w * (2.0 / len(ts)) * r)
        if idx == 1:
            g1 += gvec
        else:
            g2 += gvec
    comps["bc"] = weights.w_bc1 * bc_vals[0] + weights.w_bc2 * bc_vals[1]

    # interface terms couple both networks
    ifc = data.interface
    jb1, tape1 = _jets(params1, ifc, GRAD, sp, True)
    jb2, tape2 = _jets(params2, ifc, GRAD, sp, True)
    r_jump = jb1.value - jb2.value - ifc.g1
    r_flux = (data.beta1 * np.sum(jb1.grad * ifc.normals, axis=1)
              - data.beta2 * np.sum(jb2.grad * ifc.normals, axis=1) - ifc.g2)
    comps["ifc_jump"] = _mse(r_jump, "ifc_jump")
    comps["ifc_flux"] = _mse(r_flux, "ifc_flux")
    m = len(ifc)
    vbar = weights.gamma1 * (2.0 / m) * r_jump
    fbar = weights.gamma2 * (2.0 / m) * r_flux
    g1 += backward(tape1, params1, vbar=vbar,
                   gbar=data.beta1 * fbar[:, None] * ifc.normals)
    g2 += backward(tape2, params2, vbar=-vbar,
                   gbar=-data.beta2 * fbar[:, None] * ifc.normals)

    # initial condition (parabolic): one pooled mean over both regions
    n_init = sum(len(ts) for ts in (data.initial1, data.initial2) if ts is not None)
    if n_init:
        sq = 0.0
        for idx, ts in ((1, data.initial1), (2, data.initial2)):
            if ts is None or len(ts) == 0:
                continue
            params = params1 if idx == 1 else params2
            jb, tape = _jets(params, ts, VALUE, sp, True)
            r = jb.value - ts.data
            sq += float(np.sum(r**2))
            gvec = backward(tape, params, vbar=weights.w_init * (2.0 / n_init) * r)
            if idx == 1:
                g1 += gvec
            else:
                g2 += gvec
        comps["init"] = sq / n_init
        if not np.isfinite(comps["init"]):
            raise LossBlowup("init")
    else:
        comps["init"] = 0.0

    total = (weights.w_pde1 * comps["pde1"] + weights.w_pde2 * comps["pde2"]
             + comps["bc"] + weights.gamma1 * comps["ifc_jump"]
             + weights.gamma2 * comps["ifc_flux"] + weights.w_init * comps["init"])
    comps["total"] = total
    return g1, g2, total, comps


# ---------------------------------------------------------------------------
# finite-difference gradient check


@dataclass
class GradCheckReport:
    max_rel_err: float
    worst_net: int
    worst_index: int
    offenders: list  # [(net, index, rel_err)] above tolerance
    passed: bool


def check_gradient(params1: NetworkParams, params2: NetworkParams, data: LossData,
                   weights, tol: float = 1e-4, h: float = 1e-5,
                   gradient_override=None) -> GradCheckReport:
    """Compare loss_gradient against central finite differences, entry-wise.

    ``gradient_override`` substitutes the analytic gradients (diagnostic hook
    for validating the checker itself).
    """
    from .network import unpack_like

    if gradient_override is None:
        ga1, ga2, _, _ = loss_gradient(params1, params2, data, weights)
    else:
        ga1, ga2 = gradient_override

    def loss_at(p1, p2):
        return loss_components(p1, p2, data, weights)[0]

    offenders = []
    max_rel, worst = 0.0, (1, 0)
    for net_idx, (params, other, ga) in ((1, (params1, params2, ga1)),
                                         (2, (params2, params1, ga2))):
        base = pack(params)
        fd = np.empty_like(base)
        for k in range(base.size):
            pert = base.copy()
            pert[k] = base[k] + h
            hi = loss_at(*( (unpack_like(params, pert), other) if net_idx == 1
                            else (other, unpack_like(params, pert)) ))
            pert[k] = base[k] - h
            lo = loss_at(*( (unpack_like(params, pert), other) if net_idx == 1
                            else (other, unpack_like(params, pert)) ))
            fd[k] = (hi - lo) / (2.0 * h)
        denom = np.maximum(np.maximum(np.abs(fd), np.abs(ga)), 1e-6)
        rel = np.abs(fd - ga) / denom
        k_worst = int(np.argmax(rel))
        if rel[k_worst] > max_rel:
            max_rel, worst = float(rel[k_worst]), (net_idx, k_worst)
        for k in np.nonzero(rel > tol)[0]:
            offenders.append((net_idx, int(k), float(rel[k])))
    return GradCheckReport(max_rel, worst[0], worst[1], offenders, not offenders)
