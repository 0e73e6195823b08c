"""Subdomain network: layer structure, distance-blended activation, checkpoints.

Each hidden layer carries a tanh branch (weights + bias) and, in
multi-activation mode, a bias-free Gaussian branch:

    layer(z) = w1 * tanh(Wt z + bt) + w2 * exp(-(Wg z)^2 / gauss_gamma)

The blend weights (w1, w2) are computed once per collocation point from the
point's distance to the interface at its own time,

    w2 = exp(-weight_decay_rate * d(x, interface)),   w1 = 1 - w2,

and are shared by all hidden layers; the branch inputs are the hidden states.
The output layer is affine with a scalar output.
"""

from __future__ import annotations

import enum
import json
import struct
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .geometry import InterfaceShape, distance, distance_batch


class ActivationMode(enum.Enum):
    MULTI = "multi_activation"
    TANH_ONLY = "tanh_only"


@dataclass
class LayerParams:
    w_tanh: np.ndarray  # (m_out, m_in)
    b_tanh: np.ndarray  # (m_out,)
    w_gauss: Optional[np.ndarray]  # (m_out, m_in) or None in tanh-only mode


@dataclass
class NetworkParams:
    layers: List[LayerParams]
    out_w: np.ndarray  # (m_last,)
    out_b: float
    mode: ActivationMode
    gauss_gamma: float = 1.0
    weight_decay_rate: float = 10.0

    @property
    def d_in(self) -> int:
        return self.layers[0].w_tanh.shape[1]

    @property
    def hidden(self) -> Tuple[int, ...]:
        return tuple(l.w_tanh.shape[0] for l in self.layers)


# ---------------------------------------------------------------------------
# interface-aware blend weights


def weight_functions(x, shape: InterfaceShape, t: float = 0.0, rate: float = 10.0):
    """(w1, w2) at one point: w2 = exp(-rate * d), w1 = 1 - w2."""
    if rate <= 0:
        raise ValueError("decay rate must be positive")
    w2 = np.exp(-rate * distance(shape, x, t))
    return 1.0 - w2, w2


def weight_functions_batch(X, shape: InterfaceShape, t=0.0, rate: float = 10.0):
    if rate <= 0:
        raise ValueError("decay rate must be positive")
    w2 = np.exp(-rate * distance_batch(shape, X, t))
    return 1.0 - w2, w2


def blended_activation(z_tanh, z_gauss, w1, w2, gauss_gamma: float):
    """Componentwise blend of the two branch pre-activations."""
    z_tanh = np.asarray(z_tanh, dtype=float)
    z_gauss = np.asarray(z_gauss, dtype=float)
    return w1 * np.tanh(z_tanh) + w2 * np.exp(-(z_gauss**2) / gauss_gamma)


# ---------------------------------------------------------------------------
# forward evaluation (values only; derivatives live in the autodiff module)


def forward(params: NetworkParams, x, t: Optional[float] = None,
            shape: Optional[InterfaceShape] = None, omega=None) -> float:
    """Scalar network output at one point.

    For multi-activation parameters the blend weights come from ``omega``
    (a (w1, w2) pair, treated as given) or are computed from ``shape`` at the
    spatial point and time.
    """
    x = np.asarray(x, dtype=float)
    z = x if t is None else np.append(x, t)
    if z.shape[0] != params.d_in:
        raise ValueError(f"input size {z.shape[0]} != network d_in {params.d_in}")
    if params.mode is ActivationMode.MULTI:
        if omega is None:
            if shape is None:
                raise ValueError("multi-activation forward needs omega or an interface shape")
            omega = weight_functions(x, shape, 0.0 if t is None else t,
                                     params.weight_decay_rate)
        w1, w2 = omega
    for layer in params.layers:
        at = layer.w_tanh @ z + layer.b_tanh
        if params.mode is ActivationMode.MULTI:
            ag = layer.w_gauss @ z
            z = blended_activation(at, ag, w1, w2, params.gauss_gamma)
        else:
            z = np.tanh(at)
    out = float(params.out_w @ z + params.out_b)
    if not np.isfinite(out):
        raise FloatingPointError("non-finite network output")
    return out


def forward_batch(params: NetworkParams, X: np.ndarray, w1=None, w2=None) -> np.ndarray:
    """Vectorized values at (N, d_in) inputs with precomputed blend weights."""
    Z = np.asarray(X, dtype=float)
    if params.mode is ActivationMode.MULTI:
        w1 = np.asarray(w1)[:, None]
        w2 = np.asarray(w2)[:, None]
    for layer in params.layers:
        At = Z @ layer.w_tanh.T + layer.b_tanh
        if params.mode is ActivationMode.MULTI:
            Ag = Z @ layer.w_gauss.T
            Z = w1 * np.tanh(At) + w2 * np.exp(-(Ag**2) / params.gauss_gamma)
        else:
            Z = np.tanh(At)
    return Z @ params.out_w + params.out_b


# ---------------------------------------------------------------------------
# initialization and parameter vector layout


def initialize(d_in: int, hidden, mode: ActivationMode, seed: int,
               gauss_gamma: float = 1.0, weight_decay_rate: float = 10.0) -> NetworkParams:
    """Glorot-uniform tanh branch, zero biases, half-scale Gaussian branch."""
    hidden = tuple(int(m) for m in hidden)
    if d_in < 1 or any(m < 1 for m in hidden):
        raise ValueError("layer widths must be >= 1")
    rng = np.random.default_rng(seed)
    layers = []
    m_prev = d_in
    for m in hidden:
        bound = np.sqrt(6.0 / (m_prev + m))
        w_t = rng.uniform(-bound, bound, size=(m, m_prev))
        w_g = (0.5 * rng.uniform(-bound, bound, size=(m, m_prev))
               if mode is ActivationMode.MULTI else None)
        layers.append(LayerParams(w_t, np.zeros(m), w_g))
        m_prev = m
    bound = np.sqrt(6.0 / (m_prev + 1))
    out_w = rng.uniform(-bound, bound, size=m_prev)
    return NetworkParams(layers, out_w, 0.0, mode, gauss_gamma, weight_decay_rate)


def branch_counts(params: NetworkParams) -> Tuple[int, int]:
    """(tanh-branch, Gaussian-branch) parameter counts."""
    n_tanh = sum(l.w_tanh.size + l.b_tanh.size for l in params.layers)
    n_tanh += params.out_w.size + 1
    n_gauss = sum(l.w_gauss.size for l in params.layers if l.w_gauss is not None)
    return n_tanh, n_gauss


def param_count(params: NetworkParams) -> int:
    return sum(branch_counts(params))


def pack(params: NetworkParams) -> np.ndarray:
    """Flatten to one vector: per layer [w_tanh, b_tanh, (w_gauss)], then [out_w, out_b]."""
    chunks = []
    for l in params.layers:
        chunks.append(l.w_tanh.ravel())
        chunks.append(l.b_tanh)
        if l.w_gauss is not None:
            chunks.append(l.w_gauss.ravel())
    chunks.append(params.out_w)
    chunks.append(np.array([params.out_b]))
    return np.concatenate(chunks)


def unpack_like(template: NetworkParams, vec: np.ndarray) -> NetworkParams:
    """Rebuild parameters from a flat vector in pack() order."""
    vec = np.asarray(vec, dtype=float)
    if vec.size != param_count(template):
        raise ValueError("parameter vector length mismatch")
    pos = 0

    def take(shape):
        nonlocal pos
        n = int(np.prod(shape))
        out = vec[pos:pos + n].reshape(shape)
        pos += n
        return out

    layers = []
    for l in template.layers:
        w_t = take(l.w_tanh.shape)
        b_t = take(l.b_tanh.shape)
        w_g = take(l.w_gauss.shape) if l.w_gauss is not None else None
        layers.append(LayerParams(w_t, b_t, w_g))
    out_w = take(template.out_w.shape)
    out_b = float(take((1,))[0])
    return NetworkParams(layers, out_w, out_b, template.mode,
                         template.gauss_gamma, template.weight_decay_rate)


# ---------------------------------------------------------------------------
# checkpoint file format (see README for the byte-exact layout)

_MAGIC = b"IPINNCK1"


def save_checkpoint(path, params1: NetworkParams, params2: NetworkParams,
                    meta: Optional[dict] = None) -> None:
    header = {
        "version": 1,
        "d_in": params1.d_in,
        "hidden": list(params1.hidden),
        "mode": params1.mode.value,
        "gauss_gamma": params1.gauss_gamma,
        "weight_decay_rate": params1.weight_decay_rate,
        "meta": meta or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for p in (params1, params2):
            flat = pack(p)
            fh.write(struct.pack("<Q", flat.size))
            fh.write(flat.astype("<f8").tobytes())


def load_checkpoint(path):
    """-> (params1, params2, meta dict)."""
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError("not a checkpoint file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        mode = ActivationMode(header["mode"])
        template = initialize(header["d_in"], header["hidden"], mode, seed=0,
                              gauss_gamma=header["gauss_gamma"],
                              weight_decay_rate=header["weight_decay_rate"])
        nets = []
        for _ in range(2):
            (n,) = struct.unpack("<Q", fh.read(8))
            flat = np.frombuffer(fh.read(8 * n), dtype="<f8")
            nets.append(unpack_like(template, flat))
    return nets[0], nets[1], header["meta"]
