"""Minimal tensor/gradient core for the two network topologies used here:
a recurrent (LSTM) encoder over the 5-row action-history window whose
final hidden state is concatenated with flat features and pushed through
a six-layer perceptron.

Only these fixed topologies are supported; no general autodiff graph.
Parameters train in float32; a float64 shadow copy exists for gradient
checking.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

CHECKPOINT_FORMAT = 1
RMS_DECAY = 0.99
RMS_FLOOR = 1e-5
CLIP_NORM = 1.0


class ShapeMismatch(Exception):
    pass


@dataclass(frozen=True)
class NetSpec:
    history_cols: int          # LSTM input width per row
    recurrent_hidden: int
    flat_width: int
    hidden_widths: tuple       # five hidden perceptron widths
    out_width: int
    out_activation: str        # "identity" | "sigmoid"

    def __post_init__(self):
        if len(self.hidden_widths) != 5:
            raise ValueError("perceptron is six layers: 5 hidden + output")
        if self.out_activation not in ("identity", "sigmoid"):
            raise ValueError(f"unknown activation {self.out_activation}")

    @property
    def layer_widths(self) -> tuple:
        return tuple(self.hidden_widths) + (self.out_width,)


def q_net_spec(recurrent_hidden=128, width=512, flat_width=559) -> NetSpec:
    return NetSpec(208, recurrent_hidden, flat_width, (width,) * 5, 1, "identity")


def relation_net_spec(recurrent_hidden=128, width=512, flat_width=475) -> NetSpec:
    return NetSpec(208, recurrent_hidden, flat_width, (width,) * 5, 3, "sigmoid")


def danger_net_spec(recurrent_hidden=128, width=512, flat_width=475) -> NetSpec:
    return NetSpec(208, recurrent_hidden, flat_width, (width,) * 5, 1, "sigmoid")


class ParamStore:
    """Named parameter arrays plus RMS optimizer state and a version
    counter. One exclusive writer; readers take copies."""

    def __init__(self, spec: NetSpec, params: dict, version: int = 0):
        self.spec = spec
        self.params = params
        self.sq = {k: np.zeros_like(v) for k, v in params.items()}
        self.version = version

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def copy(self) -> "ParamStore":
        out = ParamStore(self.spec, {k: v.copy() for k, v in self.params.items()},
                         self.version)
        out.sq = {k: v.copy() for k, v in self.sq.items()}
        return out

    def astype(self, dtype) -> "ParamStore":
        out = ParamStore(self.spec,
                         {k: v.astype(dtype) for k, v in self.params.items()},
                         self.version)
        out.sq = {k: v.astype(dtype) for k, v in self.sq.items()}
        return out

    def save(self, directory) -> None:
        os.makedirs(directory, exist_ok=True)
        tensors, offset = [], 0
        order = list(self.params) + [f"rms/{k}" for k in self.sq]
        arrays = {**{k: self.params[k] for k in self.params},
                  **{f"rms/{k}": self.sq[k] for k in self.sq}}
        for name in order:
            arr = arrays[name]
            tensors.append({"name": name, "shape": list(arr.shape),
                            "offset": offset})
            offset += arr.size * 4
        manifest = {
            "format_version": CHECKPOINT_FORMAT,
            "net_spec": asdict(self.spec),
            "version": self.version,
            "tensors": tensors,
        }
        with open(os.path.join(directory, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1)
        with open(os.path.join(directory, "params.bin"), "wb") as fh:
            for name in order:
                fh.write(np.ascontiguousarray(
                    arrays[name], dtype="<f4").tobytes())

    @classmethod
    def load(cls, directory) -> "ParamStore":
        with open(os.path.join(directory, "manifest.json")) as fh:
            manifest = json.load(fh)
        if manifest["format_version"] != CHECKPOINT_FORMAT:
            raise ValueError("unsupported checkpoint format")
        raw = manifest["net_spec"]
        raw["hidden_widths"] = tuple(raw["hidden_widths"])
        spec = NetSpec(**raw)
        blob = open(os.path.join(directory, "params.bin"), "rb").read()
        params, sq = {}, {}
        for entry in manifest["tensors"]:
            shape = tuple(entry["shape"])
            size = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(blob, dtype="<f4", count=size,
                                offset=entry["offset"]).reshape(shape).copy()
            if entry["name"].startswith("rms/"):
                sq[entry["name"][4:]] = arr
            else:
                params[entry["name"]] = arr
        store = cls(spec, params, version=manifest["version"])
        store.sq = sq
        return store


def init(spec: NetSpec, seed: int) -> ParamStore:
    """Weights uniform(-k, k) with k = 1/sqrt(fan_in); biases zero."""
    rng = np.random.default_rng(seed)
    params = {}

    def uniform(fan_in, shape):
        k = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-k, k, size=shape).astype(np.float32)

    h = spec.recurrent_hidden
    params["lstm/wx"] = uniform(spec.history_cols, (spec.history_cols, 4 * h))
    params["lstm/wh"] = uniform(h, (h, 4 * h))
    params["lstm/b"] = np.zeros(4 * h, dtype=np.float32)
    widths = (h + spec.flat_width,) + spec.layer_widths
    for i in range(6):
        params[f"mlp/{i}/w"] = uniform(widths[i], (widths[i], widths[i + 1]))
        params[f"mlp/{i}/b"] = np.zeros(widths[i + 1], dtype=np.float32)
    return ParamStore(spec, params)


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def encode_history(store: ParamStore, history: np.ndarray, want_cache=False):
    """Run the LSTM over (B, rows, cols); returns final hidden state."""
    spec = store.spec
    if history.ndim == 2:
        history = history[None]
    if history.shape[1:] != (5, spec.history_cols):
        raise ShapeMismatch(f"history shape {history.shape}")
    p = store.params
    dtype = store.dtype
    history = history.astype(dtype, copy=False)
    B, T, _ = history.shape
    H = spec.recurrent_hidden
    h = np.zeros((B, H), dtype=dtype)
    c = np.zeros((B, H), dtype=dtype)
    steps = []
    for t in range(T):
        x = history[:, t, :]
        z = x @ p["lstm/wx"] + h @ p["lstm/wh"] + p["lstm/b"]
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = _sigmoid(z[:, 3 * H:])
        c_prev, h_prev = c, h
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        if want_cache:
            steps.append((x, h_prev, c_prev, i, f, g, o, tc))
    return (h, steps) if want_cache else h


def head_forward(store: ParamStore, encoded: np.ndarray, flat: np.ndarray,
                 want_cache=False):
    """Perceptron over [encoded history | flat features]."""
    spec = store.spec
    if flat.ndim == 1:
        flat = flat[None]
    if flat.shape[1] != spec.flat_width:
        raise ShapeMismatch(f"flat width {flat.shape[1]} != {spec.flat_width}")
    p = store.params
    dtype = store.dtype
    a = np.concatenate(
        [encoded, flat.astype(dtype, copy=False)], axis=1)
    acts = [a]
    for i in range(5):
        a = np.maximum(a @ p[f"mlp/{i}/w"] + p[f"mlp/{i}/b"], 0.0)
        acts.append(a)
    z = a @ p["mlp/5/w"] + p["mlp/5/b"]
    out = _sigmoid(z) if spec.out_activation == "sigmoid" else z
    if want_cache:
        return out, (acts, out)
    return out


def forward(store: ParamStore, history: np.ndarray, flat: np.ndarray,
            want_cache=False):
    """Full forward pass; with want_cache, also returns activations for
    backward()."""
    if want_cache:
        encoded, steps = encode_history(store, history, want_cache=True)
        out, (acts, _) = head_forward(store, encoded, flat, want_cache=True)
        return out, {"store": store, "steps": steps, "acts": acts, "out": out}
    encoded = encode_history(store, history)
    return head_forward(store, encoded, flat)


def backward(cache: dict, dout: np.ndarray) -> dict:
    """Exact reverse-mode gradients for every parameter."""
    store: ParamStore = cache["store"]
    spec = store.spec
    p = store.params
    acts, out = cache["acts"], cache["out"]
    dtype = store.dtype
    grads = {k: np.zeros_like(v) for k, v in p.items()}

    dz = dout.astype(dtype, copy=False)
    if dz.ndim == 1:
        dz = dz[None]
    if spec.out_activation == "sigmoid":
        dz = dz * out * (1.0 - out)
    grads["mlp/5/w"] = acts[5].T @ dz
    grads["mlp/5/b"] = dz.sum(axis=0)
    da = dz @ p["mlp/5/w"].T
    for i in range(4, -1, -1):
        dz = da * (acts[i + 1] > 0)
        grads[f"mlp/{i}/w"] = acts[i].T @ dz
        grads[f"mlp/{i}/b"] = dz.sum(axis=0)
        da = dz @ p[f"mlp/{i}/w"].T

    H = spec.recurrent_hidden
    dh = da[:, :H]
    dc = np.zeros_like(dh)
    for x, h_prev, c_prev, i, f, g, o, tc in reversed(cache["steps"]):
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        di, df, dg = dc * g, dc * c_prev, dc * i
        dz = np.concatenate([
            di * i * (1.0 - i), df * f * (1.0 - f),
            dg * (1.0 - g * g), do * o * (1.0 - o)], axis=1)
        grads["lstm/wx"] += x.T @ dz
        grads["lstm/wh"] += h_prev.T @ dz
        grads["lstm/b"] += dz.sum(axis=0)
        dh = dz @ p["lstm/wh"].T
        dc = dc * f
    return grads


def optimize_step(store: ParamStore, grads: dict, rate: float,
                  direction: str = "descend") -> None:
    """RMS-scaled update with a global gradient-norm clip at 1.0."""
    if direction not in ("descend", "ascend"):
        raise ValueError(direction)
    sign = -1.0 if direction == "descend" else 1.0
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g.astype(np.float64) ** 2))
    norm = np.sqrt(total)
    scale = 1.0 if norm <= CLIP_NORM else CLIP_NORM / norm
    for name, g in grads.items():
        if g.shape != store.params[name].shape:
            raise ShapeMismatch(name)
        g = g * scale
        sq = store.sq[name]
        sq *= RMS_DECAY
        sq += (1.0 - RMS_DECAY) * g * g
        denom = np.maximum(np.sqrt(sq), RMS_FLOOR)
        store.params[name] += (sign * rate) * (g / denom)
    store.version += 1
