"""Velocity MLP with hand-rolled reverse-mode gradients, Adam, checkpoints.

The network maps (x, t) -> velocity; the scalar timestep is appended to
the state vector as an extra input feature (no embedding).  Hidden layers
use the swish activation z*sigmoid(z); the output layer is linear.  All
arithmetic is float64.

Weight layout: weights[l] has shape (fan_in, fan_out) and activations are
row vectors, h_next = swish(h @ W + b).  Parameters flatten to the list
[W0, b0, W1, b1, ...]; gradients and Adam moments use the same order.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ConfigError, NumericError, ShapeError
from .schedules import Schedule


def swish(z):
    z = np.asarray(z, dtype=np.float64)
    return z * expit(z)


def swish_grad(z):
    """d/dz [z*sigmoid(z)] = s*(1 + z*(1-s)) with s = sigmoid(z)."""
    z = np.asarray(z, dtype=np.float64)
    s = expit(z)
    return s * (1.0 + z * (1.0 - s))


@dataclass
class Network:
    layer_dims: list
    weights: list
    biases: list

    @property
    def data_dim(self) -> int:
        return self.layer_dims[-1]


def mlp_init(layer_dims, seed: int) -> Network:
    """Fan-in-scaled uniform init: W ~ U[-sqrt(6/fan_in), +sqrt(6/fan_in)], b = 0."""
    layer_dims = [int(d) for d in layer_dims]
    if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
        raise ConfigError(f"invalid layer dims {layer_dims}: need >= 2 layers, all dims >= 1")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Network(layer_dims=layer_dims, weights=weights, biases=biases)


def parameters(network: Network) -> list:
    """Flat parameter list [W0, b0, W1, b1, ...]."""
    out = []
    for w, b in zip(network.weights, network.biases):
        out.append(w)
        out.append(b)
    return out


def _stack_inputs(network: Network, x, t) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    t = np.asarray(t, dtype=np.float64)
    if t.ndim == 0:
        t = np.full(x.shape[0], float(t))
    if t.shape != (x.shape[0],):
        raise ShapeError(f"time batch {t.shape} does not match state batch {x.shape}")
    if x.shape[1] + 1 != network.layer_dims[0]:
        raise ShapeError(
            f"state dim {x.shape[1]} + time does not match input dim {network.layer_dims[0]}"
        )
    return np.concatenate([x, t[:, None]], axis=1)


def _forward_cached(network: Network, inp: np.ndarray):
    """Forward pass keeping pre-activations and sigmoid values for backprop."""
    n_layers = len(network.weights)
    h = inp
    hs = [h]   # layer inputs
    zs = []    # pre-activations
    ss = []    # sigmoid(z) on hidden layers
    for i, (w, b) in enumerate(zip(network.weights, network.biases)):
        z = h @ w
        z += b
        zs.append(z)
        if i < n_layers - 1:
            s = expit(z)
            ss.append(s)
            h = z * s
        else:
            ss.append(None)
            h = z
        hs.append(h)
    return h, hs, zs, ss


def forward(network: Network, x, t) -> np.ndarray:
    """Network velocity prediction for a batch of states and times."""
    out, _, _, _ = _forward_cached(network, _stack_inputs(network, x, t))
    return out


def loss_and_grad(network: Network, x, t, targets):
    """Mean-squared velocity regression loss and its exact gradient.

    loss = mean over batch elements and output dimensions of squared
    error; gradients are returned in the flat parameter order.
    """
    inp = _stack_inputs(network, x, t)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    out, hs, zs, ss = _forward_cached(network, inp)
    if out.shape != targets.shape:
        raise ShapeError(f"target shape {targets.shape} does not match output {out.shape}")
    r = out - targets
    loss = float(np.mean(r * r))
    if not np.isfinite(loss):
        raise NumericError("non-finite loss in forward pass")

    n_layers = len(network.weights)
    d = (2.0 / r.size) * r
    grad_w = [None] * n_layers
    grad_b = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        grad_w[i] = hs[i].T @ d
        grad_b[i] = d.sum(axis=0)
        if i > 0:
            d = d @ network.weights[i].T
            s = ss[i - 1]
            d *= s * (1.0 + zs[i - 1] * (1.0 - s))
    grads = []
    for gw, gb in zip(grad_w, grad_b):
        grads.append(gw)
        grads.append(gb)
    return loss, grads


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, params, lr: float = 1e-3) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params],
                   step=0, lr=lr)


def adam_step(params, grads, state: AdamState):
    """One bias-corrected Adam update.  Mutates params and state in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError("parameter/gradient/moment list length mismatch")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


@dataclass
class Checkpoint:
    network: Network
    adam: AdamState
    schedule: Schedule
    iteration: int = 0
    rng_seed: int = 0
    train_variant: str = "standard"


CHECKPOINT_FORMAT_VERSION = 1


def checkpoint_to_dict(ck: Checkpoint) -> dict:
    return {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "schedule_kind": ck.schedule.value,
        "train_variant": ck.train_variant,
        "iteration": ck.iteration,
        "rng_seed": ck.rng_seed,
        "layer_dims": list(ck.network.layer_dims),
        "weights": [w.tolist() for w in ck.network.weights],
        "biases": [b.tolist() for b in ck.network.biases],
        "adam": {
            "m": [m.tolist() for m in ck.adam.m],
            "v": [v.tolist() for v in ck.adam.v],
            "step": ck.adam.step,
            "lr": ck.adam.lr,
            "beta1": ck.adam.beta1,
            "beta2": ck.adam.beta2,
            "eps": ck.adam.eps,
        },
    }


def checkpoint_from_dict(d: dict) -> Checkpoint:
    if d.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise ConfigError(f"unsupported checkpoint format_version {d.get('format_version')!r}")
    dims = [int(x) for x in d["layer_dims"]]
    network = Network(
        layer_dims=dims,
        weights=[np.asarray(w, dtype=np.float64) for w in d["weights"]],
        biases=[np.asarray(b, dtype=np.float64) for b in d["biases"]],
    )
    a = d["adam"]
    adam = AdamState(
        m=[np.asarray(m, dtype=np.float64) for m in a["m"]],
        v=[np.asarray(v, dtype=np.float64) for v in a["v"]],
        step=int(a["step"]),
        lr=float(a["lr"]),
        beta1=float(a["beta1"]),
        beta2=float(a["beta2"]),
        eps=float(a["eps"]),
    )
    return Checkpoint(
        network=network,
        adam=adam,
        schedule=Schedule.from_string(d["schedule_kind"]),
        iteration=int(d["iteration"]),
        rng_seed=int(d["rng_seed"]),
        train_variant=str(d["train_variant"]),
    )


def save_checkpoint(ck: Checkpoint, path) -> None:
    import json

    with open(path, "w") as f:
        json.dump(checkpoint_to_dict(ck), f)


def load_checkpoint(path) -> Checkpoint:
    import json

    with open(path) as f:
        return checkpoint_from_dict(json.load(f))


def gradient_max_rel_error(network: Network, x, t, targets, h: float = 1e-5,
                           corrupt: bool = False) -> float:
    """Max relative error of reverse-mode vs central-difference gradients.

    Exhaustive over every parameter coordinate; intended for small
    networks and small batches.  `corrupt` perturbs one analytic gradient
    entry, as a negative control that the check can fail.
    """
    _, grads = loss_and_grad(network, x, t, targets)
    if corrupt:
        g0 = grads[0]
        g0.flat[0] = g0.flat[0] * 1.001 + 1e-6
    inp = _stack_inputs(network, x, t)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    params = parameters(network)
    worst = 0.0
    for p, g in zip(params, grads):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            lp = _raw_loss(network, inp, targets)
            flat[k] = orig - h
            lm = _raw_loss(network, inp, targets)
            flat[k] = orig
            fd = (lp - lm) / (2.0 * h)
            denom = max(abs(fd), abs(gflat[k]), 1e-10)
            worst = max(worst, abs(fd - gflat[k]) / denom)
    return worst


def _raw_loss(network: Network, inp: np.ndarray, targets: np.ndarray) -> float:
    n_layers = len(network.weights)
    h = inp
    for i, (w, b) in enumerate(zip(network.weights, network.biases)):
        z = h @ w
        z += b
        h = z * expit(z) if i < n_layers - 1 else z
    r = h - targets
    return float(np.mean(r * r))
