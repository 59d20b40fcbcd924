"""A single-hidden-layer sigmoid network trained by online back-propagation.

The backward pass propagates delta terms (output error scaled by the
sigmoid derivative) into per-weight error derivatives, and the update adds
eta times those derivatives, which descends the squared error.  Biases are
implemented as weights on a constant +1 input and learn through the same
machinery.  Trained single-output networks act as a code/skip gate for the
residual coder.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyTrainingSet, ShapeMismatch

MODEL_FORMAT = "cafbp-gate-net"
MODEL_VERSION = 1


def sigmoid(x):
    """Logistic squashing 1/(1+e^-x); stable for large |x|, never NaN."""
    arr = np.asarray(x, np.float64)
    z = np.exp(-np.abs(arr))
    out = np.where(arr >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


@dataclass
class NetworkShape:
    inputs: int
    hidden: int
    outputs: int


@dataclass(eq=False)
class Network:
    shape: NetworkShape
    w_hidden: np.ndarray   # (hidden, inputs)
    w_output: np.ndarray   # (outputs, hidden)
    bias_hidden: np.ndarray
    bias_output: np.ndarray
    eta: float
    seed: int | None = None


@dataclass(eq=False)
class ForwardTrace:
    x: np.ndarray
    net_hidden: np.ndarray
    oh: np.ndarray
    net_output: np.ndarray
    oo: np.ndarray


@dataclass(eq=False)
class Gradients:
    delta_o: np.ndarray
    delta_h: np.ndarray
    wed_out: np.ndarray    # (outputs, hidden)
    wed_hid: np.ndarray    # (hidden, inputs)
    wed_bias_out: np.ndarray
    wed_bias_hid: np.ndarray


def create_network(inputs: int, hidden: int, outputs: int,
                   eta: float = 0.5, seed: int = 0) -> Network:
    """Fresh network with weights drawn uniformly from [-0.5, 0.5]."""
    if min(inputs, hidden, outputs) < 1:
        raise ShapeMismatch("all layer sizes must be >= 1")
    rng = np.random.default_rng(seed)
    return Network(
        shape=NetworkShape(inputs, hidden, outputs),
        w_hidden=rng.uniform(-0.5, 0.5, (hidden, inputs)),
        w_output=rng.uniform(-0.5, 0.5, (outputs, hidden)),
        bias_hidden=rng.uniform(-0.5, 0.5, hidden),
        bias_output=rng.uniform(-0.5, 0.5, outputs),
        eta=eta,
        seed=seed,
    )


def forward(net: Network, x) -> ForwardTrace:
    """Forward pass, keeping every intermediate for the backward pass."""
    x = np.asarray(x, np.float64)
    if x.shape != (net.shape.inputs,):
        raise DimensionMismatch(
            f"input length {x.shape} does not match {net.shape.inputs}")
    net_hidden = net.w_hidden @ x + net.bias_hidden
    oh = sigmoid(net_hidden)
    net_output = net.w_output @ oh + net.bias_output
    oo = sigmoid(net_output)
    return ForwardTrace(x=x, net_hidden=net_hidden, oh=oh,
                        net_output=net_output, oo=oo)


def backward(net: Network, trace: ForwardTrace, target) -> Gradients:
    """Delta terms and weight error derivatives for one pattern.

    The derivatives carry the sign of -dE/dw for E = 0.5*sum((d-oo)^2),
    so adding eta times them is gradient descent on the squared error.
    """
    d = np.asarray(target, np.float64)
    if d.shape != (net.shape.outputs,):
        raise DimensionMismatch(
            f"target length {d.shape} does not match {net.shape.outputs}")
    delta_o = (d - trace.oo) * trace.oo * (1.0 - trace.oo)
    delta_h = trace.oh * (1.0 - trace.oh) * (net.w_output.T @ delta_o)
    return Gradients(
        delta_o=delta_o,
        delta_h=delta_h,
        wed_out=np.outer(delta_o, trace.oh),
        wed_hid=np.outer(delta_h, trace.x),
        wed_bias_out=delta_o,
        wed_bias_hid=delta_h,
    )


def apply_update(net: Network, grads: Gradients) -> Network:
    """Add eta-scaled error derivatives to every weight, in place."""
    net.w_output += net.eta * grads.wed_out
    net.bias_output += net.eta * grads.wed_bias_out
    net.w_hidden += net.eta * grads.wed_hid
    net.bias_hidden += net.eta * grads.wed_bias_hid
    return net


def train(net: Network, pairs, eta: float | None = None,
          max_epochs: int = 1000, error_goal: float = 0.0):
    """Online training: one update per pattern, patterns in the given order.

    Returns (net, history) where history holds the per-epoch mean squared
    error, measured as each pattern is presented.  Training stops when the
    epoch MSE drops to error_goal or the epoch budget runs out.
    """
    if not pairs:
        raise EmptyTrainingSet("no training pairs")
    if max_epochs < 1:
        raise ValueError("max_epochs must be >= 1")
    if eta is not None:
        net.eta = eta
    xs = [np.asarray(x, np.float64) for x, _ in pairs]
    ds = [np.asarray(d, np.float64) for _, d in pairs]

    history: list[float] = []
    for _ in range(max_epochs):
        total = 0.0
        for x, d in zip(xs, ds):
            # Fused forward/backward/update; identical math to
            # forward() -> backward() -> apply_update().
            oh = sigmoid(net.w_hidden @ x + net.bias_hidden)
            oo = sigmoid(net.w_output @ oh + net.bias_output)
            err = d - oo
            total += float(np.mean(err * err))
            delta_o = err * oo * (1.0 - oo)
            delta_h = oh * (1.0 - oh) * (net.w_output.T @ delta_o)
            net.w_output += net.eta * np.outer(delta_o, oh)
            net.bias_output += net.eta * delta_o
            net.w_hidden += net.eta * np.outer(delta_h, x)
            net.bias_hidden += net.eta * delta_h
        epoch_mse = total / len(xs)
        history.append(epoch_mse)
        if epoch_mse <= error_goal:
            break
    return net, history


def gate(net: Network, features, cutoff: float = 0.5) -> bool:
    """True means "code this block"; the boundary value is inclusive."""
    if net.shape.outputs != 1:
        raise ShapeMismatch(
            f"gating needs a single-output network, got {net.shape.outputs}")
    return bool(forward(net, features).oo[0] >= cutoff)


def network_to_dict(net: Network) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "inputs": net.shape.inputs,
        "hidden": net.shape.hidden,
        "outputs": net.shape.outputs,
        "eta": float(net.eta),
        "seed": net.seed,
        "w_hidden": net.w_hidden.tolist(),
        "w_output": net.w_output.tolist(),
        "bias_hidden": net.bias_hidden.tolist(),
        "bias_output": net.bias_output.tolist(),
    }


def network_from_dict(payload: dict) -> Network:
    if payload.get("format") != MODEL_FORMAT:
        raise ShapeMismatch(f"not a gate model file: {payload.get('format')!r}")
    if payload.get("version") != MODEL_VERSION:
        raise ShapeMismatch(f"unsupported model version {payload.get('version')!r}")
    shape = NetworkShape(payload["inputs"], payload["hidden"], payload["outputs"])
    net = Network(
        shape=shape,
        w_hidden=np.array(payload["w_hidden"], np.float64),
        w_output=np.array(payload["w_output"], np.float64),
        bias_hidden=np.array(payload["bias_hidden"], np.float64),
        bias_output=np.array(payload["bias_output"], np.float64),
        eta=float(payload["eta"]),
        seed=payload.get("seed"),
    )
    if net.w_hidden.shape != (shape.hidden, shape.inputs):
        raise ShapeMismatch("hidden weight matrix does not match the shape")
    if net.w_output.shape != (shape.outputs, shape.hidden):
        raise ShapeMismatch("output weight matrix does not match the shape")
    return net


def save_network(net: Network, path) -> None:
    """Write the model as JSON; float round-tripping is lossless."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net), fh, indent=1)
        fh.write("\n")


def load_network(path) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        return network_from_dict(json.load(fh))
