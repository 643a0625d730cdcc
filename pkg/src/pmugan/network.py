"""Minimal dense feed-forward network engine with explicit backpropagation.

Everything is 64-bit and purely functional: forward/backward never mutate
their inputs, and the update steps return fresh parameter/optimizer objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

ACTIVATIONS = ("relu", "sigmoid", "linear")


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths (input, hidden..., output) plus one activation tag per weight layer."""

    layer_sizes: tuple[int, ...]
    activations: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        object.__setattr__(self, "activations", tuple(self.activations))
        if len(self.layer_sizes) < 2:
            raise ConfigurationError("a network needs at least an input and an output layer")
        if any(s < 1 for s in self.layer_sizes):
            raise ConfigurationError(f"layer sizes must be positive, got {self.layer_sizes}")
        if len(self.activations) != len(self.layer_sizes) - 1:
            raise ConfigurationError(
                f"expected {len(self.layer_sizes) - 1} activation tags, got {len(self.activations)}"
            )
        for act in self.activations:
            if act not in ACTIVATIONS:
                raise ConfigurationError(f"unknown activation {act!r}, expected one of {ACTIVATIONS}")

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]


@dataclass
class NetworkParameters:
    """Per-layer weight matrices (out x in) and bias vectors (out,)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def copy(self) -> "NetworkParameters":
        return NetworkParameters([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def to_manifest(self) -> dict:
        """Flat numeric arrays with a shape manifest, for serialization."""
        return {
            "shapes": [list(w.shape) for w in self.weights],
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_manifest(cls, manifest: dict) -> "NetworkParameters":
        weights = [
            np.asarray(flat, dtype=float).reshape(shape)
            for flat, shape in zip(manifest["weights"], manifest["shapes"])
        ]
        biases = [np.asarray(b, dtype=float) for b in manifest["biases"]]
        return cls(weights, biases)


@dataclass
class OptimizerState:
    """Running mean of squared gradients, one accumulator per parameter array."""

    sq_weights: list[np.ndarray]
    sq_biases: list[np.ndarray]
    decay: float = 0.9
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: NetworkParameters, decay: float = 0.9, eps: float = 1e-8) -> "OptimizerState":
        return cls(
            [np.zeros_like(w) for w in params.weights],
            [np.zeros_like(b) for b in params.biases],
            decay=decay,
            eps=eps,
        )


def init_network(spec: NetworkSpec, rng: np.random.Generator) -> NetworkParameters:
    """Zero-mean uniform weights scaled by sqrt(1/fan_in); zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        scale = np.sqrt(1.0 / fan_in)
        weights.append(rng.uniform(-scale, scale, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return NetworkParameters(weights, biases)


def _activate(z: np.ndarray, act: str) -> np.ndarray:
    if act == "relu":
        return np.maximum(z, 0.0)
    if act == "sigmoid":
        # numerically stable split around 0
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    return z


def _activate_prime(z: np.ndarray, post: np.ndarray, act: str) -> np.ndarray:
    if act == "relu":
        # subgradient at 0 taken as 0
        return (z > 0).astype(float)
    if act == "sigmoid":
        return post * (1.0 - post)
    return np.ones_like(z)


def forward(params: NetworkParameters, spec: NetworkSpec, batch: np.ndarray):
    """Run the network on a batch (n x input_size).

    Returns (outputs, cache); the cache holds per-layer pre- and
    post-activations and is consumed by :func:`backward`.
    """
    x = np.asarray(batch, dtype=float)
    if x.ndim != 2 or x.shape[1] != spec.input_size:
        raise ValueError(f"batch shape {x.shape} does not match input size {spec.input_size}")
    post = [x]
    pre = []
    for w, b, act in zip(params.weights, params.biases, spec.activations):
        z = post[-1] @ w.T + b
        pre.append(z)
        post.append(_activate(z, act))
    return post[-1], (pre, post)


def backward(params: NetworkParameters, spec: NetworkSpec, cache, grad_output: np.ndarray):
    """Backpropagate grad_output (n x output_size) through a cached forward pass.

    grad_output is d(loss)/d(outputs); any batch averaging belongs to the
    caller's loss definition and must already be baked into grad_output.
    Returns (parameter gradients, gradient w.r.t. the input batch).
    """
    pre, post = cache
    delta = np.asarray(grad_output, dtype=float)
    if delta.shape != pre[-1].shape:
        raise ValueError(f"grad_output shape {delta.shape} does not match outputs {pre[-1].shape}")
    grad_w: list[np.ndarray | None] = [None] * spec.n_layers
    grad_b: list[np.ndarray | None] = [None] * spec.n_layers
    for layer in range(spec.n_layers - 1, -1, -1):
        delta = delta * _activate_prime(pre[layer], post[layer + 1], spec.activations[layer])
        grad_w[layer] = delta.T @ post[layer]
        grad_b[layer] = delta.sum(axis=0)
        delta = delta @ params.weights[layer]
    return NetworkParameters(grad_w, grad_b), delta


def rmsprop_step(
    params: NetworkParameters,
    grads: NetworkParameters,
    opt_state: OptimizerState,
    learning_rate: float,
):
    """One adaptive update: acc <- decay*acc + (1-decay)*g^2; p <- p - lr*g/sqrt(acc+eps)."""
    d = opt_state.decay
    eps = opt_state.eps
    new_w, new_b, new_sw, new_sb = [], [], [], []
    for w, gw, sw in zip(params.weights, grads.weights, opt_state.sq_weights):
        acc = d * sw + (1.0 - d) * gw * gw
        new_sw.append(acc)
        new_w.append(w - learning_rate * gw / np.sqrt(acc + eps))
    for b, gb, sb in zip(params.biases, grads.biases, opt_state.sq_biases):
        acc = d * sb + (1.0 - d) * gb * gb
        new_sb.append(acc)
        new_b.append(b - learning_rate * gb / np.sqrt(acc + eps))
    return NetworkParameters(new_w, new_b), OptimizerState(new_sw, new_sb, decay=d, eps=eps)


def clip_params(params: NetworkParameters, c: float) -> NetworkParameters:
    """Clamp every weight and bias entry into [-c, c]."""
    if c <= 0:
        raise ConfigurationError(f"clip bound must be positive, got {c}")
    return NetworkParameters(
        [np.clip(w, -c, c) for w in params.weights],
        [np.clip(b, -c, c) for b in params.biases],
    )


def _loss_and_grad_output(outputs: np.ndarray, loss_tag: str):
    if loss_tag == "mean_output":
        return float(outputs.mean()), np.full_like(outputs, 1.0 / outputs.size)
    raise ConfigurationError(f"unknown loss tag {loss_tag!r}")


def gradient_check_layers(
    spec: NetworkSpec,
    params: NetworkParameters,
    batch: np.ndarray,
    loss_tag: str = "mean_output",
    epsilon: float = 1e-5,
) -> list[float]:
    """Worst relative error between backprop and central differences, per layer.

    Cost grows with twice the parameter count times one forward pass each.
    The error denominator is floored at epsilon: central differences cannot
    resolve relative error on gradients below the probe step (the quotient
    would just report loss-evaluation roundoff), so sub-resolution
    coordinates are compared absolutely against epsilon instead.
    """
    batch = np.asarray(batch, dtype=float)
    outputs, cache = forward(params, spec, batch)
    _, grad_out = _loss_and_grad_output(outputs, loss_tag)
    analytic, _ = backward(params, spec, cache, grad_out)

    probe = params.copy()

    def fd_loss():
        out, _ = forward(probe, spec, batch)
        return _loss_and_grad_output(out, loss_tag)[0]

    worst = []
    for layer in range(spec.n_layers):
        layer_worst = 0.0
        for arrays, grads in ((probe.weights, analytic.weights), (probe.biases, analytic.biases)):
            arr = arrays[layer]
            g = grads[layer]
            flat = arr.ravel()
            gflat = g.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + epsilon
                up = fd_loss()
                flat[i] = orig - epsilon
                down = fd_loss()
                flat[i] = orig
                fd = (up - down) / (2.0 * epsilon)
                denom = max(abs(gflat[i]), abs(fd), epsilon)
                layer_worst = max(layer_worst, abs(gflat[i] - fd) / denom)
        worst.append(layer_worst)
    return worst


def gradient_check(
    spec: NetworkSpec,
    params: NetworkParameters,
    batch: np.ndarray,
    loss_tag: str = "mean_output",
    epsilon: float = 1e-5,
) -> float:
    """Max relative error between backprop and central finite differences."""
    return max(gradient_check_layers(spec, params, batch, loss_tag, epsilon))
