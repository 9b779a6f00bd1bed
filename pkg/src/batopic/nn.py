"""Dense layers with manual forward/backward passes, Adam, and weight clipping.

The network topologies here are small and fixed, so the backward pass is
tape-based with explicit per-layer rules instead of a generic autodiff graph:
every forward returns (out, cache) and the matching backward consumes the
cache. All gradients are exact analytic derivatives and are checked against
central finite differences in the test suite.

Shapes follow the row-major batch convention: activations are (N, features),
dense weights are (out, in).
"""

from dataclasses import dataclass

import numpy as np


# ---------------------------------------------------------------------------
# layers
# ---------------------------------------------------------------------------

class DenseLayer:
    """Affine map y = x W^T + b with weight (out, in) and bias (out,)."""

    def __init__(self, weight, bias):
        self.weight = np.asarray(weight, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)

    @classmethod
    def init(cls, n_in, n_out, rng):
        # bounded uniform init keeps early critic outputs inside the clip range
        bound = np.sqrt(6.0 / (n_in + n_out))
        weight = rng.uniform(-bound, bound, (n_out, n_in))
        return cls(weight, np.zeros(n_out))

    @property
    def n_in(self):
        return self.weight.shape[1]

    @property
    def n_out(self):
        return self.weight.shape[0]

    def param_arrays(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def forward(self, x, mode):
        return dense_forward(self, x)

    def backward(self, cache, dout):
        return dense_backward(self, cache, dout)


class BatchNormLayer:
    """Per-feature standardization with learned scale/shift.

    Train mode standardizes by batch statistics and folds them into the
    running estimates: running <- (1 - momentum) * running + momentum * batch.
    Eval mode uses the running estimates only.
    """

    def __init__(self, n_features, momentum=0.1, epsilon=1e-5):
        self.gamma = np.ones(n_features)
        self.beta = np.zeros(n_features)
        self.running_mean = np.zeros(n_features)
        self.running_var = np.ones(n_features)
        self.momentum = float(momentum)
        self.epsilon = float(epsilon)

    def param_arrays(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def forward(self, x, mode):
        return batchnorm_forward(self, x, mode)

    def backward(self, cache, dout):
        return batchnorm_backward(self, cache, dout)


class LeakyReLULayer:
    def __init__(self, leak=0.2):
        if not 0.0 < leak < 1.0:
            raise ValueError("leak must lie in (0, 1)")
        self.leak = float(leak)

    def param_arrays(self):
        return []

    def forward(self, x, mode):
        return leaky_relu(x, self.leak)

    def backward(self, cache, dout):
        return {}, leaky_relu_backward(cache, dout, self.leak)


class SoftmaxLayer:
    def param_arrays(self):
        return []

    def forward(self, x, mode):
        y = softmax(x)
        return y, y

    def backward(self, cache, dout):
        return {}, softmax_backward(cache, dout)


# ---------------------------------------------------------------------------
# per-layer ops
# ---------------------------------------------------------------------------

def dense_forward(layer, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != layer.n_in:
        raise ValueError(f"dense input shape {x.shape} does not match in={layer.n_in}")
    return x @ layer.weight.T + layer.bias, x


def dense_backward(layer, cache, dout):
    x = cache
    grads = {"weight": dout.T @ x, "bias": dout.sum(axis=0)}
    return grads, dout @ layer.weight


def batchnorm_forward(layer, x, mode):
    x = np.asarray(x, dtype=np.float64)
    if mode == "train":
        if x.shape[0] < 2:
            raise ValueError("batchnorm train mode needs batch size >= 2")
        mean = x.mean(axis=0)
        var = x.var(axis=0)
        inv_std = 1.0 / np.sqrt(var + layer.epsilon)
        xhat = (x - mean) * inv_std
        m = layer.momentum
        layer.running_mean = (1.0 - m) * layer.running_mean + m * mean
        layer.running_var = (1.0 - m) * layer.running_var + m * var
        cache = ("train", xhat, inv_std)
    elif mode == "eval":
        inv_std = 1.0 / np.sqrt(layer.running_var + layer.epsilon)
        xhat = (x - layer.running_mean) * inv_std
        cache = ("eval", xhat, inv_std)
    else:
        raise ValueError(f"unknown batchnorm mode {mode!r}")
    return layer.gamma * xhat + layer.beta, cache


def batchnorm_backward(layer, cache, dout):
    kind, xhat, inv_std = cache
    n = dout.shape[0]
    grads = {"gamma": np.sum(dout * xhat, axis=0), "beta": dout.sum(axis=0)}
    dxhat = dout * layer.gamma
    if kind == "train":
        # batch mean/variance both depend on x; the extra terms remove the
        # per-feature mean and the xhat-aligned component of the gradient
        dx = inv_std * (dxhat - dxhat.mean(axis=0) - xhat * np.mean(dxhat * xhat, axis=0))
    else:
        dx = dxhat * inv_std
    return grads, dx


def leaky_relu(x, leak):
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, leak * x), x


def leaky_relu_backward(cache, dout, leak):
    return dout * np.where(cache >= 0, 1.0, leak)


def softmax(x):
    x = np.asarray(x, dtype=np.float64)
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_backward(y, dout):
    # rowwise Jacobian: dx = y * (dout - <dout, y>)
    return y * (dout - np.sum(dout * y, axis=-1, keepdims=True))


# ---------------------------------------------------------------------------
# layer stacks
# ---------------------------------------------------------------------------

@dataclass
class TapeCache:
    """Forward intermediates for one forward call through a stack."""
    mode: str
    layer_caches: list


class Stack:
    """A fixed sequence of layers trained as one unit."""

    def __init__(self, layers):
        self.layers = list(layers)

    def forward(self, x, mode):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, mode)
            caches.append(cache)
        return x, TapeCache(mode, caches)

    def backward(self, cache, grad_out):
        if len(cache.layer_caches) != len(self.layers):
            raise ValueError("tape does not match this stack")
        grads = [None] * len(self.layers)
        dx = grad_out
        for i in range(len(self.layers) - 1, -1, -1):
            grads[i], dx = self.layers[i].backward(cache.layer_caches[i], dx)
        return grads, dx

    # flat parameter views, used by the optimizers and the checkpoint code

    def param_arrays(self):
        out = []
        for i, layer in enumerate(self.layers):
            for name, arr in layer.param_arrays():
                out.append((f"{i}.{name}", arr))
        return out

    def num_params(self):
        return sum(arr.size for _, arr in self.param_arrays())

    def get_flat_params(self):
        arrays = [arr.ravel() for _, arr in self.param_arrays()]
        return np.concatenate(arrays) if arrays else np.zeros(0)

    def set_flat_params(self, vec):
        offset = 0
        for i, layer in enumerate(self.layers):
            for name, arr in layer.param_arrays():
                chunk = vec[offset:offset + arr.size].reshape(arr.shape)
                setattr(layer, name, chunk.copy())
                offset += arr.size
        if offset != vec.size:
            raise ValueError(f"flat vector length {vec.size} != expected {offset}")

    def flatten_grads(self, grads):
        pieces = []
        for layer, gdict in zip(self.layers, grads):
            for name, arr in layer.param_arrays():
                pieces.append(gdict[name].ravel())
        return np.concatenate(pieces) if pieces else np.zeros(0)


def backward(net, cache, grad_out):
    """Analytic gradients of a scalar loss through a whole stack.

    Returns (per-layer parameter grads, gradient w.r.t. the stack input).
    """
    return net.backward(cache, grad_out)


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int
    alpha1: float
    beta1: float
    beta2: float
    eps_adam: float

    @classmethod
    def for_size(cls, n, alpha1, beta1, beta2, eps_adam=1e-8):
        return cls(np.zeros(n), np.zeros(n), 0, alpha1, beta1, beta2, eps_adam)


def adam_step(state, params, grads):
    """One bias-corrected Adam update; increments state.t, returns new params."""
    if params.shape != grads.shape:
        raise ValueError("params and grads must have the same length")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return params - state.alpha1 * m_hat / (np.sqrt(v_hat) + state.eps_adam)


def clip_weights(params, c):
    """Clamp every entry to [-c, c]."""
    if c <= 0:
        raise ValueError("clip bound must be positive")
    return np.clip(params, -c, c)
