"""Trainable layers with hand-written forward/backward passes.

Everything runs in double precision on single instances; sequence lengths
and layer sizes here are small enough that batched GEMMs buy nothing.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError, StructuralError


class Parameter:
    """A named weight array paired with its gradient accumulator."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self):
        self.grad[...] = 0.0


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def log_softmax(z):
    m = np.max(z)
    return z - (m + np.log(np.sum(np.exp(z - m))))


def softmax(z):
    return np.exp(log_softmax(z))


def _uniform_init(rng, shape, fan_in):
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


class LSTMLayer:
    """Single-direction LSTM over a sequence of input vectors.

    Gate blocks are stacked in the order input, forget, cell, output.
    The initial hidden and cell states are zero; the forget-gate bias
    starts at 1 so early training does not wipe the cell state.
    """

    def __init__(self, input_dim: int, units: int, rng: np.random.Generator,
                 name: str = "lstm"):
        self.input_dim = input_dim
        self.units = units
        self.w_in = Parameter(f"{name}.w_in",
                              _uniform_init(rng, (input_dim, 4 * units), input_dim))
        self.w_rec = Parameter(f"{name}.w_rec",
                               _uniform_init(rng, (units, 4 * units), units))
        bias = np.zeros(4 * units)
        bias[units:2 * units] = 1.0
        self.bias = Parameter(f"{name}.bias", bias)

    def parameters(self):
        return [self.w_in, self.w_rec, self.bias]

    def forward(self, inputs: np.ndarray, cache: list | None = None) -> np.ndarray:
        """Run the recurrence; returns the (T, units) hidden state sequence."""
        inputs = np.asarray(inputs, dtype=np.float64)
        if inputs.ndim != 2 or inputs.shape[1] != self.input_dim:
            raise ShapeError(
                f"expected (T, {self.input_dim}) inputs, got {inputs.shape}"
            )
        if inputs.shape[0] == 0:
            raise StructuralError("empty input sequence")
        h = np.zeros(self.units)
        c = np.zeros(self.units)
        hidden = np.empty((inputs.shape[0], self.units))
        u = self.units
        for t, x in enumerate(inputs):
            z = x @ self.w_in.value + h @ self.w_rec.value + self.bias.value
            gi = sigmoid(z[:u])
            gf = sigmoid(z[u:2 * u])
            gc = np.tanh(z[2 * u:3 * u])
            go = sigmoid(z[3 * u:])
            c_new = gf * c + gi * gc
            tc = np.tanh(c_new)
            h_new = go * tc
            if cache is not None:
                cache.append((x, h, c, gi, gf, gc, go, tc))
            h, c = h_new, c_new
            hidden[t] = h
        return hidden

    def backward(self, cache: list, d_hidden: np.ndarray) -> np.ndarray:
        """Backpropagate through time; accumulates parameter gradients.

        ``d_hidden`` holds the loss gradient w.r.t. every hidden state.
        Returns the gradient w.r.t. the input sequence.
        """
        u = self.units
        d_inputs = np.zeros((len(cache), self.input_dim))
        dh_next = np.zeros(u)
        dc_next = np.zeros(u)
        for t in range(len(cache) - 1, -1, -1):
            x, h_prev, c_prev, gi, gf, gc, go, tc = cache[t]
            dh = d_hidden[t] + dh_next
            dgo = dh * tc
            dc = dc_next + dh * go * (1.0 - tc * tc)
            dgi = dc * gc
            dgc = dc * gi
            dgf = dc * c_prev
            dc_next = dc * gf
            dz = np.concatenate([
                dgi * gi * (1.0 - gi),
                dgf * gf * (1.0 - gf),
                dgc * (1.0 - gc * gc),
                dgo * go * (1.0 - go),
            ])
            self.w_in.grad += np.outer(x, dz)
            self.w_rec.grad += np.outer(h_prev, dz)
            self.bias.grad += dz
            d_inputs[t] = dz @ self.w_in.value.T
            dh_next = dz @ self.w_rec.value.T
        return d_inputs


def lstm_forward(layer: LSTMLayer, inputs: np.ndarray) -> np.ndarray:
    """Functional wrapper around LSTMLayer.forward (no cache)."""
    return layer.forward(inputs)


def max_pool_time(hidden: np.ndarray) -> np.ndarray:
    """Elementwise maximum over the time axis."""
    hidden = np.asarray(hidden)
    if hidden.ndim != 2 or hidden.shape[0] == 0:
        raise StructuralError("max pooling needs a non-empty (T, units) sequence")
    return hidden.max(axis=0)


def max_pool_argmax(hidden: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = np.asarray(hidden)
    if hidden.ndim != 2 or hidden.shape[0] == 0:
        raise StructuralError("max pooling needs a non-empty (T, units) sequence")
    idx = hidden.argmax(axis=0)
    return hidden[idx, np.arange(hidden.shape[1])], idx


def max_pool_backward(idx: np.ndarray, steps: int, d_pooled: np.ndarray) -> np.ndarray:
    d_hidden = np.zeros((steps, d_pooled.shape[0]))
    d_hidden[idx, np.arange(d_pooled.shape[0])] = d_pooled
    return d_hidden


class DenseLayer:
    """Fully connected layer with tanh or linear activation."""

    def __init__(self, input_dim: int, output_dim: int, rng: np.random.Generator,
                 activation: str = "tanh", name: str = "dense"):
        if activation not in ("tanh", "linear"):
            raise StructuralError(f"unsupported activation {activation!r}")
        self.activation = activation
        self.weight = Parameter(f"{name}.weight",
                                _uniform_init(rng, (input_dim, output_dim), input_dim))
        self.bias = Parameter(f"{name}.bias", np.zeros(output_dim))

    def parameters(self):
        return [self.weight, self.bias]

    def forward(self, x: np.ndarray, cache: list | None = None) -> np.ndarray:
        z = x @ self.weight.value + self.bias.value
        out = np.tanh(z) if self.activation == "tanh" else z
        if cache is not None:
            cache.append((x, out))
        return out

    def backward(self, cache_entry, d_out: np.ndarray) -> np.ndarray:
        x, out = cache_entry
        dz = d_out * (1.0 - out * out) if self.activation == "tanh" else d_out
        self.weight.grad += np.outer(x, dz)
        self.bias.grad += dz
        return dz @ self.weight.value.T


def dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    """Inverted-dropout mask; inference applies no scaling."""
    if rate <= 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)
