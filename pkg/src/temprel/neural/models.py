"""Two-branch sequence classifier used by all pair models.

Each branch runs an LSTM over one token-embedding sequence and max-pools
over time; the pooled branch outputs are concatenated, passed through a
dropout + tanh hidden layer, and a softmax produces the label distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import StructuralError
from .layers import (
    DenseLayer,
    LSTMLayer,
    dropout_mask,
    log_softmax,
    max_pool_argmax,
    max_pool_backward,
    softmax,
)


@dataclass
class PairExample:
    """Embedded branch sequences plus a label index."""
    left: np.ndarray   # (T_left, dim)
    right: np.ndarray  # (T_right, dim)
    label: int = 0


class TwoBranchModel:
    def __init__(self, input_dim: int, labels: list, units: int = 256,
                 hidden: int = 100, dropout_input: float = 0.6,
                 dropout_hidden: float = 0.5, seed: int = 0):
        if len(labels) < 2:
            raise StructuralError("need at least two output labels")
        rng = np.random.default_rng(seed)
        self.input_dim = input_dim
        self.labels = list(labels)
        self.units = units
        self.hidden = hidden
        self.dropout_input = dropout_input
        self.dropout_hidden = dropout_hidden
        self.seed = seed
        self.lstm_left = LSTMLayer(input_dim, units, rng, name="left")
        self.lstm_right = LSTMLayer(input_dim, units, rng, name="right")
        self.dense_hidden = DenseLayer(2 * units, hidden, rng, "tanh", name="hidden")
        self.dense_out = DenseLayer(hidden, len(labels), rng, "linear", name="out")

    def parameters(self):
        return (self.lstm_left.parameters() + self.lstm_right.parameters()
                + self.dense_hidden.parameters() + self.dense_out.parameters())

    def zero_grads(self):
        for p in self.parameters():
            p.zero_grad()

    def checkpoint_config(self):
        return {
            "kind": "two-branch",
            "input_dim": self.input_dim,
            "labels": self.labels,
            "units": self.units,
            "hidden": self.hidden,
            "dropout_input": self.dropout_input,
            "dropout_hidden": self.dropout_hidden,
            "seed": self.seed,
        }

    def _forward(self, left, right, train, rng, cache):
        if train:
            left = left * dropout_mask(rng, left.shape, self.dropout_input)
            right = right * dropout_mask(rng, right.shape, self.dropout_input)
        lcache: list = []
        rcache: list = []
        hl = self.lstm_left.forward(left, lcache)
        hr = self.lstm_right.forward(right, rcache)
        vl, il = max_pool_argmax(hl)
        vr, ir = max_pool_argmax(hr)
        pooled = np.concatenate([vl, vr])
        if train:
            mask = dropout_mask(rng, pooled.shape, self.dropout_hidden)
        else:
            mask = None
        dropped = pooled * mask if mask is not None else pooled
        dcache: list = []
        hid = self.dense_hidden.forward(dropped, dcache)
        logits = self.dense_out.forward(hid, dcache)
        if cache is not None:
            cache.update(lcache=lcache, rcache=rcache, il=il, ir=ir,
                         steps=(hl.shape[0], hr.shape[0]), mask=mask,
                         dcache=dcache)
        return logits

    def forward(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Inference-mode label distribution; a pure function of the inputs."""
        return softmax(self._forward(left, right, False, None, None))

    def predict(self, left: np.ndarray, right: np.ndarray) -> tuple[int, float]:
        probs = self.forward(left, right)
        best = int(np.argmax(probs))
        return best, float(probs[best])

    def loss_only(self, example: PairExample, weight: float = 1.0) -> float:
        logits = self._forward(example.left, example.right, False, None, None)
        return -weight * float(log_softmax(logits)[example.label])

    def backprop(self, example: PairExample, weight: float = 1.0,
                 train: bool = False, rng: np.random.Generator | None = None) -> float:
        """Forward + backward for one example; gradients accumulate."""
        cache: dict = {}
        logits = self._forward(example.left, example.right, train, rng, cache)
        log_probs = log_softmax(logits)
        loss = -weight * float(log_probs[example.label])

        d_logits = weight * np.exp(log_probs)
        d_logits[example.label] -= weight
        dcache = cache["dcache"]
        d_hid = self.dense_out.backward(dcache[1], d_logits)
        d_dropped = self.dense_hidden.backward(dcache[0], d_hid)
        if cache["mask"] is not None:
            d_dropped = d_dropped * cache["mask"]
        d_vl, d_vr = d_dropped[:self.units], d_dropped[self.units:]
        steps_l, steps_r = cache["steps"]
        self.lstm_left.backward(cache["lcache"],
                                max_pool_backward(cache["il"], steps_l, d_vl))
        self.lstm_right.backward(cache["rcache"],
                                 max_pool_backward(cache["ir"], steps_r, d_vr))
        return loss
