"""Instance-level training loop: Adam, class weights, early stopping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceError, StructuralError


@dataclass
class TrainingConfig:
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 30
    patience: int = 0  # 0 disables early stopping
    class_weights: dict[int, float] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.epochs <= 0:
            raise StructuralError("learning rate, batch size and epochs must be "
                                  "positive")
        if self.patience < 0:
            raise StructuralError("patience must be non-negative")
        if self.class_weights:
            for label, weight in self.class_weights.items():
                if weight < 0:
                    raise StructuralError(f"negative weight for class {label}")

    def weight_for(self, label: int) -> float:
        if not self.class_weights:
            return 1.0
        return self.class_weights.get(label, 1.0)


@dataclass
class TrainingHistory:
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    stopped_early: bool = False


class Adam:
    def __init__(self, parameters, learning_rate=1e-3, beta1=0.9, beta2=0.999,
                 eps=1e-8):
        self.parameters = list(parameters)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m = [np.zeros_like(p.value) for p in self.parameters]
        self._v = [np.zeros_like(p.value) for p in self.parameters]

    def step(self, scale: float = 1.0):
        self.step_count += 1
        b1c = 1.0 - self.beta1 ** self.step_count
        b2c = 1.0 - self.beta2 ** self.step_count
        for p, m, v in zip(self.parameters, self._m, self._v):
            g = p.grad * scale
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            p.value -= self.learning_rate * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def _mean_loss(model, examples, config):
    return float(np.mean([model.loss_only(ex, weight=config.weight_for(ex.label))
                          for ex in examples]))


def train(model, examples, config: TrainingConfig,
          val_examples=None) -> TrainingHistory:
    """Train in place; returns the per-epoch loss history.

    Single-threaded and fully deterministic for a fixed seed: shuffling,
    dropout masks, and the gradient reduction order all derive from one
    generator.
    """
    if not examples:
        raise StructuralError("no training examples")
    rng = np.random.default_rng(config.seed)
    optimizer = Adam(model.parameters(), learning_rate=config.learning_rate)
    history = TrainingHistory()

    best_val = math.inf
    best_state = None
    bad_epochs = 0

    for epoch in range(config.epochs):
        order = rng.permutation(len(examples))
        epoch_loss = 0.0
        for lo in range(0, len(order), config.batch_size):
            batch = order[lo:lo + config.batch_size]
            model.zero_grads()
            for idx in batch:
                ex = examples[idx]
                epoch_loss += model.backprop(
                    ex, weight=config.weight_for(ex.label), train=True, rng=rng)
            optimizer.step(scale=1.0 / len(batch))
        mean_loss = epoch_loss / len(examples)
        if not math.isfinite(mean_loss):
            raise DivergenceError(epoch, config.learning_rate)
        history.train_losses.append(mean_loss)

        if val_examples and config.patience > 0:
            val_loss = _mean_loss(model, val_examples, config)
            history.val_losses.append(val_loss)
            if val_loss < best_val:
                best_val = val_loss
                best_state = [p.value.copy() for p in model.parameters()]
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs >= config.patience:
                    history.stopped_early = True
                    break

    if best_state is not None and history.stopped_early:
        for p, saved in zip(model.parameters(), best_state):
            p.value[...] = saved
    return history
