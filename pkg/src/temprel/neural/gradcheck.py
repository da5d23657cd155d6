"""Finite-difference verification of the hand-written backward passes."""

from __future__ import annotations

import numpy as np

# Below this magnitude both gradients count as zero (dead paths).
_ZERO_FLOOR = 1e-8


def gradient_check(model, example, epsilon: float = 1e-5,
                   weight: float = 1.0) -> float:
    """Compare analytic gradients against central differences.

    Runs with dropout disabled in double precision.  Returns the worst
    relative error over every scalar parameter; parameters where both the
    analytic and numeric gradients vanish are skipped.
    """
    model.zero_grads()
    model.backprop(example, weight=weight, train=False)
    analytic = [p.grad.copy() for p in model.parameters()]

    worst = 0.0
    for param, grads in zip(model.parameters(), analytic):
        flat = param.value.ravel()
        grad_flat = grads.ravel()
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + epsilon
            loss_plus = model.loss_only(example, weight=weight)
            flat[k] = original - epsilon
            loss_minus = model.loss_only(example, weight=weight)
            flat[k] = original
            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            denom = max(abs(grad_flat[k]), abs(numeric))
            if denom < _ZERO_FLOOR:
                continue
            worst = max(worst, abs(grad_flat[k] - numeric) / denom)
    return worst


def max_zero_gradient_gap(model, example, epsilon: float = 1e-5,
                          weight: float = 1.0) -> float:
    """Largest |analytic - numeric| among parameters whose gradients vanish."""
    model.zero_grads()
    model.backprop(example, weight=weight, train=False)
    gap = 0.0
    for param in model.parameters():
        flat = param.value.ravel()
        grad_flat = param.grad.ravel()
        for k in np.flatnonzero(np.abs(grad_flat) < _ZERO_FLOOR):
            original = flat[k]
            flat[k] = original + epsilon
            loss_plus = model.loss_only(example, weight=weight)
            flat[k] = original - epsilon
            loss_minus = model.loss_only(example, weight=weight)
            flat[k] = original
            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            gap = max(gap, abs(grad_flat[k] - numeric))
    return gap
