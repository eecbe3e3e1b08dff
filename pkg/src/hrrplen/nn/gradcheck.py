"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np

from .model import Model
from .training import mse_loss


def grad_check(
    model: Model,
    eps: float = 1e-4,
    samples: int = 50,
    seed: int = 0,
    batch: int = 2,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Draws a random input/target pair, computes analytic parameter gradients
    through one training-mode backward pass, then compares against
    (L(p+eps) - L(p-eps)) / (2*eps) for ``samples`` randomly chosen
    parameters.  The relative error denominator is
    max(|analytic|, |numeric|, 1e-8).

    Dropout is disabled and batch-norm running statistics are left untouched
    during the check, so every forward pass sees the same deterministic loss
    surface.  Models should be float64 for the quoted tolerances to be
    meaningful.
    """
    if model.dtype != np.float64:
        raise ValueError("grad_check requires a float64 model")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((batch,) + model.input_shape)

    saved_rates = model.set_dropout_rate(0.0)
    model.set_batchnorm_update(False)
    try:
        probe = model.forward(x, training=True)
        target = rng.standard_normal(probe.shape)

        def loss_value() -> float:
            out = model.forward(x, training=True)
            return mse_loss(out, target)[0]

        out = model.forward(x, training=True)
        loss, grad = mse_loss(out, target)
        model.zero_grad()
        model.backward(grad)

        params = model.parameters()
        sizes = np.array([p.size for p in params])
        total = int(sizes.sum())
        n_checks = min(samples, total)
        flat_choices = rng.choice(total, size=n_checks, replace=False)
        offsets = np.concatenate([[0], np.cumsum(sizes)])

        max_rel = 0.0
        for flat in flat_choices:
            t_idx = int(np.searchsorted(offsets, flat, side="right") - 1)
            inner = int(flat - offsets[t_idx])
            tensor = params[t_idx]
            analytic = float(tensor.grad.flat[inner]) if tensor.grad is not None else 0.0
            orig = tensor.data.flat[inner]
            tensor.data.flat[inner] = orig + eps
            plus = loss_value()
            tensor.data.flat[inner] = orig - eps
            minus = loss_value()
            tensor.data.flat[inner] = orig
            numeric = (plus - minus) / (2.0 * eps)
            rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-8)
            max_rel = max(max_rel, rel)
        return max_rel
    finally:
        model.restore_dropout_rate(saved_rates)
        model.set_batchnorm_update(True)
