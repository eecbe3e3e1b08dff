"""Loss, optimizers, and the mini-batch training loop."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergedTrainingError, ShapeMismatchError
from .model import Model
from .tensor import Tensor


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error and its gradient 2*(pred - target)/count."""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ShapeMismatchError(f"mse_loss shapes differ: {pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff**2))
    return loss, 2.0 * diff / diff.size


class SGD:
    """Plain gradient descent: p <- p - lr * g."""

    def __init__(self, params: list[Tensor], lr: float):
        self.params = params
        self.lr = lr

    def step(self) -> None:
        for p in self.params:
            if p.grad is not None:
                p.data -= self.lr * p.grad


class Adam:
    """Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, params: list[Tensor], lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self._scratch = [np.empty_like(p.data) for p in params]

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1**self.t
        bc2 = 1.0 - b2**self.t
        for p, m, v, tmp in zip(self.params, self.m, self.v, self._scratch):
            if p.grad is None:
                continue
            m *= b1
            m += (1 - b1) * p.grad
            np.square(p.grad, out=tmp)
            v *= b2
            tmp *= 1 - b2
            v += tmp
            np.divide(v, bc2, out=tmp)
            np.sqrt(tmp, out=tmp)
            tmp += self.eps
            np.divide(m, tmp, out=tmp)
            tmp *= self.lr / bc1
            p.data -= tmp


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    epochs: int = 100
    batch_size: int = 32
    optimizer: str = "adam"
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class TrainReport:
    """Per-epoch losses, final test predictions, and wall-clock time."""

    train_losses: list[float]
    val_losses: list[float]
    test_pairs: list[tuple[float, float]] = field(default_factory=list)
    wall_clock_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "train_losses": self.train_losses,
            "val_losses": self.val_losses,
            "test_pairs": [[p, t] for p, t in self.test_pairs],
            "wall_clock_s": self.wall_clock_s,
        }


def make_optimizer(params: list[Tensor], cfg: TrainConfig):
    if cfg.optimizer == "sgd":
        return SGD(params, cfg.learning_rate)
    return Adam(params, cfg.learning_rate)


def predict(model: Model, X: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Eval-mode scalar predictions for a batch of inputs."""
    outs = []
    for start in range(0, X.shape[0], batch_size):
        outs.append(model.forward(X[start : start + batch_size], training=False))
    return np.concatenate(outs).reshape(-1)


def evaluate_mse(model: Model, X: np.ndarray, y: np.ndarray, batch_size: int = 64) -> float:
    preds = predict(model, X, batch_size)
    return float(np.mean((preds - np.asarray(y).reshape(-1)) ** 2))


def train(
    model: Model,
    x_train: np.ndarray,
    y_train: np.ndarray,
    cfg: TrainConfig,
    x_val: np.ndarray | None = None,
    y_val: np.ndarray | None = None,
    x_test: np.ndarray | None = None,
    y_test: np.ndarray | None = None,
) -> TrainReport:
    """Train with seeded shuffling and mini-batch MSE.

    The per-epoch train loss is the mean of batch losses; validation loss is
    computed in eval mode (on the training inputs when no validation set is
    given).  Final test predictions are recorded when a test set is present.
    Raises DivergedTrainingError on a non-finite loss.
    """
    x_train = np.asarray(x_train)
    y_train = np.asarray(y_train, dtype=np.float64).reshape(-1, 1)
    if x_train.shape[0] == 0:
        raise ValueError("training set is empty")
    if x_val is None:
        x_val, y_val = x_train, y_train
    y_val = np.asarray(y_val, dtype=np.float64).reshape(-1)

    rng = np.random.default_rng(cfg.seed)
    model.seed_dropout(cfg.seed + 1)
    optimizer = make_optimizer(model.parameters(), cfg)
    n = x_train.shape[0]

    t0 = time.perf_counter()
    train_losses: list[float] = []
    val_losses: list[float] = []
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            sel = perm[start : start + cfg.batch_size]
            out = model.forward(x_train[sel], training=True)
            loss, grad = mse_loss(out, y_train[sel].astype(out.dtype))
            if not np.isfinite(loss):
                raise DivergedTrainingError(f"non-finite training loss at epoch {epoch}")
            model.zero_grad()
            model.backward(grad)
            optimizer.step()
            batch_losses.append(loss)
        train_losses.append(float(np.mean(batch_losses)))
        val_loss = evaluate_mse(model, x_val, y_val, batch_size=max(cfg.batch_size, 64))
        if not np.isfinite(val_loss):
            raise DivergedTrainingError(f"non-finite validation loss at epoch {epoch}")
        val_losses.append(val_loss)

    pairs: list[tuple[float, float]] = []
    if x_test is not None and y_test is not None:
        preds = predict(model, x_test, batch_size=max(cfg.batch_size, 64))
        pairs = [(float(p), float(t)) for p, t in zip(preds, np.asarray(y_test).reshape(-1))]
    return TrainReport(
        train_losses=train_losses,
        val_losses=val_losses,
        test_pairs=pairs,
        wall_clock_s=time.perf_counter() - t0,
    )
