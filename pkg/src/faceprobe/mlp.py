"""Three-layer tanh network trained by full-batch gradient descent on MSE."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DataError, NumericError

DEFAULT_LEARNING_RATE = 0.01
DEFAULT_GOAL_MSE = 1e-4


class TargetScheme(str, Enum):
    PLUS_MINUS_ONE = "plus_minus_one"
    ZERO_ONE = "zero_one"


def encode_targets(class_idx, n_classes: int, scheme: TargetScheme) -> np.ndarray:
    """One-hot rows; the off value is -1 or 0 depending on ``scheme``."""
    idx = np.asarray(class_idx, dtype=np.intp)
    if np.any(idx < 0) or np.any(idx >= n_classes):
        raise DataError(f"class index out of range for {n_classes} classes")
    off = -1.0 if TargetScheme(scheme) is TargetScheme.PLUS_MINUS_ONE else 0.0
    t = np.full((idx.size, n_classes), off)
    t[np.arange(idx.size), idx] = 1.0
    return t


@dataclass
class TrainConfig:
    n_hidden: int
    n_iterations: int
    learning_rate: float = DEFAULT_LEARNING_RATE
    goal_mse: float = DEFAULT_GOAL_MSE
    seed: int = 0

    def __post_init__(self):
        if self.n_hidden < 1:
            raise DataError("n_hidden must be >= 1")
        if self.n_iterations < 1:
            raise DataError("n_iterations must be >= 1")
        if self.learning_rate < 0:
            raise DataError("learning_rate must be >= 0")
        if not self.goal_mse > 0:
            raise DataError("goal_mse must be > 0")


@dataclass
class MlpModel:
    w1: np.ndarray  # (n_hidden, n_in)
    b1: np.ndarray
    w2: np.ndarray  # (n_out, n_hidden)
    b2: np.ndarray
    target_scheme: TargetScheme
    scaler_mean: np.ndarray
    scaler_std: np.ndarray
    train_mse: float = float("nan")
    initial_mse: float = float("nan")
    train_iterations: int = 0
    extra: dict = field(default_factory=dict, repr=False)

    @property
    def n_in(self) -> int:
        return self.w1.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def n_out(self) -> int:
        return self.w2.shape[0]

    def scale(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n_in:
            raise DataError(f"network expects {self.n_in} inputs, got {x.shape[-1]}")
        return (x - self.scaler_mean) / self.scaler_std

    def forward(self, x) -> np.ndarray:
        """Outputs for one vector or a stack of row vectors, each in (-1, 1)."""
        xs = self.scale(x)
        hidden = np.tanh(xs @ self.w1.T + self.b1)
        return np.tanh(hidden @ self.w2.T + self.b2)


def _loss_and_grads(params, xs, t):
    w1, b1, w2, b2 = params
    h = np.tanh(xs @ w1.T + b1)
    y = np.tanh(h @ w2.T + b2)
    err = y - t
    loss = float(np.mean(err * err))
    dz2 = (2.0 / err.size) * err * (1.0 - y * y)
    gw2 = dz2.T @ h
    gb2 = dz2.sum(axis=0)
    dz1 = (dz2 @ w2) * (1.0 - h * h)
    gw1 = dz1.T @ xs
    gb1 = dz1.sum(axis=0)
    return loss, (gw1, gb1, gw2, gb2)


def mse_gradients(model: MlpModel, x, targets):
    """MSE and its gradients w.r.t. (w1, b1, w2, b2) on unscaled inputs ``x``."""
    return _loss_and_grads((model.w1, model.b1, model.w2, model.b2), model.scale(x),
                           np.asarray(targets, dtype=np.float64))


def init_model(n_in: int, n_out: int, cfg: TrainConfig, scheme: TargetScheme,
               scaler_mean=None, scaler_std=None) -> MlpModel:
    rng = np.random.default_rng(cfg.seed)
    w1 = rng.uniform(-0.5, 0.5, size=(cfg.n_hidden, n_in))
    b1 = rng.uniform(-0.5, 0.5, size=cfg.n_hidden)
    w2 = rng.uniform(-0.5, 0.5, size=(n_out, cfg.n_hidden))
    b2 = rng.uniform(-0.5, 0.5, size=n_out)
    return MlpModel(
        w1, b1, w2, b2, TargetScheme(scheme),
        np.zeros(n_in) if scaler_mean is None else scaler_mean,
        np.ones(n_in) if scaler_std is None else scaler_std,
    )


def train_mlp(features, targets, cfg: TrainConfig,
              scheme: TargetScheme = TargetScheme.ZERO_ONE) -> MlpModel:
    """Z-score the inputs, then run gradient descent until the MSE goal or the
    iteration budget is reached. The achieved MSE is kept on the model."""
    x = np.asarray([np.asarray(f, dtype=np.float64) for f in features]) \
        if not isinstance(features, np.ndarray) else np.asarray(features, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DataError("training set is empty")
    if t.ndim != 2 or t.shape[0] != x.shape[0]:
        raise DataError(f"{x.shape[0]} feature vectors but targets of shape {t.shape}")
    lo = -1.0 if TargetScheme(scheme) is TargetScheme.PLUS_MINUS_ONE else 0.0
    if np.any(t < lo) or np.any(t > 1.0):
        raise DataError(f"targets must lie in [{lo}, 1] for scheme {TargetScheme(scheme).value}")

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std[std == 0] = 1.0
    model = init_model(x.shape[1], t.shape[1], cfg, scheme, mean, std)
    xs = (x - mean) / std
    params = [model.w1, model.b1, model.w2, model.b2]
    lr = cfg.learning_rate
    loss = float("nan")
    initial = None
    done = 0
    for it in range(cfg.n_iterations):
        loss, grads = _loss_and_grads(params, xs, t)
        if not np.isfinite(loss):
            raise NumericError(
                f"training diverged at iteration {it} (loss {loss}); use a smaller learning_rate"
            )
        if initial is None:
            initial = loss
        if loss <= cfg.goal_mse:
            break
        for p, g in zip(params, grads):
            p -= lr * g
        done = it + 1
    else:
        loss, _ = _loss_and_grads(params, xs, t)
        if not np.isfinite(loss):
            raise NumericError("training diverged; use a smaller learning_rate")
    model.train_mse = loss
    model.initial_mse = initial
    model.train_iterations = done
    return model


def mlp_forward(model: MlpModel, v) -> np.ndarray:
    return model.forward(np.asarray(v, dtype=np.float64))


def classify(model: MlpModel, v, labels) -> tuple[str, np.ndarray]:
    """Argmax decision; exact ties go to the lowest index."""
    labels = list(labels)
    if len(labels) != model.n_out:
        raise DataError(f"{len(labels)} labels for a network with {model.n_out} outputs")
    scores = mlp_forward(model, v)
    return labels[int(np.argmax(scores))], scores
