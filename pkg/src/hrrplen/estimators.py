"""Sklearn-style regressors wrapping the network engine.

Both estimators take a (n_samples, profile_len) matrix of non-negative HRRP
amplitudes and predict radial length in meters.  ``Cnn1dRegressor`` feeds
the sequence regressor profiles scaled by their own peak (shape preserved,
amplitude scale removed); ``GafResNetRegressor`` encodes profiles as GAF
images first.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .errors import DegenerateSequenceError
from .gaf import encode
from .nn import (
    TrainConfig,
    build_cnn1d,
    build_gaf_resnet_toy,
    build_model,
    predict as nn_predict,
    train as nn_train,
)
from .validation import as_float_array, check_lengths_match, check_profile_matrix


def scale_profiles(X: np.ndarray) -> np.ndarray:
    """Divide each profile by its peak amplitude."""
    peaks = X.max(axis=1)
    if np.any(peaks <= 0):
        raise DegenerateSequenceError("all-zero profile cannot be scaled")
    return X / peaks[:, None]


def encode_profiles(X: np.ndarray, image_side: int) -> np.ndarray:
    """Encode profiles into single-channel GAF images of shape (n, s, s, 1)."""
    images = np.stack([encode(row, image_side) for row in X])
    return images[:, :, :, None]


class _NetRegressor(BaseEstimator, RegressorMixin):
    """Shared fit/predict plumbing; subclasses provide the input pipeline.

    Targets are standardized to zero mean and unit variance for training
    (a learning rate of 0.001 cannot traverse tens-of-meters output offsets
    in a small epoch budget); predictions and the recorded test pairs are
    mapped back to meters.
    """

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            optimizer=self.optimizer,
            seed=self.seed,
        )

    def _prepare(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _build(self, X: np.ndarray):
        raise NotImplementedError

    def _scale_y(self, y: np.ndarray) -> np.ndarray:
        return (y - self.y_mean_) / self.y_scale_

    def _unscale_y(self, y: np.ndarray) -> np.ndarray:
        return y * self.y_scale_ + self.y_mean_

    def fit(self, X, y, X_val=None, y_val=None, X_test=None, y_test=None):
        X = check_profile_matrix(X)
        y = as_float_array(y, name="y", ndim=1)
        check_lengths_match(X, y, "X, y")
        self.y_mean_ = float(y.mean())
        std = float(y.std())
        self.y_scale_ = std if std > 1e-8 else 1.0
        xv = yv = None
        if X_val is not None:
            X_val = check_profile_matrix(X_val, name="X_val")
            yv = self._scale_y(as_float_array(y_val, name="y_val", ndim=1))
            xv = self._prepare(X_val)
        xt = yt = None
        if X_test is not None:
            X_test = check_profile_matrix(X_test, name="X_test")
            yt = self._scale_y(as_float_array(y_test, name="y_test", ndim=1))
            xt = self._prepare(X_test)
        self.model_ = build_model(self._build(X))
        self.report_ = nn_train(
            self.model_,
            self._prepare(X),
            self._scale_y(y),
            self._train_config(),
            x_val=xv,
            y_val=yv,
            x_test=xt,
            y_test=yt,
        )
        self.report_.test_pairs = [
            (float(self._unscale_y(p)), float(self._unscale_y(t)))
            for p, t in self.report_.test_pairs
        ]
        return self

    def predict(self, X) -> np.ndarray:
        X = check_profile_matrix(X)
        raw = nn_predict(self.model_, self._prepare(X).astype(self.model_.dtype))
        return self._unscale_y(raw.astype(np.float64))


class Cnn1dRegressor(_NetRegressor):
    """1D convolutional radial-length regressor on peak-scaled profiles."""

    def __init__(self, learning_rate: float = 0.001, epochs: int = 100,
                 batch_size: int = 32, optimizer: str = "adam", seed: int = 0,
                 dtype: str = "float32"):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.optimizer = optimizer
        self.seed = seed
        self.dtype = dtype

    def _prepare(self, X):
        return scale_profiles(X)[:, :, None]

    def _build(self, X):
        return build_cnn1d(X.shape[1], init_seed=self.seed, dtype=self.dtype)


class GafResNetRegressor(_NetRegressor):
    """Residual 2D regressor on GAF-encoded profiles."""

    def __init__(self, image_side: int = 64, learning_rate: float = 0.001,
                 epochs: int = 100, batch_size: int = 32, optimizer: str = "adam",
                 seed: int = 0, dtype: str = "float32"):
        self.image_side = image_side
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.optimizer = optimizer
        self.seed = seed
        self.dtype = dtype

    def _prepare(self, X):
        return encode_profiles(X, self.image_side)

    def _build(self, X):
        return build_gaf_resnet_toy(self.image_side, init_seed=self.seed, dtype=self.dtype)
