"""Differentiable layers over numpy buffers.

Activations are channels-last: (batch, length, channels) for 1D and
(batch, height, width, channels) for 2D.  With that layout the im2col
window blocks are contiguous (or near-contiguous) memory, so convolutions
reduce to one large GEMM per direction with no transposes on the hot path;
their input gradients fold back with k strided slice-adds.

Each layer's ``forward(x, training)`` caches what ``backward(grad)`` needs;
backward returns the gradient with respect to the layer input and
accumulates parameter gradients on the layer's Tensors.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided

from ..errors import NoForwardStateError, ShapeMismatchError
from .tensor import Tensor


def he_uniform(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Layer:
    """Base layer: stateless unless a subclass adds parameters or caches."""

    def params(self) -> list[Tensor]:
        return []

    def state_arrays(self) -> list[np.ndarray]:
        """Non-trainable buffers (running statistics) in a fixed order."""
        return []

    def load_state_arrays(self, arrays: list[np.ndarray]) -> None:
        if arrays:
            raise ValueError(f"{type(self).__name__} holds no state arrays")

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _need_cache(self, cache):
        if cache is None:
            raise NoForwardStateError(f"{type(self).__name__}.backward before forward")
        return cache


class ReLU(Layer):
    def __init__(self):
        self._mask = None

    def forward(self, x, training):
        self._mask = x > 0
        return np.maximum(x, 0.0)

    def backward(self, grad):
        mask = self._need_cache(self._mask)
        return grad * mask


class Flatten(Layer):
    def __init__(self):
        self._shape = None

    def forward(self, x, training):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        shape = self._need_cache(self._shape)
        return grad.reshape(shape)


class Dense(Layer):
    """Affine map on (batch, features) input."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator,
                 dtype=np.float64):
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Tensor(he_uniform(rng, (in_features, out_features), in_features, dtype))
        self.bias = Tensor(np.zeros(out_features, dtype=dtype))
        self._x = None

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x, training):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeMismatchError(
                f"Dense expects (batch, {self.in_features}), got {x.shape}"
            )
        self._x = x
        out = x @ self.weight.data
        out += self.bias.data
        return out

    def backward(self, grad):
        x = self._need_cache(self._x)
        self.weight.add_grad(x.T @ grad)
        self.bias.add_grad(grad.sum(axis=0))
        return grad @ self.weight.data.T


class Dropout(Layer):
    """Inverted dropout; identity in eval mode."""

    def __init__(self, rate: float, seed: int = 0):
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate
        self._rng = np.random.default_rng(seed)
        self._mask = None

    def reseed(self, seed: int) -> None:
        self._rng = np.random.default_rng(seed)

    def forward(self, x, training):
        if not training or self.rate == 0.0:
            self._mask = 1.0
            return x
        keep = (self._rng.random(x.shape) >= self.rate).astype(x.dtype)
        keep /= 1.0 - self.rate
        self._mask = keep
        return x * keep

    def backward(self, grad):
        mask = self._need_cache(self._mask)
        return grad * mask


class BatchNorm(Layer):
    """Per-channel normalization over all axes except the last.

    Training mode normalizes with biased batch statistics and updates the
    running mean/variance; eval mode folds the running statistics into a
    single fused scale-and-shift.
    """

    def __init__(self, num_features: int, dtype=np.float64, eps: float = 1e-12,
                 momentum: float = 0.1):
        self.num_features = num_features
        self.eps = eps
        self.momentum = momentum
        self.gamma = Tensor(np.ones(num_features, dtype=dtype))
        self.beta = Tensor(np.zeros(num_features, dtype=dtype))
        self.running_mean = np.zeros(num_features, dtype=dtype)
        self.running_var = np.ones(num_features, dtype=dtype)
        self.update_running = True
        self._cache = None

    def params(self):
        return [self.gamma, self.beta]

    def state_arrays(self):
        return [self.running_mean, self.running_var]

    def load_state_arrays(self, arrays):
        mean, var = arrays
        self.running_mean = mean.copy()
        self.running_var = var.copy()

    def forward(self, x, training):
        if x.ndim < 2 or x.shape[-1] != self.num_features:
            raise ShapeMismatchError(
                f"BatchNorm({self.num_features}) got input of shape {x.shape}"
            )
        axes = tuple(range(x.ndim - 1))
        if not training:
            inv = 1.0 / np.sqrt(self.running_var + self.eps)
            scale = (self.gamma.data * inv).astype(x.dtype)
            shift = (self.beta.data - self.running_mean * scale).astype(x.dtype)
            self._cache = None
            out = x * scale
            out += shift
            return out
        mean = x.mean(axis=axes)
        centered = x - mean
        var = np.mean(centered * centered, axis=axes)
        if self.update_running:
            m = self.momentum
            self.running_mean = (1 - m) * self.running_mean + m * mean
            self.running_var = (1 - m) * self.running_var + m * var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        x_hat = centered
        x_hat *= inv_std
        count = x.size // self.num_features
        self._cache = (x_hat, inv_std, axes, count)
        out = x_hat * self.gamma.data
        out += self.beta.data
        return out

    def backward(self, grad):
        x_hat, inv_std, axes, count = self._need_cache(self._cache)
        self.gamma.add_grad(np.sum(grad * x_hat, axis=axes))
        self.beta.add_grad(grad.sum(axis=axes))
        g_hat = grad * self.gamma.data
        sum_g = g_hat.sum(axis=axes)
        sum_gx = np.sum(g_hat * x_hat, axis=axes)
        out = g_hat
        out *= count
        out -= sum_g
        out -= x_hat * sum_gx
        out *= inv_std / count
        return out


class Conv1d(Layer):
    """1D convolution on (batch, length, channels) with 'same' padding for
    stride 1 (pad = (k-1)//2)."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int,
                 rng: np.random.Generator, stride: int = 1, dtype=np.float64):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.pad = (kernel - 1) // 2
        fan_in = in_channels * kernel
        self.weight = Tensor(he_uniform(rng, (kernel * in_channels, out_channels), fan_in, dtype))
        self.bias = Tensor(np.zeros(out_channels, dtype=dtype))
        self._cache = None

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x, training):
        if x.ndim != 3 or x.shape[2] != self.in_channels:
            raise ShapeMismatchError(
                f"Conv1d expects (batch, length, {self.in_channels}), got {x.shape}"
            )
        n, length, c = x.shape
        k, s, p = self.kernel, self.stride, self.pad
        x_pad = np.pad(x, ((0, 0), (p, p), (0, 0))) if p else x
        l_out = (length + 2 * p - k) // s + 1
        s0, s1, s2 = x_pad.strides
        cols = as_strided(x_pad, shape=(n, l_out, k, c), strides=(s0, s1 * s, s1, s2))
        cols2 = cols.reshape(n * l_out, k * c)
        out = cols2 @ self.weight.data
        out += self.bias.data
        self._cache = (cols2, x.shape, l_out)
        return out.reshape(n, l_out, self.out_channels)

    def backward(self, grad):
        cols2, x_shape, l_out = self._need_cache(self._cache)
        n, length, c = x_shape
        k, s, p = self.kernel, self.stride, self.pad
        g2 = grad.reshape(n * l_out, self.out_channels)
        self.weight.add_grad(cols2.T @ g2)
        self.bias.add_grad(g2.sum(axis=0))
        dcols = (g2 @ self.weight.data.T).reshape(n, l_out, k, c)
        dx_pad = np.zeros((n, length + 2 * p, c), dtype=grad.dtype)
        for j in range(k):
            dx_pad[:, j : j + l_out * s : s, :] += dcols[:, :, j, :]
        return dx_pad[:, p : p + length, :] if p else dx_pad


class Conv2d(Layer):
    """2D convolution on (batch, h, w, channels) with 'same' padding
    (pad = (k-1)//2) and square stride."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int,
                 rng: np.random.Generator, stride: int = 1, dtype=np.float64):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.pad = (kernel - 1) // 2
        fan_in = in_channels * kernel * kernel
        self.weight = Tensor(
            he_uniform(rng, (kernel * kernel * in_channels, out_channels), fan_in, dtype)
        )
        self.bias = Tensor(np.zeros(out_channels, dtype=dtype))
        self._cache = None

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x, training):
        if x.ndim != 4 or x.shape[3] != self.in_channels:
            raise ShapeMismatchError(
                f"Conv2d expects (batch, h, w, {self.in_channels}), got {x.shape}"
            )
        n, h, w, c = x.shape
        k, s, p = self.kernel, self.stride, self.pad
        x_pad = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0))) if p else x
        h_out = (h + 2 * p - k) // s + 1
        w_out = (w + 2 * p - k) // s + 1
        s0, s1, s2, s3 = x_pad.strides
        cols = as_strided(
            x_pad,
            shape=(n, h_out, w_out, k, k, c),
            strides=(s0, s1 * s, s2 * s, s1, s2, s3),
        )
        cols2 = cols.reshape(n * h_out * w_out, k * k * c)
        out = cols2 @ self.weight.data
        out += self.bias.data
        self._cache = (cols2, x.shape, h_out, w_out)
        return out.reshape(n, h_out, w_out, self.out_channels)

    def backward(self, grad):
        cols2, x_shape, h_out, w_out = self._need_cache(self._cache)
        n, h, w, c = x_shape
        k, s, p = self.kernel, self.stride, self.pad
        g2 = grad.reshape(n * h_out * w_out, self.out_channels)
        self.weight.add_grad(cols2.T @ g2)
        self.bias.add_grad(g2.sum(axis=0))
        dcols = (g2 @ self.weight.data.T).reshape(n, h_out, w_out, k, k, c)
        dx_pad = np.zeros((n, h + 2 * p, w + 2 * p, c), dtype=grad.dtype)
        for i in range(k):
            for j in range(k):
                dx_pad[:, i : i + h_out * s : s, j : j + w_out * s : s, :] += dcols[:, :, :, i, j, :]
        if p:
            return dx_pad[:, p : p + h, p : p + w, :]
        return dx_pad


class MaxPool1d(Layer):
    """Non-overlapping max pooling over the length axis; ties route the
    gradient to the first index."""

    def __init__(self, size: int = 2):
        self.size = size
        self._cache = None

    def forward(self, x, training):
        n, length, c = x.shape
        if length % self.size:
            raise ShapeMismatchError(
                f"MaxPool1d({self.size}) needs length divisible by {self.size}, got {length}"
            )
        windows = x.reshape(n, length // self.size, self.size, c)
        idx = windows.argmax(axis=2)
        self._cache = (idx, x.shape)
        return np.take_along_axis(windows, idx[:, :, None, :], axis=2)[:, :, 0, :]

    def backward(self, grad):
        idx, x_shape = self._need_cache(self._cache)
        n, length, c = x_shape
        dwin = np.zeros((n, length // self.size, self.size, c), dtype=grad.dtype)
        np.put_along_axis(dwin, idx[:, :, None, :], grad[:, :, None, :], axis=2)
        return dwin.reshape(x_shape)


class MaxPool2d(Layer):
    """Non-overlapping 2D max pooling with first-index tie-breaking over
    the (dh, dw) window order."""

    def __init__(self, size: int = 2):
        self.size = size
        self._cache = None

    def forward(self, x, training):
        n, h, w, c = x.shape
        s = self.size
        if h % s or w % s:
            raise ShapeMismatchError(
                f"MaxPool2d({s}) needs h, w divisible by {s}, got {x.shape}"
            )
        windows = (
            x.reshape(n, h // s, s, w // s, s, c)
            .transpose(0, 1, 3, 2, 4, 5)
            .reshape(n, h // s, w // s, s * s, c)
        )
        idx = windows.argmax(axis=3)
        self._cache = (idx, x.shape)
        return np.take_along_axis(windows, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]

    def backward(self, grad):
        idx, x_shape = self._need_cache(self._cache)
        n, h, w, c = x_shape
        s = self.size
        dwin = np.zeros((n, h // s, w // s, s * s, c), dtype=grad.dtype)
        np.put_along_axis(dwin, idx[:, :, :, None, :], grad[:, :, :, None, :], axis=3)
        return (
            dwin.reshape(n, h // s, w // s, s, s, c)
            .transpose(0, 1, 3, 2, 4, 5)
            .reshape(x_shape)
        )


class GlobalAvgPool2d(Layer):
    def __init__(self):
        self._shape = None

    def forward(self, x, training):
        if x.ndim != 4:
            raise ShapeMismatchError(f"GlobalAvgPool2d expects 4D input, got {x.shape}")
        self._shape = x.shape
        return x.mean(axis=(1, 2))

    def backward(self, grad):
        n, h, w, c = self._need_cache(self._shape)
        return np.broadcast_to(grad[:, None, None, :], (n, h, w, c)) / (h * w)


class ResidualBlock(Layer):
    """Main path plus skip connection, joined by addition and a final ReLU.

    ``skip`` is None for an identity shortcut, otherwise a projection path
    (1x1 convolution + BatchNorm) matching the main path's output shape.
    """

    def __init__(self, main: list[Layer], skip: list[Layer] | None = None):
        self.main = main
        self.skip = skip
        self._mask = None

    def _children(self) -> list[Layer]:
        return list(self.main) + (list(self.skip) if self.skip else [])

    def params(self):
        out = []
        for layer in self._children():
            out.extend(layer.params())
        return out

    def state_arrays(self):
        out = []
        for layer in self._children():
            out.extend(layer.state_arrays())
        return out

    def load_state_arrays(self, arrays):
        pos = 0
        for layer in self._children():
            n = len(layer.state_arrays())
            layer.load_state_arrays(arrays[pos : pos + n])
            pos += n

    def forward(self, x, training):
        a = x
        for layer in self.main:
            a = layer.forward(a, training)
        s = x
        if self.skip:
            for layer in self.skip:
                s = layer.forward(s, training)
        if a.shape != s.shape:
            raise ShapeMismatchError(
                f"residual join mismatch: main {a.shape} vs skip {s.shape}"
            )
        a += s
        self._mask = a > 0
        return np.maximum(a, 0.0)

    def backward(self, grad):
        mask = self._need_cache(self._mask)
        g = grad * mask
        g_main = g
        for layer in reversed(self.main):
            g_main = layer.backward(g_main)
        g_skip = g
        if self.skip:
            for layer in reversed(self.skip):
                g_skip = layer.backward(g_skip)
        return g_main + g_skip
