"""Model assembly: serializable layer specs and the two benchmark networks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NoForwardStateError, ShapeMismatchError
from . import layers as L
from .tensor import Tensor


@dataclass(frozen=True)
class LayerSpec:
    """One layer in a model description; ``params`` must stay JSON-safe."""

    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @staticmethod
    def from_dict(d: dict) -> "LayerSpec":
        return LayerSpec(kind=d["kind"], params=d["params"])


@dataclass(frozen=True)
class ModelConfig:
    """Ordered layer specs plus everything needed to rebuild the network."""

    name: str
    layers: tuple[LayerSpec, ...]
    input_shape: tuple[int, ...]
    init_seed: int = 0
    dtype: str = "float64"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "layers": [spec.to_dict() for spec in self.layers],
            "input_shape": list(self.input_shape),
            "init_seed": self.init_seed,
            "dtype": self.dtype,
        }

    @staticmethod
    def from_dict(d: dict) -> "ModelConfig":
        return ModelConfig(
            name=d["name"],
            layers=tuple(LayerSpec.from_dict(s) for s in d["layers"]),
            input_shape=tuple(d["input_shape"]),
            init_seed=int(d["init_seed"]),
            dtype=d["dtype"],
        )


def _build_layer(spec: LayerSpec, rng: np.random.Generator, dtype) -> L.Layer:
    kind, p = spec.kind, spec.params
    if kind == "conv1d":
        return L.Conv1d(p["in_channels"], p["out_channels"], p["kernel"], rng,
                        stride=p.get("stride", 1), dtype=dtype)
    if kind == "conv2d":
        return L.Conv2d(p["in_channels"], p["out_channels"], p["kernel"], rng,
                        stride=p.get("stride", 1), dtype=dtype)
    if kind == "batchnorm":
        return L.BatchNorm(p["num_features"], dtype=dtype)
    if kind == "relu":
        return L.ReLU()
    if kind == "maxpool1d":
        return L.MaxPool1d(p["size"])
    if kind == "maxpool2d":
        return L.MaxPool2d(p["size"])
    if kind == "dense":
        return L.Dense(p["in_features"], p["out_features"], rng, dtype=dtype)
    if kind == "dropout":
        return L.Dropout(p["rate"])
    if kind == "flatten":
        return L.Flatten()
    if kind == "global_avg_pool2d":
        return L.GlobalAvgPool2d()
    if kind == "residual":
        main = [_build_layer(LayerSpec.from_dict(s), rng, dtype) for s in p["main"]]
        skip = None
        if p.get("skip"):
            skip = [_build_layer(LayerSpec.from_dict(s), rng, dtype) for s in p["skip"]]
        return L.ResidualBlock(main, skip)
    raise ValueError(f"unknown layer kind {kind!r}")


class Model:
    """A layer stack built from a ModelConfig.

    Parameters are initialized in declaration order from a generator seeded
    with ``config.init_seed`` (He-uniform for convolution/dense weights,
    zeros for biases, identity scale/shift for batch norm), so construction
    is fully reproducible.
    """

    def __init__(self, config: ModelConfig):
        self.config = config
        self.dtype = np.dtype(config.dtype)
        rng = np.random.default_rng(config.init_seed)
        self.layers = [_build_layer(spec, rng, self.dtype) for spec in config.layers]
        self._ran_training_forward = False

    @property
    def input_shape(self) -> tuple[int, ...]:
        return self.config.input_shape

    def parameters(self) -> list[Tensor]:
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def num_parameters(self) -> int:
        return sum(t.size for t in self.parameters())

    def state_arrays(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend(layer.state_arrays())
        return out

    def load_state_arrays(self, arrays: list[np.ndarray]) -> None:
        pos = 0
        for layer in self.layers:
            n = len(layer.state_arrays())
            layer.load_state_arrays(arrays[pos : pos + n])
            pos += n
        if pos != len(arrays):
            raise ValueError("state array count mismatch")

    def zero_grad(self) -> None:
        for t in self.parameters():
            t.zero_grad()

    def _walk(self, layer_filter):
        stack = list(self.layers)
        while stack:
            layer = stack.pop()
            if isinstance(layer, L.ResidualBlock):
                stack.extend(layer.main)
                if layer.skip:
                    stack.extend(layer.skip)
            if layer_filter(layer):
                yield layer

    def seed_dropout(self, seed: int) -> None:
        for i, layer in enumerate(self._walk(lambda l: isinstance(l, L.Dropout))):
            layer.reseed(seed + i)

    def set_dropout_rate(self, rate: float) -> list[float]:
        old = []
        for layer in self._walk(lambda l: isinstance(l, L.Dropout)):
            old.append(layer.rate)
            layer.rate = rate
        return old

    def restore_dropout_rate(self, rates: list[float]) -> None:
        for layer, rate in zip(self._walk(lambda l: isinstance(l, L.Dropout)), rates):
            layer.rate = rate

    def set_batchnorm_update(self, update: bool) -> None:
        for layer in self._walk(lambda l: isinstance(l, L.BatchNorm)):
            layer.update_running = update

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.shape[1:] != self.input_shape:
            raise ShapeMismatchError(
                f"model {self.config.name!r} expects input shape "
                f"(batch, {', '.join(map(str, self.input_shape))}), got {x.shape}"
            )
        for i, layer in enumerate(self.layers):
            try:
                x = layer.forward(x, training)
            except ShapeMismatchError as exc:
                raise ShapeMismatchError(f"layer {i}: {exc}") from None
        self._ran_training_forward = training
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if not self._ran_training_forward:
            raise NoForwardStateError("backward requires a training-mode forward pass")
        g = np.asarray(grad, dtype=self.dtype)
        for i, layer in enumerate(reversed(self.layers)):
            try:
                g = layer.backward(g)
            except ShapeMismatchError as exc:
                raise ShapeMismatchError(f"layer {len(self.layers) - 1 - i}: {exc}") from None
        return g


def build_model(config: ModelConfig) -> Model:
    return Model(config)


def _conv_bn_relu_1d(in_ch: int, out_ch: int) -> list[LayerSpec]:
    return [
        LayerSpec("conv1d", {"in_channels": in_ch, "out_channels": out_ch, "kernel": 3}),
        LayerSpec("batchnorm", {"num_features": out_ch}),
        LayerSpec("relu"),
    ]


def build_cnn1d(profile_len: int, init_seed: int = 0, dtype: str = "float64") -> ModelConfig:
    """Sequence regressor: three conv blocks (32/64/128 filters, kernel 3,
    stride 1, each followed by batch norm and ReLU), a size-2 max pool, and
    two fully connected layers ending in a scalar."""
    if profile_len < 8:
        raise ValueError("profile_len must be at least 8")
    pooled = profile_len // 2
    if profile_len % 2:
        raise ValueError("profile_len must be even for the size-2 max pool")
    specs = (
        *_conv_bn_relu_1d(1, 32),
        *_conv_bn_relu_1d(32, 64),
        *_conv_bn_relu_1d(64, 128),
        LayerSpec("maxpool1d", {"size": 2}),
        LayerSpec("flatten"),
        LayerSpec("dense", {"in_features": 128 * pooled, "out_features": 64}),
        LayerSpec("relu"),
        LayerSpec("dense", {"in_features": 64, "out_features": 1}),
    )
    return ModelConfig("cnn1d", specs, (profile_len, 1), init_seed, dtype)


def _residual_spec(in_ch: int, out_ch: int, stride: int) -> LayerSpec:
    main = [
        LayerSpec("conv2d", {"in_channels": in_ch, "out_channels": out_ch,
                             "kernel": 3, "stride": stride}).to_dict(),
        LayerSpec("batchnorm", {"num_features": out_ch}).to_dict(),
        LayerSpec("relu").to_dict(),
        LayerSpec("conv2d", {"in_channels": out_ch, "out_channels": out_ch,
                             "kernel": 3, "stride": 1}).to_dict(),
        LayerSpec("batchnorm", {"num_features": out_ch}).to_dict(),
    ]
    skip = None
    if in_ch != out_ch or stride != 1:
        skip = [
            LayerSpec("conv2d", {"in_channels": in_ch, "out_channels": out_ch,
                                 "kernel": 1, "stride": stride}).to_dict(),
            LayerSpec("batchnorm", {"num_features": out_ch}).to_dict(),
        ]
    return LayerSpec("residual", {"main": main, "skip": skip})


def build_gaf_resnet_toy(image_side: int, init_seed: int = 0,
                         dtype: str = "float64") -> ModelConfig:
    """Single-channel residual regressor for GAF images.

    Stem conv (16 filters) + BN + ReLU, three residual blocks (16->16
    identity, 16->32 and 32->64 with strided 1x1 projections), global
    average pooling, dropout 0.1, and a scalar head.
    """
    if image_side < 8 or image_side % 4:
        raise ValueError("image_side must be a multiple of 4 and at least 8")
    specs = (
        LayerSpec("conv2d", {"in_channels": 1, "out_channels": 16, "kernel": 3, "stride": 1}),
        LayerSpec("batchnorm", {"num_features": 16}),
        LayerSpec("relu"),
        _residual_spec(16, 16, stride=1),
        _residual_spec(16, 32, stride=2),
        _residual_spec(32, 64, stride=2),
        LayerSpec("global_avg_pool2d"),
        LayerSpec("dropout", {"rate": 0.1}),
        LayerSpec("dense", {"in_features": 64, "out_features": 1}),
    )
    return ModelConfig("gaf_resnet_toy", specs, (image_side, image_side, 1), init_seed, dtype)
