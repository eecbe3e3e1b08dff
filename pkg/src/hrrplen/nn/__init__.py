"""From-scratch differentiable tensor engine and the benchmark networks."""

from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import grad_check
from .model import LayerSpec, Model, ModelConfig, build_cnn1d, build_gaf_resnet_toy, build_model
from .tensor import Tensor
from .training import (
    Adam,
    SGD,
    TrainConfig,
    TrainReport,
    evaluate_mse,
    make_optimizer,
    mse_loss,
    predict,
    train,
)

__all__ = [
    "Adam",
    "LayerSpec",
    "Model",
    "ModelConfig",
    "SGD",
    "Tensor",
    "TrainConfig",
    "TrainReport",
    "build_cnn1d",
    "build_gaf_resnet_toy",
    "build_model",
    "evaluate_mse",
    "grad_check",
    "load_checkpoint",
    "make_optimizer",
    "mse_loss",
    "predict",
    "save_checkpoint",
    "train",
]
