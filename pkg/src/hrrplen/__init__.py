"""Radial-length estimation from high resolution range profiles.

The package bundles synthetic stepped-frequency HRRP generation, Gramian
Angular Field encoding, a detection-threshold baseline, a from-scratch
differentiable network engine with 1D-CNN and residual 2D regressors, and a
benchmark harness comparing the three methods across SNR conditions.
"""

from .bench import ComparisonTable, MreReport, mean_relative_error, run_comparison
from .config import RunConfig
from .estimators import Cnn1dRegressor, GafResNetRegressor
from .gaf import GramianAngularField, encode, gaf_matrix, normalize, paa_downsample, to_polar
from .simulate import (
    AspectAngle,
    DEFAULT_GEOMETRIES,
    DatasetSplit,
    HrrpSequence,
    RadarConfig,
    TargetGeometry,
    add_noise,
    generate_dataset,
    project_scatterers,
    radial_length_label,
    synthesize_hrrp,
)
from .threshold import ThresholdConfig, ThresholdLengthEstimator, estimate_noise_level, estimate_radial_length

__version__ = "0.1.0"

__all__ = [
    "AspectAngle",
    "Cnn1dRegressor",
    "ComparisonTable",
    "DEFAULT_GEOMETRIES",
    "DatasetSplit",
    "GafResNetRegressor",
    "GramianAngularField",
    "HrrpSequence",
    "MreReport",
    "RadarConfig",
    "RunConfig",
    "TargetGeometry",
    "ThresholdConfig",
    "ThresholdLengthEstimator",
    "add_noise",
    "encode",
    "estimate_noise_level",
    "estimate_radial_length",
    "gaf_matrix",
    "generate_dataset",
    "mean_relative_error",
    "normalize",
    "paa_downsample",
    "project_scatterers",
    "radial_length_label",
    "run_comparison",
    "synthesize_hrrp",
    "to_polar",
]
