"""Declarative run configuration.

One YAML file drives every CLI command.  All fields have defaults; unknown
keys are rejected with the offending dotted path so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .simulate import DEFAULT_GEOMETRIES, RadarConfig, TargetGeometry


def _take(d: dict, section: str, cls, path: str):
    raw = d.pop(section, None)
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}{section} must be a mapping")
    return cls.from_dict(raw, f"{path}{section}.")


def _reject_unknown(d: dict, allowed: set[str], path: str) -> None:
    for key in d:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}")


@dataclass
class RadarSection:
    f_start: float = 8.5e9
    f_stop: float = 11.5e9
    f_step: float = 5.0e6
    profile_len: int = 500

    @staticmethod
    def from_dict(d: dict, path: str) -> "RadarSection":
        _reject_unknown(d, {"f_start", "f_stop", "f_step", "profile_len"}, path)
        return RadarSection(**d)


@dataclass
class GridSection:
    """Inclusive linspace: ``count`` values from ``start`` to ``stop``."""

    start: float = 0.0
    stop: float = 60.0
    count: int = 5

    @staticmethod
    def from_dict(d: dict, path: str) -> "GridSection":
        _reject_unknown(d, {"start", "stop", "count"}, path)
        g = GridSection(**d)
        if g.count < 1:
            raise ConfigError(f"{path}count must be positive")
        return g

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass
class TrainSection:
    epochs: int = 30
    learning_rate: float = 0.001
    batch_size: int = 32
    optimizer: str = "adam"
    dtype: str = "float32"

    @staticmethod
    def from_dict(d: dict, path: str) -> "TrainSection":
        _reject_unknown(d, {"epochs", "learning_rate", "batch_size", "optimizer", "dtype"}, path)
        t = TrainSection(**d)
        if t.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"{path}optimizer must be 'sgd' or 'adam'")
        if t.dtype not in ("float32", "float64"):
            raise ConfigError(f"{path}dtype must be 'float32' or 'float64'")
        return t


@dataclass
class ModelSection:
    image_side: int = 64

    @staticmethod
    def from_dict(d: dict, path: str) -> "ModelSection":
        _reject_unknown(d, {"image_side"}, path)
        return ModelSection(**d)


@dataclass
class ThresholdSection:
    k: float = 5.0
    noise_window: int = 25
    k_grid: list[float] | None = None

    @staticmethod
    def from_dict(d: dict, path: str) -> "ThresholdSection":
        _reject_unknown(d, {"k", "noise_window", "k_grid"}, path)
        return ThresholdSection(**d)


@dataclass
class SeedsSection:
    base: int = 7
    runs: list[int] = field(default_factory=lambda: [0, 1, 2])

    @staticmethod
    def from_dict(d: dict, path: str) -> "SeedsSection":
        _reject_unknown(d, {"base", "runs"}, path)
        return SeedsSection(**d)


@dataclass
class RunConfig:
    """Full experiment description with desk-scale defaults.

    Defaults: six built-in fighter-scale geometries, a 5-point theta grid
    over [0, 60] degrees, a 40-point phi grid over [0, 58.5] degrees,
    500-bin profiles, SNR conditions {10, 30} dB, 64x64 GAF images, and
    30-epoch Adam training at learning rate 0.001.
    """

    radar: RadarSection = field(default_factory=RadarSection)
    geometries: list = field(default_factory=lambda: sorted(DEFAULT_GEOMETRIES))
    theta: GridSection = field(default_factory=lambda: GridSection(0.0, 60.0, 5))
    phi: GridSection = field(default_factory=lambda: GridSection(0.0, 58.5, 40))
    snr_db: list[float] = field(default_factory=lambda: [10.0, 30.0])
    train: TrainSection = field(default_factory=TrainSection)
    model: ModelSection = field(default_factory=ModelSection)
    threshold: ThresholdSection = field(default_factory=ThresholdSection)
    seeds: SeedsSection = field(default_factory=SeedsSection)
    out_dir: str = "runs/default"

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("top-level config must be a mapping")
        d = dict(d)
        cfg = RunConfig(
            radar=_take(d, "radar", RadarSection, ""),
            theta=_take(d, "theta", GridSection, ""),
            phi=_take(d, "phi", GridSection, ""),
            train=_take(d, "train", TrainSection, ""),
            model=_take(d, "model", ModelSection, ""),
            threshold=_take(d, "threshold", ThresholdSection, ""),
            seeds=_take(d, "seeds", SeedsSection, ""),
        )
        if "geometries" in d:
            cfg.geometries = d.pop("geometries")
        if "snr_db" in d:
            raw = d.pop("snr_db")
            cfg.snr_db = [raw] if isinstance(raw, (int, float)) else list(raw)
        if "out_dir" in d:
            cfg.out_dir = str(d.pop("out_dir"))
        _reject_unknown(d, set(), "")
        return cfg

    @staticmethod
    def from_yaml(path) -> "RunConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        return RunConfig.from_dict(raw or {})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["geometries"] = [
            g if isinstance(g, (str, dict)) else str(g) for g in self.geometries
        ]
        return d

    # -- materialized views -------------------------------------------------

    def radar_config(self) -> RadarConfig:
        try:
            return RadarConfig(
                f_start=self.radar.f_start,
                f_stop=self.radar.f_stop,
                f_step=self.radar.f_step,
                profile_len=self.radar.profile_len,
            )
        except ValueError as exc:
            raise ConfigError(f"radar: {exc}") from None

    def geometry_list(self) -> list[TargetGeometry]:
        out = []
        for item in self.geometries:
            if isinstance(item, str):
                if item not in DEFAULT_GEOMETRIES:
                    raise ConfigError(
                        f"geometries: unknown geometry {item!r}; "
                        f"built-ins are {sorted(DEFAULT_GEOMETRIES)}"
                    )
                out.append(DEFAULT_GEOMETRIES[item])
            elif isinstance(item, dict):
                item = dict(item)
                try:
                    name = item.pop("name")
                    geometry = TargetGeometry(
                        name=name,
                        length_l=float(item.pop("length_l")),
                        wingspan_w=float(item.pop("wingspan_w")),
                        height_h=float(item.pop("height_h")),
                        scatterers=tuple(
                            (tuple(map(float, s[:3])), float(s[3]))
                            for s in item.pop("scatterers")
                        ),
                    )
                except (KeyError, ValueError, TypeError) as exc:
                    raise ConfigError(f"geometries: invalid inline geometry: {exc}") from None
                if item:
                    raise ConfigError(
                        f"geometries: unknown key {next(iter(item))!r} in inline geometry"
                    )
                out.append(geometry)
            else:
                raise ConfigError("geometries entries must be names or mappings")
        if not out:
            raise ConfigError("geometries: at least one geometry is required")
        return out

    def theta_grid(self) -> np.ndarray:
        return self.theta.values()

    def phi_grid(self) -> np.ndarray:
        return self.phi.values()
