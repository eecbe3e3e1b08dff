"""Synthetic HRRP dataset generation for radial-length estimation.

A target is a box-bounded set of point scatterers in its body frame
(x: fuselage axis, y: wing axis, z: vertical axis).  For a viewing aspect
(theta, phi) the radar line of sight is

    u = (cos(phi)*cos(theta), cos(phi)*sin(theta), sin(phi))

and the radial-length label of a target with dimensions (L, W, H) is

    D = L*cos(phi)*cos(theta) + W*cos(phi)*sin(theta) + H*sin(phi).

Profiles are synthesized with a stepped-frequency model: the complex
frequency response of the scatterer set is sampled on the radar's frequency
grid and inverse-DFT'd into a range profile, whose magnitude is the HRRP.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AliasedTargetError, NonPositiveLabelError

SPEED_OF_LIGHT = 2.99792458e8  # m/s

#: Amplitude threshold, relative to the profile peak, below which noiseless
#: IDFT output is treated as numerical dust and zeroed.  Any physical noise
#: or sidelobe sits many orders of magnitude above this.
_DUST_RELATIVE = 1e-12


@dataclass(frozen=True)
class TargetGeometry:
    """A named box target: dimensions in meters plus a point-scatterer set.

    ``scatterers`` is a sequence of (position, amplitude) pairs; positions are
    3-vectors in the body frame and must lie within the bounding box
    [-L/2, L/2] x [-W/2, W/2] x [-H/2, H/2].
    """

    name: str
    length_l: float
    wingspan_w: float
    height_h: float
    scatterers: tuple[tuple[tuple[float, float, float], float], ...]

    def __post_init__(self):
        if min(self.length_l, self.wingspan_w, self.height_h) <= 0:
            raise ValueError(f"geometry {self.name!r}: dimensions must be positive")
        if not self.scatterers:
            raise ValueError(f"geometry {self.name!r}: scatterer set is empty")
        half = np.array([self.length_l, self.wingspan_w, self.height_h]) / 2.0
        for pos, amp in self.scatterers:
            if amp <= 0:
                raise ValueError(f"geometry {self.name!r}: scatterer amplitude must be > 0")
            if np.any(np.abs(np.asarray(pos, dtype=float)) > half + 1e-9):
                raise ValueError(f"geometry {self.name!r}: scatterer {pos} outside the body box")

    def positions(self) -> np.ndarray:
        return np.array([pos for pos, _ in self.scatterers], dtype=np.float64)

    def amplitudes(self) -> np.ndarray:
        return np.array([amp for _, amp in self.scatterers], dtype=np.float64)


@dataclass(frozen=True)
class AspectAngle:
    """Viewing aspect in degrees: theta (azimuth-like), phi (elevation-like)."""

    theta_deg: float
    phi_deg: float

    def __post_init__(self):
        if not (np.isfinite(self.theta_deg) and np.isfinite(self.phi_deg)):
            raise ValueError("aspect angles must be finite")


@dataclass(frozen=True)
class RadarConfig:
    """Stepped-frequency radar settings.

    The frequency grid runs from ``f_start`` to ``f_stop`` in steps of
    ``f_step``; the synthesized profile is center-cropped to ``profile_len``
    range bins.
    """

    f_start: float = 8.5e9
    f_stop: float = 11.5e9
    f_step: float = 5.0e6
    profile_len: int = 500

    def __post_init__(self):
        if self.f_stop <= self.f_start:
            raise ValueError("f_stop must exceed f_start")
        if self.f_step <= 0:
            raise ValueError("f_step must be positive")
        if self.profile_len < 1:
            raise ValueError("profile_len must be positive")
        if self.n_freq_samples < self.profile_len:
            raise ValueError(
                f"frequency grid has {self.n_freq_samples} samples, "
                f"fewer than profile_len={self.profile_len}"
            )

    @property
    def n_freq_samples(self) -> int:
        return int(np.floor((self.f_stop - self.f_start) / self.f_step)) + 1

    @property
    def bandwidth(self) -> float:
        return self.f_stop - self.f_start

    @property
    def range_resolution(self) -> float:
        """Nominal resolution c/(2*bandwidth) in meters."""
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth)

    @property
    def bin_spacing(self) -> float:
        """Exact meters-per-bin of the synthesis IDFT grid, c/(2*N*f_step)."""
        return SPEED_OF_LIGHT / (2.0 * self.n_freq_samples * self.f_step)

    @property
    def unambiguous_window(self) -> float:
        """Unaliased range extent c/(2*f_step) in meters."""
        return SPEED_OF_LIGHT / (2.0 * self.f_step)

    def frequencies(self) -> np.ndarray:
        return self.f_start + np.arange(self.n_freq_samples) * self.f_step


@dataclass
class HrrpSequence:
    """One range profile: non-negative bin amplitudes plus metadata.

    ``iq`` optionally holds the complex pre-magnitude profile the bins were
    taken from; noise injection operates on it when present.
    """

    bins: np.ndarray
    range_resolution: float
    snr_db: float | None = None
    label_d: float | None = None
    iq: np.ndarray | None = None

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.float64)
        if self.bins.ndim != 1:
            raise ValueError("bins must be one-dimensional")
        if np.any(self.bins < 0):
            raise ValueError("bins must be non-negative")
        if self.range_resolution <= 0:
            raise ValueError("range_resolution must be positive")

    def __len__(self) -> int:
        return self.bins.shape[0]


@dataclass
class DatasetSplit:
    """Labeled samples partitioned 8:1:1 into train/val/test."""

    train: list[HrrpSequence]
    val: list[HrrpSequence]
    test: list[HrrpSequence]
    split_seed: int

    def all_samples(self) -> list[HrrpSequence]:
        return list(self.train) + list(self.val) + list(self.test)

    @staticmethod
    def _arrays(samples: list[HrrpSequence]) -> tuple[np.ndarray, np.ndarray]:
        X = np.stack([s.bins for s in samples])
        y = np.array([s.label_d for s in samples], dtype=np.float64)
        return X, y

    def train_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self._arrays(self.train)

    def val_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self._arrays(self.val)

    def test_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self._arrays(self.test)


def line_of_sight(aspect: AspectAngle) -> np.ndarray:
    """Unit line-of-sight vector for a viewing aspect."""
    th = np.radians(aspect.theta_deg)
    ph = np.radians(aspect.phi_deg)
    return np.array([np.cos(ph) * np.cos(th), np.cos(ph) * np.sin(th), np.sin(ph)])


def radial_length_label(geometry: TargetGeometry, aspect: AspectAngle) -> float:
    """Radial-length label D for a geometry viewed from an aspect.

    Raises NonPositiveLabelError when the aspect grid drives D <= 0 (such
    labels cannot serve as relative-error denominators).
    """
    th = np.radians(aspect.theta_deg)
    ph = np.radians(aspect.phi_deg)
    d = (
        geometry.length_l * np.cos(ph) * np.cos(th)
        + geometry.wingspan_w * np.cos(ph) * np.sin(th)
        + geometry.height_h * np.sin(ph)
    )
    if d <= 0:
        raise NonPositiveLabelError(
            f"label D={d:.3f} m <= 0 for geometry {geometry.name!r} at "
            f"theta={aspect.theta_deg}, phi={aspect.phi_deg}"
        )
    return float(d)


def project_scatterers(
    geometry: TargetGeometry, aspect: AspectAngle
) -> tuple[np.ndarray, np.ndarray]:
    """Project scatterers onto the line of sight.

    Returns (range_offsets, amplitudes): signed offsets in meters along the
    line-of-sight direction, and the unchanged reflectivities.
    """
    u = line_of_sight(aspect)
    offsets = geometry.positions() @ u
    return offsets, geometry.amplitudes()


def synthesize_hrrp(
    offsets: np.ndarray, amplitudes: np.ndarray, radar: RadarConfig
) -> HrrpSequence:
    """Synthesize a magnitude range profile from projected scatterers.

    Samples the complex response S(f_k) = sum_m a_m * exp(-j*4*pi*f_k*r_m/c)
    on the stepped-frequency grid, inverse-DFTs it, circularly centers the
    scatterer span, and center-crops to ``radar.profile_len`` bins.  Bins
    below 1e-12 of the peak are zeroed as numerical dust so that noiseless
    on-grid targets produce exactly sparse profiles.
    """
    offsets = np.asarray(offsets, dtype=np.float64)
    amplitudes = np.asarray(amplitudes, dtype=np.float64)
    if offsets.size == 0:
        raise ValueError("no projected scatterers to synthesize")
    freqs = radar.frequencies()
    if freqs.size == 0:
        raise ValueError("empty frequency grid")
    extent = float(offsets.max() - offsets.min())
    if extent >= radar.unambiguous_window:
        raise AliasedTargetError(
            f"projected extent {extent:.2f} m exceeds the unambiguous "
            f"window {radar.unambiguous_window:.2f} m"
        )

    response = np.exp(-4j * np.pi / SPEED_OF_LIGHT * np.outer(freqs, offsets)) @ amplitudes
    profile = np.fft.ifft(response)

    n = radar.n_freq_samples
    spacing = radar.bin_spacing
    center_bin = (offsets.min() + offsets.max()) / 2.0 / spacing
    profile = np.roll(profile, n // 2 - int(np.rint(center_bin)))

    start = (n - radar.profile_len) // 2
    profile = profile[start : start + radar.profile_len]

    mags = np.abs(profile)
    dust = mags < _DUST_RELATIVE * mags.max()
    profile = profile.copy()
    profile[dust] = 0.0
    return HrrpSequence(bins=np.abs(profile), range_resolution=spacing, iq=profile)


def add_noise(hrrp: HrrpSequence, snr_db: float | None, seed: int) -> HrrpSequence:
    """Add complex white Gaussian noise at a given SNR to a profile.

    Noise power is set against the mean squared magnitude of the clean
    profile: 10*log10(mean|s|^2 / sigma^2) = snr_db.  The noise is added to
    the complex pre-magnitude profile (zero-phase fallback when only
    magnitudes are available) and the output re-magnituded.  Deterministic
    for a fixed seed; ``snr_db=None`` or ``inf`` returns the input unchanged.
    """
    if snr_db is None or np.isinf(snr_db):
        return replace(hrrp)
    signal = hrrp.iq if hrrp.iq is not None else hrrp.bins.astype(np.complex128)
    power = float(np.mean(np.abs(signal) ** 2))
    sigma2 = power * 10.0 ** (-snr_db / 10.0)
    rng = np.random.default_rng(seed)
    noise = np.sqrt(sigma2 / 2.0) * (
        rng.standard_normal(signal.shape) + 1j * rng.standard_normal(signal.shape)
    )
    noisy = signal + noise
    return HrrpSequence(
        bins=np.abs(noisy),
        range_resolution=hrrp.range_resolution,
        snr_db=snr_db,
        label_d=hrrp.label_d,
        iq=noisy,
    )


@dataclass
class _Sample:
    sample_id: str
    geometry: str
    theta_deg: float
    phi_deg: float
    sequence: HrrpSequence


def _make_samples(
    geometries: list[TargetGeometry],
    theta_grid_deg: np.ndarray,
    phi_grid_deg: np.ndarray,
    radar: RadarConfig,
    snr_db: float | None,
    noise_seed: int,
) -> list[_Sample]:
    theta_grid_deg = np.asarray(theta_grid_deg, dtype=np.float64)
    phi_grid_deg = np.asarray(phi_grid_deg, dtype=np.float64)
    if theta_grid_deg.size == 0 or phi_grid_deg.size == 0:
        raise ValueError("angle grids must be non-empty")
    n_total = len(geometries) * theta_grid_deg.size * phi_grid_deg.size
    noise_seeds = np.random.SeedSequence(noise_seed).generate_state(n_total)

    samples = []
    i = 0
    for geom in geometries:
        for theta in theta_grid_deg:
            for phi in phi_grid_deg:
                aspect = AspectAngle(float(theta), float(phi))
                label = radial_length_label(geom, aspect)
                offsets, amps = project_scatterers(geom, aspect)
                seq = synthesize_hrrp(offsets, amps, radar)
                seq.label_d = label
                seq = add_noise(seq, snr_db, int(noise_seeds[i]))
                seq.label_d = label
                samples.append(
                    _Sample(f"s{i:06d}_{geom.name}", geom.name, float(theta), float(phi), seq)
                )
                i += 1
    return samples


def split_counts(n: int) -> tuple[int, int, int]:
    """8:1:1 partition sizes with rounding pushed into the test share."""
    n_train = int(round(0.8 * n))
    n_val = int(round(0.1 * n))
    return n_train, n_val, n - n_train - n_val


def generate_dataset(
    geometries: list[TargetGeometry],
    theta_grid_deg,
    phi_grid_deg,
    radar: RadarConfig,
    snr_db: float | None,
    split_seed: int,
    noise_seed: int | None = None,
) -> DatasetSplit:
    """Generate one labeled profile per (geometry, theta, phi) and split 8:1:1.

    The shuffle is a pure function of ``split_seed``; per-sample noise seeds
    derive from ``noise_seed`` (defaults to ``split_seed``).
    """
    if noise_seed is None:
        noise_seed = split_seed
    samples = _make_samples(geometries, theta_grid_deg, phi_grid_deg, radar, snr_db, noise_seed)
    perm = np.random.default_rng(split_seed).permutation(len(samples))
    n_train, n_val, _ = split_counts(len(samples))
    seqs = [samples[j].sequence for j in perm]
    return DatasetSplit(
        train=seqs[:n_train],
        val=seqs[n_train : n_train + n_val],
        test=seqs[n_train + n_val :],
        split_seed=split_seed,
    )


# ---------------------------------------------------------------------------
# Built-in target geometries
# ---------------------------------------------------------------------------


def _box_template(name: str, l: float, w: float, h: float) -> TargetGeometry:
    """Fighter-scale scatterer template: nose, tail, wingtips, fin tip, and
    fixed fuselage points with per-geometry amplitudes."""
    # seeded from the name bytes, not str.hash, so templates survive restarts
    rng = np.random.default_rng(int.from_bytes(name.encode(), "little") % (2**32))
    n_body = 3 + int(rng.integers(0, 6))  # 3..8 fuselage points
    body_x = np.linspace(-0.35 * l, 0.35 * l, n_body)
    scatterers = [
        ((l / 2.0, 0.0, 0.0), 1.0),  # nose
        ((-l / 2.0, 0.0, 0.0), 0.9),  # tail
        ((-0.10 * l, w / 2.0, 0.0), 0.7),  # wingtips
        ((-0.10 * l, -w / 2.0, 0.0), 0.7),
        ((-0.42 * l, 0.0, h / 2.0), 0.6),  # fin tip
    ]
    for x in body_x:
        scatterers.append(((float(x), 0.0, -0.05 * h), float(0.4 + 0.5 * rng.random())))
    return TargetGeometry(name, l, w, h, tuple(scatterers))


DEFAULT_GEOMETRIES: dict[str, TargetGeometry] = {
    g.name: g
    for g in (
        _box_template("kestrel", 17.0, 11.0, 4.5),
        _box_template("goshawk", 18.5, 13.0, 4.8),
        _box_template("merlin", 19.5, 12.0, 5.2),
        _box_template("osprey", 20.5, 14.5, 5.5),
        _box_template("kite", 21.0, 13.5, 5.0),
        _box_template("buzzard", 22.0, 16.0, 6.0),
    )
}


# ---------------------------------------------------------------------------
# Dataset directory format
# ---------------------------------------------------------------------------

LABEL_COLUMNS = ["sample_id", "D_meters", "theta_deg", "phi_deg", "snr_db"]


def save_dataset(
    out_dir,
    geometries: list[TargetGeometry],
    theta_grid_deg,
    phi_grid_deg,
    radar: RadarConfig,
    snr_db: float | None,
    split_seed: int,
    noise_seed: int | None = None,
) -> dict:
    """Write a dataset directory: meta.json + profiles.npy + labels.csv.

    Returns the metadata dict (including the content hash).  Samples are
    stored in canonical generation order; the split is recorded as explicit
    index lists in meta.json.
    """
    from pathlib import Path

    if noise_seed is None:
        noise_seed = split_seed
    samples = _make_samples(geometries, theta_grid_deg, phi_grid_deg, radar, snr_db, noise_seed)
    n = len(samples)
    perm = np.random.default_rng(split_seed).permutation(n)
    n_train, n_val, _ = split_counts(n)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    profiles = np.stack([s.sequence.bins for s in samples])
    labels_buf = io.StringIO()
    writer = csv.writer(labels_buf, lineterminator="\n")
    writer.writerow(LABEL_COLUMNS)
    for s in samples:
        writer.writerow(
            [
                s.sample_id,
                repr(float(s.sequence.label_d)),
                repr(s.theta_deg),
                repr(s.phi_deg),
                "" if snr_db is None else repr(float(snr_db)),
            ]
        )
    labels_text = labels_buf.getvalue()

    digest = hashlib.sha256()
    digest.update(profiles.tobytes())
    digest.update(labels_text.encode())

    meta = {
        "format_version": 1,
        "radar": {
            "f_start": radar.f_start,
            "f_stop": radar.f_stop,
            "f_step": radar.f_step,
            "profile_len": radar.profile_len,
        },
        "range_resolution_m_per_bin": radar.bin_spacing,
        "theta_grid_deg": list(map(float, np.asarray(theta_grid_deg, dtype=float))),
        "phi_grid_deg": list(map(float, np.asarray(phi_grid_deg, dtype=float))),
        "snr_db": snr_db,
        "split_seed": split_seed,
        "noise_seed": noise_seed,
        "geometries": [
            {
                "name": g.name,
                "length_l": g.length_l,
                "wingspan_w": g.wingspan_w,
                "height_h": g.height_h,
                "scatterers": [[*pos, amp] for pos, amp in g.scatterers],
            }
            for g in geometries
        ],
        "split_indices": {
            "train": [int(j) for j in perm[:n_train]],
            "val": [int(j) for j in perm[n_train : n_train + n_val]],
            "test": [int(j) for j in perm[n_train + n_val :]],
        },
        "sha256": digest.hexdigest(),
    }

    np.save(out / "profiles.npy", profiles)
    (out / "labels.csv").write_text(labels_text)
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta


def load_dataset(dataset_dir) -> tuple[DatasetSplit, dict]:
    """Load a dataset directory written by :func:`save_dataset`."""
    from pathlib import Path

    d = Path(dataset_dir)
    meta = json.loads((d / "meta.json").read_text())
    profiles = np.load(d / "profiles.npy")
    resolution = float(meta["range_resolution_m_per_bin"])
    snr_db = meta["snr_db"]

    labels: list[float] = []
    with open(d / "labels.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != LABEL_COLUMNS:
            raise ValueError(f"unexpected labels.csv columns: {header}")
        for row in reader:
            labels.append(float(row[1]))
    if len(labels) != profiles.shape[0]:
        raise ValueError("labels.csv row count does not match profiles.npy")

    def seqs(indices):
        return [
            HrrpSequence(
                bins=profiles[j],
                range_resolution=resolution,
                snr_db=snr_db,
                label_d=labels[j],
            )
            for j in indices
        ]

    idx = meta["split_indices"]
    split = DatasetSplit(
        train=seqs(idx["train"]),
        val=seqs(idx["val"]),
        test=seqs(idx["test"]),
        split_seed=int(meta["split_seed"]),
    )
    return split, meta
