"""Gramian Angular Field encoding of range profiles.

A sequence x is min-max rescaled into [-1, 1], mapped to polar form
(angle phi_i = arccos(x_hat_i), radius r_i = i/N), and expanded into the
square matrix G[i, j] = cos(phi_i + phi_j).  An optional piecewise aggregate
approximation (segment means) reduces the sequence before encoding so the
image side can be smaller than the profile length.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DegenerateSequenceError
from .simulate import HrrpSequence
from .validation import as_float_array, check_profile_matrix

_CLAMP_TOL = 1e-12


def normalize(x) -> np.ndarray:
    """Min-max rescale a sequence into [-1, 1].

    Uses the standard form ((x - max) + (x - min)) / (max - min), so the
    minimum maps exactly to -1 and the maximum exactly to +1.  (Some
    write-ups print this rescale with swapped signs in the numerator and a
    sum in the denominator; that variant does not land in [-1, 1] and is not
    what is implemented here.)
    """
    x = as_float_array(x, name="x", ndim=1)
    if x.size < 2:
        raise ValueError("sequence must have at least 2 samples")
    lo, hi = x.min(), x.max()
    if hi == lo:
        raise DegenerateSequenceError("constant sequence has no min-max range")
    out = ((x - hi) + (x - lo)) / (hi - lo)
    return out


def to_polar(x_hat) -> tuple[np.ndarray, np.ndarray]:
    """Map a normalized sequence to polar form.

    Returns (angles, radii): angles = arccos(x_hat) in [0, pi] and radii
    i/N for i = 1..N.  Values within 1e-12 of the [-1, 1] boundary are
    clamped before arccos to absorb floating-point drift.
    """
    x_hat = as_float_array(x_hat, name="x_hat", ndim=1)
    if np.any(np.abs(x_hat) > 1.0 + _CLAMP_TOL):
        raise ValueError("normalized values must lie in [-1, 1]")
    angles = np.arccos(np.clip(x_hat, -1.0, 1.0))
    n = x_hat.size
    radii = np.arange(1, n + 1, dtype=np.float64) / n
    return angles, radii


def gaf_matrix(angles) -> np.ndarray:
    """Gramian angular sum matrix G[i, j] = cos(angles_i + angles_j)."""
    angles = as_float_array(angles, name="angles", ndim=1)
    return np.cos(angles[:, None] + angles[None, :])


def paa_downsample(x, target_len: int) -> np.ndarray:
    """Piecewise aggregate approximation: means of near-equal segments.

    Splits the index range into ``target_len`` contiguous segments with
    boundaries floor(i * n / target_len) and returns each segment's mean.
    """
    x = as_float_array(x, name="x", ndim=1)
    n = x.size
    if target_len < 2:
        raise ValueError("target_len must be at least 2")
    if target_len > n:
        raise ValueError(f"target_len {target_len} exceeds sequence length {n}")
    if target_len == n:
        return x.copy()
    bounds = (np.arange(target_len + 1) * n) // target_len
    sums = np.add.reduceat(x, bounds[:-1])
    return sums / np.diff(bounds)


def encode(hrrp, image_side: int) -> np.ndarray:
    """Encode a profile as an image_side x image_side GAF image.

    Pipeline order is fixed: PAA downsample, then normalize, then polar
    mapping, then the Gramian matrix.  Downsampling the 1D sequence first
    (rather than resizing the image after) preserves the Gram structure of
    the output.
    """
    bins = hrrp.bins if isinstance(hrrp, HrrpSequence) else as_float_array(hrrp, ndim=1)
    reduced = paa_downsample(bins, image_side)
    x_hat = normalize(reduced)
    angles, _ = to_polar(x_hat)
    return gaf_matrix(angles)


class GramianAngularField(BaseEstimator, TransformerMixin):
    """Transformer turning a batch of profiles into GAF images.

    Parameters
    ----------
    image_side : int
        Side length of the square output images; must not exceed the
        profile length.
    """

    def __init__(self, image_side: int = 64):
        self.image_side = image_side

    def fit(self, X, y=None):
        check_profile_matrix(X)
        return self

    def transform(self, X) -> np.ndarray:
        X = check_profile_matrix(X)
        if self.image_side > X.shape[1]:
            raise ValueError(
                f"image_side {self.image_side} exceeds profile length {X.shape[1]}"
            )
        return np.stack([encode(row, self.image_side) for row in X])


def save_csv(matrix, path) -> None:
    """Dump a float matrix as CSV with lossless repr formatting."""
    matrix = as_float_array(matrix, name="matrix", ndim=2)
    with open(path, "w") as fh:
        for row in matrix:
            fh.write(",".join(repr(v) for v in row.tolist()) + "\n")


def save_pgm(matrix, path) -> None:
    """Dump a [-1, 1] matrix as an 8-bit grayscale binary PGM."""
    matrix = as_float_array(matrix, name="matrix", ndim=2)
    levels = np.clip(np.rint((matrix + 1.0) / 2.0 * 255.0), 0, 255).astype(np.uint8)
    h, w = levels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(levels.tobytes())
