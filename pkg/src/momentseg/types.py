"""Core data types shared across the package.

All arrays are numpy-backed. Images and label maps are stored as 2-D arrays
of shape (height, width) in row-major order with the origin at the top-left
pixel. Probability vectors live on the simplex and are validated on
construction with a small tolerance so that estimator outputs and
deserialized files are both accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DiscreteImage",
    "RgbImage",
    "Segmentation",
    "ModelSet",
    "MomentEstimates",
]


def _as_2d_int(arr, name: str) -> np.ndarray:
    a = np.asarray(arr)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.issubdtype(a.dtype, np.integer):
        raise ValueError(f"{name} must have an integer dtype, got {a.dtype}")
    return np.ascontiguousarray(a, dtype=np.int32)


@dataclass
class DiscreteImage:
    """A palette-indexed image: every pixel holds an index in [0, palette_size)."""

    width: int
    height: int
    palette_size: int
    pixels: np.ndarray  # (height, width) int32

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.palette_size < 1:
            raise ValueError("palette_size must be positive")
        self.pixels = _as_2d_int(self.pixels, "pixels")
        if self.pixels.shape != (self.height, self.width):
            raise ValueError(
                f"pixels shape {self.pixels.shape} does not match "
                f"(height, width)=({self.height}, {self.width})"
            )
        if self.pixels.size and (
            self.pixels.min() < 0 or self.pixels.max() >= self.palette_size
        ):
            raise ValueError("pixel values must lie in [0, palette_size)")

    @classmethod
    def from_array(cls, pixels, palette_size: int) -> "DiscreteImage":
        a = np.asarray(pixels)
        return cls(width=a.shape[1], height=a.shape[0],
                   palette_size=palette_size, pixels=a)


@dataclass
class RgbImage:
    """An 8-bit-per-channel RGB image, shape (height, width, 3)."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        a = np.asarray(self.pixels)
        if a.ndim != 3 or a.shape[2] != 3:
            raise ValueError(f"pixels must have shape (h, w, 3), got {a.shape}")
        if a.shape[:2] != (self.height, self.width):
            raise ValueError("pixels shape does not match (height, width)")
        if not np.issubdtype(a.dtype, np.integer):
            raise ValueError("pixels must have an integer dtype")
        if a.size and (a.min() < 0 or a.max() > 255):
            raise ValueError("channel values must lie in [0, 255]")
        self.pixels = np.ascontiguousarray(a, dtype=np.uint8)

    @classmethod
    def from_array(cls, pixels) -> "RgbImage":
        a = np.asarray(pixels)
        return cls(width=a.shape[1], height=a.shape[0], pixels=a)


@dataclass
class Segmentation:
    """A per-pixel label map with labels in [0, num_regions)."""

    width: int
    height: int
    num_regions: int
    labels: np.ndarray  # (height, width) int32

    def __post_init__(self):
        if self.num_regions < 1:
            raise ValueError("num_regions must be positive")
        self.labels = _as_2d_int(self.labels, "labels")
        if self.labels.shape != (self.height, self.width):
            raise ValueError("labels shape does not match (height, width)")
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= self.num_regions
        ):
            raise ValueError("labels must lie in [0, num_regions)")

    @classmethod
    def from_array(cls, labels, num_regions: int) -> "Segmentation":
        a = np.asarray(labels)
        return cls(width=a.shape[1], height=a.shape[0],
                   num_regions=num_regions, labels=a)


@dataclass
class ModelSet:
    """K per-region appearance models over L palette values, plus region proportions.

    ``theta`` has one model per row: ``theta[s]`` is the length-L color
    distribution of region s. ``weights`` is the length-K vector of region
    size proportions. Both live on the probability simplex.
    """

    palette_size: int
    num_regions: int
    theta: np.ndarray    # (K, L) float64, rows on the simplex
    weights: np.ndarray  # (K,) float64, on the simplex

    def __post_init__(self):
        self.theta = np.ascontiguousarray(np.asarray(self.theta, dtype=np.float64))
        self.weights = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        if self.theta.shape != (self.num_regions, self.palette_size):
            raise ValueError(
                f"theta shape {self.theta.shape} does not match "
                f"(K, L)=({self.num_regions}, {self.palette_size})"
            )
        if self.weights.shape != (self.num_regions,):
            raise ValueError("weights length must equal num_regions")

    def validate(self, tol: float = 1e-6) -> None:
        """Raise ValueError if any stored vector strays from the simplex by more than tol."""
        for s in range(self.num_regions):
            row = self.theta[s]
            if row.min() < -tol or abs(row.sum() - 1.0) > tol:
                raise ValueError(f"theta[{s}] violates the simplex by more than {tol}")
        if self.weights.min() < -tol or abs(self.weights.sum() - 1.0) > tol:
            raise ValueError(f"weights violate the simplex by more than {tol}")


@dataclass
class MomentEstimates:
    """First-, second- and third-order co-occurrence statistics of an image.

    ``alpha`` is the color histogram (normalized), ``beta`` the symmetric
    pair co-occurrence distribution at offset distance ``radius``, and
    ``gamma_slices[k]`` the unnormalized triple co-occurrence counts for
    the anchor color ``slice_colors[k]``. Slices are symmetric in their two
    in-plane indices by construction and are deliberately left unnormalized:
    the downstream factorization is invariant to their global scale.
    """

    palette_size: int
    radius: int
    alpha: np.ndarray         # (L,) float64
    beta: np.ndarray          # (L, L) float64, symmetric, sums to 1
    slice_colors: np.ndarray  # (ell,) int32, distinct, most frequent first
    gamma_slices: np.ndarray  # (ell, L, L) counts (int64) or analytic values
    beta_mode: str = "ring"

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        self.beta = np.asarray(self.beta, dtype=np.float64)
        self.slice_colors = np.asarray(self.slice_colors, dtype=np.int32)
        self.gamma_slices = np.asarray(self.gamma_slices)
        L = self.palette_size
        if self.alpha.shape != (L,):
            raise ValueError("alpha must have length palette_size")
        if self.beta.shape != (L, L):
            raise ValueError("beta must be (L, L)")
        ell = self.slice_colors.shape[0]
        if not (1 <= ell <= L):
            raise ValueError("need 1 <= number of slices <= palette_size")
        if len(np.unique(self.slice_colors)) != ell:
            raise ValueError("slice_colors must be distinct")
        if self.gamma_slices.shape != (ell, L, L):
            raise ValueError("gamma_slices must be (ell, L, L)")
        if self.beta_mode not in ("ring", "axis"):
            raise ValueError("beta_mode must be 'ring' or 'axis'")

    @property
    def num_slices(self) -> int:
        return int(self.slice_colors.shape[0])
