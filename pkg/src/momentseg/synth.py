"""Synthetic ground-truth masks and per-region pixel generators.

Masks are pure integer/float geometry with no randomness, built from a fixed
set of shapes painted in label order over a background (later shapes
overwrite earlier ones). With pixel centers (X, Y) = (col+0.5, row+0.5),
m = min(W, H), disk center (cx, cy) = (0.40 W, 0.45 H):

* two_region:   label 1 on the off-center disk of radius 0.30 m.
* three_region: adds label 2 on the C-shaped annular arm with radii
  [0.33 m, 0.44 m] and polar angle atan2(Y-cy, X-cx) in [-160 deg, 90 deg]
  (the gap faces down-left, where the five-region square goes).
* four_region:  adds label 3 on the sinusoid band
  |X - (0.70 W + 0.14 W sin(2 pi Y / H))| <= max(0.03 m, 1); the 6% band
  width keeps the smallest region resolvable from 300x300 moment
  statistics.
* five_region:  inserts label 3 on a 0.30 m square anchored at
  (round(0.68 H), round(0.06 W)) with three thin spikes (width
  max(1, round(0.01 m)), length round(0.08 m)) off its right edge and two
  off its top edge; the sinusoid band is painted last as label 4.

Later shapes overwrite earlier ones, so the band may cut through the disk
and the annulus; region sizes below are therefore measured, not closed-form.

Pixel processes: the normal-mixture process draws each pixel from a
truncated normal on [1, L] centered at its region's mean (K maximally
spaced means from 1 to L), rounds to the nearest integer and shifts to a
0-based palette; the random-model process draws one uniform point of the
color simplex per region and samples pixels from it. Both are IID within
regions given the seed. The block-textured variant replicates one draw per
period x period cell to create short-range dependence while preserving
per-pixel marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .types import DiscreteImage, ModelSet, Segmentation

__all__ = [
    "MaskSpec",
    "GenConfig",
    "MASK_KINDS",
    "make_mask",
    "mask_regions",
    "gen_gmm",
    "gen_rand",
    "gen_block_textured",
    "generate",
    "models_from_gt",
    "gmm_means",
]

MASK_KINDS = ("two_region", "three_region", "four_region", "five_region")
_KIND_REGIONS = {k: i + 2 for i, k in enumerate(MASK_KINDS)}


@dataclass
class MaskSpec:
    kind: str
    width: int
    height: int

    def __post_init__(self):
        if self.kind not in MASK_KINDS:
            raise ValueError(f"unknown mask kind {self.kind!r}")
        if self.width < 50 or self.height < 50:
            raise ValueError("masks need width and height >= 50 so that "
                             "thin structures survive rasterization")


@dataclass
class GenConfig:
    """Pixel-process configuration: process in {'gmm', 'rand'}."""

    process: str
    palette_size: int
    sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.process not in ("gmm", "rand"):
            raise ValueError("process must be 'gmm' or 'rand'")
        if self.process == "gmm":
            if self.sigma is None or self.sigma <= 0:
                raise ValueError("the gmm process needs sigma > 0")
        if self.palette_size < 2:
            raise ValueError("palette_size must be >= 2")


def mask_regions(kind: str) -> int:
    return _KIND_REGIONS[kind]


def make_mask(spec: MaskSpec) -> Segmentation:
    """Deterministic parametric ground-truth mask (see module docstring)."""
    w, h = spec.width, spec.height
    K = _KIND_REGIONS[spec.kind]
    m = min(w, h)
    X, Y = np.meshgrid(np.arange(w) + 0.5, np.arange(h) + 0.5)
    cx, cy = 0.40 * w, 0.45 * h
    dx, dy = X - cx, Y - cy
    dist = np.hypot(dx, dy)

    labels = np.zeros((h, w), dtype=np.int32)
    labels[dist <= 0.30 * m] = 1
    if K >= 3:
        ang = np.degrees(np.arctan2(dy, dx))
        arm = (dist >= 0.33 * m) & (dist <= 0.44 * m) & (ang >= -160.0) & (ang <= 90.0)
        labels[arm] = 2
    if K >= 5:
        r0, c0 = round(0.68 * h), round(0.06 * w)
        side = max(1, round(0.30 * m))
        thick = max(1, round(0.01 * m))
        reach = max(1, round(0.08 * m))
        labels[r0:r0 + side, c0:c0 + side] = 3
        for k in range(3):  # spikes off the right edge
            rs = r0 + round((0.03 + 0.06 * k) * m)
            labels[rs:rs + thick, c0 + side:c0 + side + reach] = 3
        for k in range(2):  # spikes off the top edge
            cs = c0 + round((0.04 + 0.10 * k) * m)
            labels[max(0, r0 - reach):r0, cs:cs + thick] = 3
    if K >= 4:
        center = 0.70 * w + 0.14 * w * np.sin(2.0 * math.pi * Y / h)
        band = np.abs(X - center) <= max(0.03 * m, 1.0)
        labels[band] = 3 if K == 4 else 4

    seg = Segmentation(width=w, height=h, num_regions=K, labels=labels)
    counts = np.bincount(labels.ravel(), minlength=K)
    if (counts == 0).any():
        raise ValueError(f"mask {spec.kind} produced an empty region at "
                         f"{w}x{h}")
    return seg


def gmm_means(num_regions: int, palette_size: int) -> np.ndarray:
    """K maximally spaced values from 1 to L, rounded half-up."""
    if num_regions == 1:
        vals = np.array([(1.0 + palette_size) / 2.0])
    else:
        vals = 1.0 + (palette_size - 1.0) * np.arange(num_regions) / (num_regions - 1.0)
    return np.floor(vals + 0.5).astype(np.int64)


def _truncnorm_sample(rng, count: int, mean: float, sigma: float, upper: float):
    """Inverse-CDF draws from a normal truncated to [1, upper]."""
    a = (1.0 - mean) / sigma
    b = (upper - mean) / sigma
    fa, fb = ndtr(a), ndtr(b)
    u = rng.random(count)
    x = mean + sigma * ndtri(fa + u * (fb - fa))
    return np.clip(x, 1.0, upper)


def gen_gmm(mask: Segmentation, palette_size: int, sigma: float,
            seed: int = 0) -> DiscreteImage:
    """Per-region truncated-normal pixels with maximally spaced means.

    Each pixel of region s is an independent draw from the normal with mean
    means[s] and the shared sigma, truncated to [1, L], rounded to the
    nearest integer and shifted down by one onto the 0-based palette.
    """
    if palette_size < mask.num_regions:
        raise ValueError("palette_size must be >= the number of regions")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    means = gmm_means(mask.num_regions, palette_size)
    pixels = np.zeros((mask.height, mask.width), dtype=np.int32)
    for s in range(mask.num_regions):
        sel = mask.labels == s
        count = int(sel.sum())
        if count == 0:
            continue
        x = _truncnorm_sample(rng, count, float(means[s]), sigma, float(palette_size))
        v = np.clip(np.floor(x + 0.5), 1, palette_size).astype(np.int32)
        pixels[sel] = v - 1
    return DiscreteImage(width=mask.width, height=mask.height,
                         palette_size=palette_size, pixels=pixels)


def _sample_from_model(rng, theta: np.ndarray, count: int) -> np.ndarray:
    cdf = np.cumsum(theta)
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    return np.minimum(idx, theta.shape[0] - 1).astype(np.int32)


def gen_rand(mask: Segmentation, palette_size: int, seed: int = 0) -> DiscreteImage:
    """Per-region IID pixels from uniformly sampled simplex distributions.

    One flat-Dirichlet draw over the L palette bins per region, then IID
    pixel sampling within each region.
    """
    if palette_size < 2:
        raise ValueError("palette_size must be >= 2")
    rng = np.random.default_rng(seed)
    models = [rng.dirichlet(np.ones(palette_size)) for _ in range(mask.num_regions)]
    pixels = np.zeros((mask.height, mask.width), dtype=np.int32)
    for s in range(mask.num_regions):
        sel = mask.labels == s
        count = int(sel.sum())
        if count == 0:
            continue
        pixels[sel] = _sample_from_model(rng, models[s], count)
    return DiscreteImage(width=mask.width, height=mask.height,
                         palette_size=palette_size, pixels=pixels)


def gen_block_textured(mask: Segmentation, palette_size: int, period: int,
                       seed: int = 0) -> DiscreteImage:
    """Spatially correlated variant of gen_rand with correlation length `period`.

    For every region one low-resolution grid of draws from its model is
    sampled and each draw is replicated over a period x period block; a pixel
    takes its own region's block value. Pixels closer than the period are
    therefore strongly dependent while pixels in different blocks (always the
    case beyond 2*period - 2 in either coordinate) stay independent, and
    every pixel keeps the exact marginal of its region model.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    if palette_size < 2:
        raise ValueError("palette_size must be >= 2")
    rng = np.random.default_rng(seed)
    K = mask.num_regions
    models = [rng.dirichlet(np.ones(palette_size)) for _ in range(K)]
    gh = -(-mask.height // period)
    gw = -(-mask.width // period)
    rows = np.arange(mask.height) // period
    cols = np.arange(mask.width) // period
    block = rows[:, None] * gw + cols[None, :]
    pixels = np.zeros((mask.height, mask.width), dtype=np.int32)
    for s in range(K):
        grid = _sample_from_model(rng, models[s], gh * gw)
        sel = mask.labels == s
        pixels[sel] = grid[block[sel]]
    return DiscreteImage(width=mask.width, height=mask.height,
                         palette_size=palette_size, pixels=pixels)


def generate(mask: Segmentation, config: GenConfig) -> DiscreteImage:
    """Dispatch on the configured pixel process."""
    if config.process == "gmm":
        return gen_gmm(mask, config.palette_size, config.sigma, config.seed)
    return gen_rand(mask, config.palette_size, config.seed)


def models_from_gt(img: DiscreteImage, mask: Segmentation) -> ModelSet:
    """Reference models from a ground-truth labeling: per-region normalized
    histograms and exact pixel-count proportions."""
    if (img.height, img.width) != (mask.height, mask.width):
        raise ValueError("image and mask dimensions differ")
    K, L = mask.num_regions, img.palette_size
    theta = np.zeros((K, L), dtype=np.float64)
    weights = np.zeros(K, dtype=np.float64)
    total = img.pixels.size
    for s in range(K):
        sel = mask.labels == s
        count = int(sel.sum())
        if count == 0:
            raise ValueError(f"region {s} is empty")
        theta[s] = np.bincount(img.pixels[sel], minlength=L) / count
        weights[s] = count / total
    return ModelSet(palette_size=L, num_regions=K, theta=theta, weights=weights)
