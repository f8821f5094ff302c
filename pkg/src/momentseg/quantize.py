"""Hierarchical color quantization for RGB inputs.

The color space is recursively partitioned in two until the requested number
of clusters is reached: at each step the leaf with the largest within-cluster
squared error is split by a small 2-means run. All work happens on the table
of distinct colors weighted by their pixel counts, so cost scales with the
number of distinct colors rather than the number of pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import DiscreteImage, RgbImage

__all__ = ["ColorPalette", "quantize_colors"]

# 2-means seeding scans all O(m^2) pairs of member colors; above this many
# distinct colors a seeded subsample keeps that scan bounded.
_FARTHEST_PAIR_CAP = 4096
_TWO_MEANS_MAX_ITER = 25


@dataclass
class ColorPalette:
    """Cluster centroids plus the per-pixel centroid assignment."""

    centroids: np.ndarray   # (N, 3) float64
    assignment: np.ndarray  # (height, width) int32, values in [0, N)

    @property
    def num_colors(self) -> int:
        return int(self.centroids.shape[0])


class _Leaf:
    __slots__ = ("members", "centroid", "sse", "splittable")

    def __init__(self, members: np.ndarray, colors: np.ndarray, counts: np.ndarray):
        self.members = members
        w = counts[members].astype(np.float64)
        pts = colors[members]
        total = w.sum()
        self.centroid = (pts * w[:, None]).sum(axis=0) / total
        diff = pts - self.centroid
        self.sse = float((w * (diff * diff).sum(axis=1)).sum())
        self.splittable = members.size > 1


def _farthest_pair(pts: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    """Indices of the two mutually farthest points, subsampled when large."""
    m = pts.shape[0]
    if m > _FARTHEST_PAIR_CAP:
        cand = np.sort(rng.choice(m, size=_FARTHEST_PAIR_CAP, replace=False))
    else:
        cand = np.arange(m)
    sub = pts[cand]
    sq = (sub * sub).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (sub @ sub.T)
    i, j = np.unravel_index(np.argmax(d2), d2.shape)
    return int(cand[i]), int(cand[j])


def _two_means(pts: np.ndarray, w: np.ndarray, rng: np.random.Generator):
    """Split weighted points in two; returns a boolean side mask or None.

    Centers start at the two mutually farthest member colors and Lloyd
    iterations run to an assignment fixpoint (ties go to the first center).
    Returns None when the split degenerates to one side.
    """
    i0, i1 = _farthest_pair(pts, rng)
    c0, c1 = pts[i0].astype(np.float64), pts[i1].astype(np.float64)
    side = None
    for _ in range(_TWO_MEANS_MAX_ITER):
        d0 = ((pts - c0) ** 2).sum(axis=1)
        d1 = ((pts - c1) ** 2).sum(axis=1)
        new_side = d1 < d0  # ties stay with center 0
        if side is not None and np.array_equal(new_side, side):
            break
        side = new_side
        w0, w1 = w[~side].sum(), w[side].sum()
        if w0 == 0 or w1 == 0:
            return None
        c0 = (pts[~side] * w[~side, None]).sum(axis=0) / w0
        c1 = (pts[side] * w[side, None]).sum(axis=0) / w1
    if side is None or side.all() or not side.any():
        return None
    return side


def quantize_colors(img: RgbImage, num_colors: int, seed: int = 0):
    """Quantize an RGB image to at most num_colors palette indices.

    Returns (DiscreteImage, ColorPalette). The number of clusters actually
    produced is min(num_colors, number of distinct colors); the output
    image's palette_size equals that cluster count. Deterministic for a
    fixed seed (the seed only subsamples 2-means seeding candidates in very
    large clusters).
    """
    if num_colors < 1:
        raise ValueError("num_colors must be >= 1")
    rng = np.random.default_rng(seed)

    flat = img.pixels.reshape(-1, 3)
    colors, inverse, counts = np.unique(
        flat, axis=0, return_inverse=True, return_counts=True)
    colors_f = colors.astype(np.float64)

    leaves = [_Leaf(np.arange(colors.shape[0]), colors_f, counts)]
    while len(leaves) < num_colors:
        best, best_sse = -1, 0.0
        for idx, leaf in enumerate(leaves):
            if leaf.splittable and leaf.sse > best_sse:
                best, best_sse = idx, leaf.sse
        if best < 0:  # distinct colors (or separable structure) exhausted
            break
        leaf = leaves[best]
        side = _two_means(colors_f[leaf.members], counts[leaf.members].astype(np.float64), rng)
        if side is None:
            leaf.splittable = False
            continue
        leaves[best] = _Leaf(leaf.members[~side], colors_f, counts)
        leaves.append(_Leaf(leaf.members[side], colors_f, counts))

    n = len(leaves)
    color_to_cluster = np.empty(colors.shape[0], dtype=np.int32)
    centroids = np.empty((n, 3), dtype=np.float64)
    for idx, leaf in enumerate(leaves):
        color_to_cluster[leaf.members] = idx
        centroids[idx] = leaf.centroid

    assignment = color_to_cluster[inverse].reshape(img.height, img.width)
    quantized = DiscreteImage(width=img.width, height=img.height,
                              palette_size=n, pixels=assignment)
    return quantized, ColorPalette(centroids=centroids, assignment=assignment.copy())
