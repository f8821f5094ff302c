"""Co-occurrence moment estimation from palette-indexed images.

Estimates the color histogram (alpha), the pair co-occurrence distribution
at L1 distance r (beta), and unnormalized triple co-occurrence count slices
(gamma) for a chosen set of anchor colors. Pairs may be enumerated over the
full L1 ring around each pixel or only over the two positive axis offsets;
triples always use the sparsified axis pattern (x, x+(0,r), x+(r,0)), which
trades an exhaustive triple enumeration for a single cheap pass.

Count conventions (tests compare these counts exactly against naive
enumeration oracles, so they are part of the contract):

* ring: every ordered in-bounds pair (x, y) with ||x-y||_1 = r contributes
  one increment to (I(x), I(y)) and one to (I(y), I(x)); since each
  unordered pair is visited from both ends, its total contribution is 2+2.
* axis: every pixel x contributes, for each in-bounds y in
  {x+(0,r), x+(r,0)}, one increment to (I(x), I(y)) and one to
  (I(y), I(x)); unordered pairs are visited once.
* gamma: for a triple (v1, v2, v3) = (I(x), I(x+(0,r)), I(x+(r,0))), each
  role whose color is an anchor receives both orderings of the other two
  values in its slice.

Offsets are (row, col): x+(0,r) is r columns right, x+(r,0) is r rows down.
Border pixels lacking in-bounds partners are skipped.
"""

from __future__ import annotations

import numpy as np

from .types import DiscreteImage, MomentEstimates

__all__ = [
    "estimate_alpha",
    "estimate_beta",
    "estimate_gamma_slices",
    "estimate_moments",
    "sample_moments",
    "most_frequent_colors",
]


def estimate_alpha(img: DiscreteImage) -> np.ndarray:
    """Normalized color histogram of the image."""
    counts = np.bincount(img.pixels.ravel(), minlength=img.palette_size)
    return counts.astype(np.float64) / img.pixels.size


def most_frequent_colors(img: DiscreteImage, num: int) -> np.ndarray:
    """The `num` most frequent palette values, ties broken by smaller index."""
    if not (1 <= num <= img.palette_size):
        raise ValueError("need 1 <= num <= palette_size")
    counts = np.bincount(img.pixels.ravel(), minlength=img.palette_size)
    order = np.argsort(-counts, kind="stable")  # stable: ties keep index order
    return order[:num].astype(np.int32)


def _ring_offsets(r: int):
    """All (dy, dx) with |dy|+|dx| = r, in a fixed deterministic order."""
    offsets = []
    for dy in range(-r, r + 1):
        rem = r - abs(dy)
        if rem == 0:
            offsets.append((dy, 0))
        else:
            offsets.append((dy, -rem))
            offsets.append((dy, rem))
    return offsets


def _axis_offsets(r: int):
    return [(0, r), (r, 0)]


def _offset_views(pixels: np.ndarray, dy: int, dx: int):
    """Flattened views (source, shifted) of all in-bounds pairs for one offset."""
    h, w = pixels.shape
    if abs(dy) >= h or abs(dx) >= w:
        return None
    ys = slice(max(0, -dy), h - max(0, dy))
    xs = slice(max(0, -dx), w - max(0, dx))
    yd = slice(max(0, dy), h + min(0, dy))
    xd = slice(max(0, dx), w + min(0, dx))
    return pixels[ys, xs].ravel(), pixels[yd, xd].ravel()


def _pair_counts(img: DiscreteImage, r: int, mode: str) -> np.ndarray:
    L = img.palette_size
    acc = np.zeros(L * L, dtype=np.int64)
    if mode == "ring":
        # one directed representative per unordered pair, doubled below
        offsets = [(dy, dx) for dy, dx in _ring_offsets(r)
                   if dy > 0 or (dy == 0 and dx > 0)]
        weight = 2
    elif mode == "axis":
        offsets = _axis_offsets(r)
        weight = 1
    else:
        raise ValueError("mode must be 'ring' or 'axis'")
    for dy, dx in offsets:
        views = _offset_views(img.pixels, dy, dx)
        if views is None:
            continue
        a, b = views
        lin = a.astype(np.int64) * L + b
        acc += np.bincount(lin, minlength=L * L)
    counts = acc.reshape(L, L)
    return weight * (counts + counts.T)


def estimate_beta(img: DiscreteImage, r: int, mode: str = "ring") -> np.ndarray:
    """Symmetric pair co-occurrence distribution at L1 distance r (sums to 1)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    counts = _pair_counts(img, r, mode)
    total = counts.sum()
    if total == 0:
        raise ValueError(f"no pixel pair at distance {r} fits inside the image")
    return counts.astype(np.float64) / total


def pair_counts(img: DiscreteImage, r: int, mode: str = "ring") -> np.ndarray:
    """Raw integer pair counts underlying estimate_beta (see module docstring)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return _pair_counts(img, r, mode)


def _gamma_from_triples(v1, v2, v3, slice_colors, L: int) -> np.ndarray:
    ell = len(slice_colors)
    slice_pos = np.full(L, -1, dtype=np.int64)
    slice_pos[slice_colors] = np.arange(ell)

    lins = []
    base = np.int64(L) * L
    for anchor, a, b in ((v1, v2, v3), (v2, v1, v3), (v3, v1, v2)):
        pos = slice_pos[anchor]
        sel = pos >= 0
        if not sel.any():
            continue
        p, aa, bb = pos[sel], a[sel].astype(np.int64), b[sel].astype(np.int64)
        lins.append(p * base + aa * L + bb)
        lins.append(p * base + bb * L + aa)
    if lins:
        acc = np.bincount(np.concatenate(lins), minlength=ell * L * L)
    else:
        acc = np.zeros(ell * L * L, dtype=np.int64)
    return acc.reshape(ell, L, L)


def estimate_gamma_slices(img: DiscreteImage, r: int, num_slices: int):
    """Triple co-occurrence count slices for the most frequent colors.

    Returns (slice_colors, gamma_slices) with gamma_slices[k] holding the
    unnormalized, in-plane-symmetric counts anchored at slice_colors[k].
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if img.height <= r or img.width <= r:
        raise ValueError(f"image must be at least {r + 1} x {r + 1} for triples")
    slice_colors = most_frequent_colors(img, num_slices)
    px = img.pixels
    v1 = px[: img.height - r, : img.width - r].ravel()
    v2 = px[: img.height - r, r:].ravel()          # x + (0, r)
    v3 = px[r:, : img.width - r].ravel()           # x + (r, 0)
    gamma = _gamma_from_triples(v1, v2, v3, slice_colors, img.palette_size)
    return slice_colors, gamma


def estimate_moments(img: DiscreteImage, r: int, num_slices: int,
                     beta_mode: str = "ring") -> MomentEstimates:
    """Bundle alpha, beta and the gamma slices into one MomentEstimates."""
    alpha = estimate_alpha(img)
    beta = estimate_beta(img, r, beta_mode)
    slice_colors, gamma = estimate_gamma_slices(img, r, num_slices)
    return MomentEstimates(palette_size=img.palette_size, radius=r,
                           alpha=alpha, beta=beta, slice_colors=slice_colors,
                           gamma_slices=gamma, beta_mode=beta_mode)


def sample_moments(img: DiscreteImage, r: int, num_slices: int,
                   num_pairs: int, num_triples: int, seed: int = 0,
                   exhaustive: bool = False) -> MomentEstimates:
    """Monte-Carlo variant of estimate_moments for very large images.

    Pairs are drawn uniformly from the set of ordered ring pairs at distance
    r, triples uniformly from the axis-triple anchors. alpha and the anchor
    color set always come from the full histogram. With exhaustive=True
    sampling is replaced by full enumeration and the result is identical to
    estimate_moments(img, r, num_slices, "ring").
    """
    if exhaustive:
        return estimate_moments(img, r, num_slices, beta_mode="ring")
    if num_pairs < 1 or num_triples < 1:
        raise ValueError("sample counts must be >= 1")
    if img.height <= r or img.width <= r:
        raise ValueError(f"image must be at least {r + 1} x {r + 1} for triples")
    rng = np.random.default_rng(seed)
    L = img.palette_size
    px = img.pixels
    h, w = px.shape

    alpha = estimate_alpha(img)
    slice_colors = most_frequent_colors(img, num_slices)

    offsets = _ring_offsets(r)
    sizes = np.array(
        [max(0, h - abs(dy)) * max(0, w - abs(dx)) for dy, dx in offsets],
        dtype=np.float64)
    if sizes.sum() == 0:
        raise ValueError(f"no pixel pair at distance {r} fits inside the image")
    per_offset = rng.multinomial(num_pairs, sizes / sizes.sum())

    beta_counts = np.zeros(L * L, dtype=np.int64)
    for (dy, dx), n in zip(offsets, per_offset):
        if n == 0:
            continue
        rows = rng.integers(max(0, -dy), h - max(0, dy), size=n)
        cols = rng.integers(max(0, -dx), w - max(0, dx), size=n)
        a = px[rows, cols].astype(np.int64)
        b = px[rows + dy, cols + dx].astype(np.int64)
        beta_counts += np.bincount(a * L + b, minlength=L * L)
        beta_counts += np.bincount(b * L + a, minlength=L * L)
    beta = beta_counts.reshape(L, L).astype(np.float64)
    beta /= beta.sum()

    rows = rng.integers(0, h - r, size=num_triples)
    cols = rng.integers(0, w - r, size=num_triples)
    v1 = px[rows, cols]
    v2 = px[rows, cols + r]
    v3 = px[rows + r, cols]
    gamma = _gamma_from_triples(v1, v2, v3, slice_colors, L)

    return MomentEstimates(palette_size=L, radius=r, alpha=alpha, beta=beta,
                           slice_colors=slice_colors, gamma_slices=gamma,
                           beta_mode="ring")
