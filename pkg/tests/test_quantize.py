import numpy as np
import pytest

from momentseg.quantize import quantize_colors
from momentseg.types import RgbImage


def _sse(img, quantized, palette):
    pts = img.pixels.reshape(-1, 3).astype(np.float64)
    assigned = palette.centroids[quantized.pixels.ravel()]
    return float(((pts - assigned) ** 2).sum())


def test_single_cluster_is_mean_color():
    rng = np.random.default_rng(0)
    img = RgbImage.from_array(rng.integers(0, 256, size=(8, 9, 3), dtype=np.uint8))
    quantized, palette = quantize_colors(img, 1)
    assert quantized.palette_size == 1
    assert np.all(quantized.pixels == 0)
    mean = img.pixels.reshape(-1, 3).mean(axis=0)
    assert np.allclose(palette.centroids[0], mean)


def test_two_distinct_colors_split_exactly():
    pixels = np.zeros((4, 6, 3), dtype=np.uint8)
    pixels[:, 3:] = (200, 10, 50)
    img = RgbImage.from_array(pixels)
    quantized, palette = quantize_colors(img, 2)
    assert quantized.palette_size == 2
    assert _sse(img, quantized, palette) == 0.0
    # each original color maps to a single cluster
    assert len(set(quantized.pixels[:, :3].ravel().tolist())) == 1
    assert len(set(quantized.pixels[:, 3:].ravel().tolist())) == 1


def test_two_gaussian_blobs_recovered():
    rng = np.random.default_rng(5)
    lo = np.clip(rng.normal(10, 3, size=(100, 3)), 0, 255).astype(np.uint8)
    hi = np.clip(rng.normal(240, 3, size=(100, 3)), 0, 255).astype(np.uint8)
    pixels = np.concatenate([lo, hi]).reshape(10, 20, 3)
    img = RgbImage.from_array(pixels)
    quantized, _ = quantize_colors(img, 2)
    flat = quantized.pixels.ravel()
    lo_labels = set(flat[:100].tolist())
    hi_labels = set(flat[100:].tolist())
    # clusters coincide with the generating groups (brute-force optimal split)
    assert len(lo_labels) == 1 and len(hi_labels) == 1
    assert lo_labels != hi_labels


def test_sse_monotone_in_cluster_count():
    rng = np.random.default_rng(7)
    img = RgbImage.from_array(rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8))
    sses = []
    for n in range(1, 9):
        quantized, palette = quantize_colors(img, n, seed=1)
        assert quantized.palette_size == min(n, 144)
        assert quantized.pixels.max() < quantized.palette_size
        sses.append(_sse(img, quantized, palette))
    assert all(a >= b - 1e-9 for a, b in zip(sses, sses[1:]))


def test_cluster_count_capped_by_distinct_colors():
    pixels = np.zeros((2, 2, 3), dtype=np.uint8)
    pixels[0, 1] = (9, 9, 9)
    pixels[1, 0] = (200, 0, 0)
    img = RgbImage.from_array(pixels)
    quantized, palette = quantize_colors(img, 50)
    assert quantized.palette_size == 3
    assert palette.num_colors == 3


def test_deterministic_for_fixed_seed():
    rng = np.random.default_rng(3)
    img = RgbImage.from_array(rng.integers(0, 256, size=(30, 30, 3), dtype=np.uint8))
    a, _ = quantize_colors(img, 7, seed=42)
    b, _ = quantize_colors(img, 7, seed=42)
    assert np.array_equal(a.pixels, b.pixels)


def test_zero_clusters_rejected():
    img = RgbImage.from_array(np.zeros((2, 2, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        quantize_colors(img, 0)
