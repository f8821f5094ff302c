import numpy as np
import pytest
from scipy.stats import truncnorm

from momentseg.metrics import bhattacharyya
from momentseg.moments import estimate_alpha, estimate_beta
from momentseg.synth import (GenConfig, MASK_KINDS, MaskSpec,
                             gen_block_textured, gen_gmm, gen_rand, generate,
                             gmm_means, make_mask, mask_regions,
                             models_from_gt)
from momentseg.types import DiscreteImage, Segmentation


def _tv(p, q):
    return 0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum()


def _truncnorm_bin_masses(mean, sigma, L):
    """Mass assigned to each palette bin by sample -> round -> shift."""
    a, b = (1.0 - mean) / sigma, (L - mean) / sigma
    dist = truncnorm(a, b, loc=mean, scale=sigma)
    edges_lo = np.maximum(np.arange(1, L + 1) - 0.5, 1.0)
    edges_hi = np.minimum(np.arange(1, L + 1) + 0.5, float(L))
    return dist.cdf(edges_hi) - dist.cdf(edges_lo)


@pytest.mark.parametrize("kind", MASK_KINDS)
@pytest.mark.parametrize("size", [50, 150, 300])
def test_masks_partition_nonuniform_nonempty(kind, size):
    mask = make_mask(MaskSpec(kind=kind, width=size, height=size))
    K = mask_regions(kind)
    assert mask.num_regions == K
    counts = np.bincount(mask.labels.ravel(), minlength=K)
    assert counts.sum() == size * size
    assert (counts > 0).all()
    props = counts / counts.sum()
    assert np.min(np.diff(np.sort(props))) >= 0.02  # non-uniform sizes


def test_two_region_disk_proportion():
    mask = make_mask(MaskSpec(kind="two_region", width=300, height=300))
    prop = float((mask.labels == 1).mean())
    # area of the 0.30*min-dim disk: pi * 0.09
    assert prop == pytest.approx(np.pi * 0.09, abs=0.002)
    assert prop == pytest.approx(0.283, abs=0.002)


def test_three_region_arm_is_nonconvex():
    mask = make_mask(MaskSpec(kind="three_region", width=300, height=300))
    ys, xs = np.nonzero(mask.labels == 2)
    # midpoint of two opposite arm points falls outside the region
    top = (ys[np.argmin(ys)], xs[np.argmin(ys)])
    bottom = (ys[np.argmax(ys)], xs[np.argmax(ys)])
    mid = ((top[0] + bottom[0]) // 2, (top[1] + bottom[1]) // 2)
    assert mask.labels[mid] != 2


def test_five_region_smallest_region_floor():
    mask = make_mask(MaskSpec(kind="five_region", width=300, height=300))
    props = np.bincount(mask.labels.ravel(), minlength=5) / mask.labels.size
    assert props.min() >= 0.01


def test_mask_rejects_small_images():
    with pytest.raises(ValueError):
        MaskSpec(kind="five_region", width=40, height=40)


def test_mask_deterministic():
    a = make_mask(MaskSpec(kind="four_region", width=120, height=90))
    b = make_mask(MaskSpec(kind="four_region", width=120, height=90))
    assert np.array_equal(a.labels, b.labels)


def test_gmm_means_match_reported_spacing():
    assert gmm_means(4, 256).tolist() == [1, 86, 171, 256]
    assert gmm_means(2, 256).tolist() == [1, 256]
    assert gmm_means(5, 256).tolist() == [1, 65, 129, 192, 256]


def test_gen_gmm_degenerate_sigma_is_constant_per_region():
    mask = make_mask(MaskSpec(kind="three_region", width=60, height=60))
    img = gen_gmm(mask, 256, sigma=0.01, seed=0)
    means = gmm_means(3, 256)
    for s in range(3):
        vals = np.unique(img.pixels[mask.labels == s])
        assert vals.tolist() == [means[s] - 1]


def test_gen_gmm_histogram_matches_truncnorm_oracle():
    mask = make_mask(MaskSpec(kind="two_region", width=300, height=300))
    img = gen_gmm(mask, 256, sigma=30.0, seed=4)
    means = gmm_means(2, 256)
    for s in range(2):
        sel = mask.labels == s
        n = int(sel.sum())
        hist = np.bincount(img.pixels[sel], minlength=256) / n
        oracle = _truncnorm_bin_masses(float(means[s]), 30.0, 256)
        # E[TV] for an n-sample multinomial draw of `oracle` (half-normal
        # per-bin means); the smaller region's 25k pixels put it near 0.022,
        # so the bound follows the computed expectation rather than a
        # constant.
        expected_tv = 0.5 * np.sqrt(2.0 * oracle * (1 - oracle) / (np.pi * n)).sum()
        assert _tv(hist, oracle) <= max(0.02, 1.3 * expected_tv)


def test_gen_gmm_requires_enough_colors():
    mask = make_mask(MaskSpec(kind="five_region", width=60, height=60))
    with pytest.raises(ValueError):
        gen_gmm(mask, 3, sigma=10.0, seed=0)


def test_gen_rand_single_region_matches_sampled_model():
    mask = Segmentation.from_array(np.zeros((300, 300), dtype=np.int32), 1)
    img = gen_rand(mask, 32, seed=9)
    rng = np.random.default_rng(9)
    model = rng.dirichlet(np.ones(32))
    assert _tv(estimate_alpha(img), model) <= 0.02


def test_gen_rand_deterministic_and_seed_sensitive():
    mask = make_mask(MaskSpec(kind="two_region", width=80, height=80))
    a = gen_rand(mask, 16, seed=5)
    b = gen_rand(mask, 16, seed=5)
    assert np.array_equal(a.pixels, b.pixels)
    for pair in range(20):
        m1 = models_from_gt(gen_rand(mask, 16, seed=100 + pair), mask)
        m2 = models_from_gt(gen_rand(mask, 16, seed=200 + pair), mask)
        d = min(bhattacharyya(m1.theta[s], m2.theta[s]) for s in range(2))
        assert d > 0.05


def test_generate_dispatch():
    mask = make_mask(MaskSpec(kind="two_region", width=60, height=60))
    img = generate(mask, GenConfig(process="gmm", palette_size=64,
                                   sigma=10.0, seed=0))
    assert img.palette_size == 64
    img = generate(mask, GenConfig(process="rand", palette_size=16, seed=0))
    assert img.palette_size == 16
    with pytest.raises(ValueError):
        GenConfig(process="gmm", palette_size=64, sigma=None)


def test_models_from_gt_constant_and_single_region():
    mask = make_mask(MaskSpec(kind="two_region", width=60, height=60))
    img = DiscreteImage.from_array(np.full((60, 60), 3, dtype=np.int32), 8)
    models = models_from_gt(img, mask)
    for s in range(2):
        expected = np.zeros(8)
        expected[3] = 1.0
        assert np.array_equal(models.theta[s], expected)

    one = Segmentation.from_array(np.zeros((60, 60), dtype=np.int32), 1)
    rng_img = gen_rand(one, 8, seed=1)
    m = models_from_gt(rng_img, one)
    assert np.array_equal(m.theta[0], estimate_alpha(rng_img))
    assert m.weights.tolist() == [1.0]


def test_models_from_gt_weights_are_exact_proportions():
    mask = make_mask(MaskSpec(kind="five_region", width=100, height=100))
    img = gen_rand(mask, 8, seed=2)
    models = models_from_gt(img, mask)
    counts = np.bincount(mask.labels.ravel(), minlength=5)
    assert np.array_equal(models.weights, counts / counts.sum())


def test_models_from_gt_empty_region_error():
    mask = Segmentation.from_array(np.zeros((4, 4), dtype=np.int32), 2)
    img = DiscreteImage.from_array(np.zeros((4, 4), dtype=np.int32), 2)
    with pytest.raises(ValueError, match="empty"):
        models_from_gt(img, mask)


def _mutual_information(img, r):
    L = img.palette_size
    a = img.pixels[:, :-r].ravel().astype(np.int64)
    b = img.pixels[:, r:].ravel().astype(np.int64)
    joint = np.bincount(a * L + b, minlength=L * L).reshape(L, L) / a.size
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nz = joint > 0
    return float((joint[nz] * np.log(joint[nz] / np.outer(px, py)[nz])).sum())


def test_block_textured_marginals_and_correlation_profile():
    mask = Segmentation.from_array(np.zeros((240, 240), dtype=np.int32), 1)
    img = gen_block_textured(mask, 32, period=6, seed=3)
    rng = np.random.default_rng(3)
    model = rng.dirichlet(np.ones(32))
    # the effective sample is one draw per 6x6 block, i.e. 40*40 draws
    n_blocks = 40 * 40
    expected_tv = 0.5 * np.sqrt(2.0 * model * (1 - model) / (np.pi * n_blocks)).sum()
    assert _tv(estimate_alpha(img), model) <= 1.5 * expected_tv
    # strong dependence inside the correlation length, none beyond it
    mi_near = _mutual_information(img, 1)
    mi_far = _mutual_information(img, 8)
    assert mi_near > 10 * max(mi_far, 1e-9)


def test_block_textured_breaks_independence_assumption_at_r1():
    mask = Segmentation.from_array(np.zeros((200, 200), dtype=np.int32), 1)
    img = gen_block_textured(mask, 16, period=6, seed=4)
    alpha = estimate_alpha(img)
    product = np.outer(alpha, alpha)
    near = estimate_beta(img, 1, "axis")
    far = estimate_beta(img, 8, "axis")
    assert _tv(near.ravel(), product.ravel()) > 5 * _tv(far.ravel(), product.ravel())
