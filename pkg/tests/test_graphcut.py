import math

import numpy as np
import pytest

from momentseg.graphcut import (EnergyParams, UnaryCosts, ab_swap,
                                argmin_labeling, energy, min_cut_binary,
                                segment, unary_costs)
from momentseg.types import DiscreteImage, ModelSet, Segmentation

from oracles import (brute_force_min_energy, brute_force_swap_move,
                     swap_local_minima_energies)


def _random_costs(rng, h, w, K, scale=3.0):
    return UnaryCosts(width=w, height=h, num_regions=K,
                      costs=rng.random((h, w, K)) * scale)


def test_unary_costs_analytic_values():
    img = DiscreteImage.from_array(np.array([[0, 1, 2]], dtype=np.int32), 3)
    theta = np.array([[1.0, 0.0, 0.0],
                      [1.0 - math.exp(-1.0), 0.0, math.exp(-1.0)]])
    models = ModelSet(palette_size=3, num_regions=2, theta=theta,
                      weights=np.array([0.5, 0.5]))
    uc = unary_costs(img, models, eps_prob=1e-12)
    assert uc.costs[0, 0, 0] == 0.0                      # theta=1 -> cost 0
    assert uc.costs[0, 1, 0] == pytest.approx(-math.log(1e-12))  # floor
    assert uc.costs[0, 1, 0] == pytest.approx(27.631, abs=1e-3)
    assert uc.costs[0, 2, 1] == pytest.approx(1.0)        # theta=e^-1 -> 1


def test_unary_costs_palette_mismatch():
    img = DiscreteImage.from_array(np.zeros((2, 2), dtype=np.int32), 4)
    models = ModelSet(palette_size=3, num_regions=1,
                      theta=np.full((1, 3), 1 / 3), weights=np.array([1.0]))
    with pytest.raises(ValueError, match="palette"):
        unary_costs(img, models)


def test_energy_components():
    rng = np.random.default_rng(0)
    uc = _random_costs(rng, 3, 4, 2)
    labels = rng.integers(0, 2, size=(3, 4), dtype=np.int32)
    seg = Segmentation.from_array(labels, 2)
    rows, cols = np.indices(labels.shape)
    unary = uc.costs[rows, cols, labels].sum()
    assert energy(seg, uc, 0.0) == pytest.approx(unary)

    uniform = Segmentation.from_array(np.ones((3, 4), dtype=np.int32), 2)
    rows, cols = np.indices(uniform.labels.shape)
    assert energy(uniform, uc, 5.0) == pytest.approx(
        uc.costs[rows, cols, 1].sum())  # no boundary term

    zero = UnaryCosts(width=2, height=2, num_regions=2,
                      costs=np.zeros((2, 2, 2)))
    checker = Segmentation.from_array(np.array([[0, 1], [1, 0]], np.int32), 2)
    assert energy(checker, zero, 1.0) == 4.0


def test_min_cut_lambda_zero_is_argmin_with_ties_to_zero():
    rng = np.random.default_rng(1)
    costs = rng.random((4, 5, 2))
    costs[1, 1, 0] = costs[1, 1, 1]  # a tie
    uc = UnaryCosts(width=5, height=4, num_regions=2, costs=costs)
    seg = min_cut_binary(uc, 0.0)
    expected = np.where(costs[:, :, 1] < costs[:, :, 0], 1, 0)
    assert np.array_equal(seg.labels, expected)
    assert seg.labels[1, 1] == 0


def test_min_cut_matches_brute_force_small_suite():
    rng = np.random.default_rng(2)
    for trial in range(60):
        h, w = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        uc = _random_costs(rng, h, w, 2)
        lam = (0.0, 0.5, 2.0)[trial % 3]
        seg = min_cut_binary(uc, lam)
        assert energy(seg, uc, lam) == brute_force_min_energy(uc, lam)


def test_min_cut_energy_matches_scipy_maxflow_on_medium_grids():
    # exhaustive search stops at ~12 pixels; scipy's integer max flow is the
    # independent oracle for larger grids (capacities quantized at 2^-20)
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_flow

    scale = 2 ** 20

    def scipy_min_energy(uc, lam):
        h, w, _ = uc.costs.shape
        n = h * w
        src, snk = n, n + 1
        rows, cols, caps = [], [], []

        def add(u, v, c):
            rows.append(u)
            cols.append(v)
            caps.append(int(round(c * scale)))

        for i in range(h):
            for j in range(w):
                x = i * w + j
                add(src, x, uc.costs[i, j, 1])
                add(x, snk, uc.costs[i, j, 0])
                if j + 1 < w:
                    add(x, x + 1, lam)
                    add(x + 1, x, lam)
                if i + 1 < h:
                    add(x, x + w, lam)
                    add(x + w, x, lam)
        graph = csr_matrix((caps, (rows, cols)), shape=(n + 2, n + 2),
                           dtype=np.int64)
        return maximum_flow(graph, src, snk).flow_value / scale

    rng = np.random.default_rng(99)
    for trial in range(25):
        h, w = int(rng.integers(2, 13)), int(rng.integers(2, 13))
        uc = _random_costs(rng, h, w, 2, scale=5.0)
        lam = (0.3, 1.0, 3.0)[trial % 3]
        ours = energy(min_cut_binary(uc, lam), uc, lam)
        assert abs(ours - scipy_min_energy(uc, lam)) <= 1e-3


def test_min_cut_labeling_invariant_under_joint_scaling():
    rng = np.random.default_rng(3)
    uc = _random_costs(rng, 6, 7, 2)
    lam = 0.8
    base = min_cut_binary(uc, lam)
    scaled = UnaryCosts(width=7, height=6, num_regions=2, costs=uc.costs * 4.0)
    assert np.array_equal(min_cut_binary(scaled, lam * 4.0).labels, base.labels)


def test_ab_swap_k2_matches_binary_cut_energy():
    rng = np.random.default_rng(4)
    uc = _random_costs(rng, 5, 6, 2)
    lam = 1.0
    direct = min_cut_binary(uc, lam)
    swapped = ab_swap(uc, lam, argmin_labeling(uc))
    assert energy(swapped, uc, lam) == pytest.approx(
        energy(direct, uc, lam), abs=1e-12)


def test_ab_swap_energy_trace_monotone_and_local_minimum():
    rng = np.random.default_rng(5)
    for _ in range(20):
        uc = _random_costs(rng, 2, 3, 3)
        lam = 1.0
        trace = []
        result = ab_swap(uc, lam, argmin_labeling(uc), energy_trace=trace)
        assert all(a >= b - 1e-12 for a, b in zip(trace, trace[1:]))
        e = energy(result, uc, lam)
        assert e <= energy(argmin_labeling(uc), uc, lam) + 1e-12
        for a in range(2):
            for b in range(a + 1, 3):
                assert brute_force_swap_move(result.labels, uc, lam, a, b) >= e - 1e-9


def test_ab_swap_lands_in_exhaustive_local_minimum_set():
    rng = np.random.default_rng(6)
    for _ in range(10):
        uc = _random_costs(rng, 2, 3, 3)
        lam = 1.0
        result = ab_swap(uc, lam, argmin_labeling(uc))
        e = round(energy(result, uc, lam), 9)
        minima = swap_local_minima_energies(uc, lam)
        assert any(abs(e - m) <= 1e-6 for m in minima)


def test_estimate_and_segment_composes_the_pipeline():
    from momentseg.estimator import estimate_models
    from momentseg.graphcut import estimate_and_segment
    from momentseg.metrics import mean_jaccard, model_set_distance
    from momentseg.moments import estimate_moments
    from momentseg.synth import MaskSpec, gen_gmm, make_mask, models_from_gt

    mask = make_mask(MaskSpec(kind="two_region", width=100, height=100))
    img = gen_gmm(mask, 64, sigma=8.0, seed=0)
    models, seg = estimate_and_segment(img, num_regions=2, r=1, num_slices=22)
    assert mean_jaccard(mask, seg)[0] > 0.95
    d, _ = model_set_distance(models_from_gt(img, mask), models)
    assert d < 0.05
    # identical to running the stages by hand
    by_hand = estimate_models(estimate_moments(img, 1, 22, "ring"), 2)
    assert np.array_equal(models.theta, by_hand.theta)
    assert np.array_equal(models.weights, by_hand.weights)


def test_segment_k1_uniform():
    img = DiscreteImage.from_array(np.zeros((3, 3), dtype=np.int32), 2)
    models = ModelSet(palette_size=2, num_regions=1,
                      theta=np.array([[1.0, 0.0]]), weights=np.array([1.0]))
    seg = segment(img, models)
    assert np.all(seg.labels == 0)


def test_energy_params_validation():
    with pytest.raises(ValueError):
        EnergyParams(lam=-1.0)
    with pytest.raises(ValueError):
        EnergyParams(eps_prob=0.0)
