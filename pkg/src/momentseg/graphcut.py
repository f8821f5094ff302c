"""MRF energy minimization with graph cuts.

The energy of a labeling is the sum of per-pixel negative log-likelihoods
under the region color models plus lambda times the number of 4-neighbor
pixel pairs with different labels. For two regions a single s-t cut yields
the exact global minimizer; for more regions, alpha-beta swap moves solve a
restricted binary cut for every label pair in turn and accept a move only
when the energy strictly decreases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._maxflow import solve_grid_cut
from .estimator import estimate_models
from .moments import estimate_moments
from .types import DiscreteImage, ModelSet, Segmentation

__all__ = [
    "UnaryCosts",
    "EnergyParams",
    "unary_costs",
    "energy",
    "argmin_labeling",
    "min_cut_binary",
    "ab_swap",
    "segment",
    "estimate_and_segment",
]

DEFAULT_EPS_PROB = 1e-12
# a swap move must beat the current energy by this much to be accepted
_ACCEPT_MARGIN = 1e-9


@dataclass
class EnergyParams:
    """Boundary weight and the probability floor used inside the log."""

    lam: float = 1.0
    eps_prob: float = DEFAULT_EPS_PROB

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not (0.0 < self.eps_prob < 1.0):
            raise ValueError("eps_prob must lie in (0, 1)")


@dataclass
class UnaryCosts:
    """Per-pixel, per-region data costs: -ln max(theta_k(I(x)), eps_prob)."""

    width: int
    height: int
    num_regions: int
    costs: np.ndarray  # (height, width, K) float64, finite

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=np.float64)
        if self.costs.shape != (self.height, self.width, self.num_regions):
            raise ValueError("costs must have shape (height, width, K)")
        if not np.isfinite(self.costs).all():
            raise ValueError("unary costs must be finite")


def unary_costs(img: DiscreteImage, models: ModelSet,
                eps_prob: float = DEFAULT_EPS_PROB) -> UnaryCosts:
    """Negative log-likelihood of each pixel under every region model."""
    if models.palette_size != img.palette_size:
        raise ValueError("model palette size does not match the image")
    loglik = -np.log(np.maximum(models.theta, eps_prob))  # (K, L)
    costs = loglik[:, img.pixels].transpose(1, 2, 0)
    return UnaryCosts(width=img.width, height=img.height,
                      num_regions=models.num_regions,
                      costs=np.ascontiguousarray(costs))


def boundary_length(labels: np.ndarray) -> int:
    """Number of 4-neighbor pairs with unequal labels (each pair counted once)."""
    horiz = int((labels[:, :-1] != labels[:, 1:]).sum())
    vert = int((labels[:-1, :] != labels[1:, :]).sum())
    return horiz + vert


def energy(seg: Segmentation, costs: UnaryCosts, lam: float) -> float:
    """Unary cost of the labeling plus lam times its boundary length."""
    if (seg.height, seg.width) != (costs.height, costs.width):
        raise ValueError("segmentation and costs dimensions differ")
    rows, cols = np.indices(seg.labels.shape)
    unary = float(costs.costs[rows, cols, seg.labels].sum())
    return unary + lam * boundary_length(seg.labels)


def argmin_labeling(costs: UnaryCosts) -> Segmentation:
    """Pixel-wise argmin labeling; ties go to the lowest label index."""
    labels = np.argmin(costs.costs, axis=2).astype(np.int32)
    return Segmentation(width=costs.width, height=costs.height,
                        num_regions=costs.num_regions, labels=labels)


def _binary_cut(cost0: np.ndarray, cost1: np.ndarray, lam: float,
                link_mask: np.ndarray | None = None) -> np.ndarray:
    """Exact binary cut on the pixel grid; returns a 0/1 uint8 map.

    cost0/cost1 are (H, W) unary costs for the two labels. link_mask, when
    given, restricts the lambda links to pairs where both endpoints are set;
    other pixels keep zero-capacity links and are effectively decoupled.
    """
    h, w = cost0.shape
    n = h * w
    tcap = (cost1 - cost0).ravel().astype(np.float64)
    cap = np.zeros((n, 4), dtype=np.float64)
    if lam > 0:
        if link_mask is None:
            right = np.zeros((h, w), dtype=np.float64)
            right[:, :-1] = lam
            down = np.zeros((h, w), dtype=np.float64)
            down[:-1, :] = lam
        else:
            m = link_mask
            right = np.zeros((h, w), dtype=np.float64)
            right[:, :-1] = lam * (m[:, :-1] & m[:, 1:])
            down = np.zeros((h, w), dtype=np.float64)
            down[:-1, :] = lam * (m[:-1, :] & m[1:, :])
        cap[:, 0] = right.ravel()
        cap[:, 2] = down.ravel()
        left = np.zeros((h, w), dtype=np.float64)
        left[:, 1:] = right[:, :-1]
        up = np.zeros((h, w), dtype=np.float64)
        up[1:, :] = down[:-1, :]
        cap[:, 1] = left.ravel()
        cap[:, 3] = up.ravel()
    return solve_grid_cut(tcap, cap, h, w)


def min_cut_binary(costs: UnaryCosts, lam: float) -> Segmentation:
    """Global minimizer of the two-region energy via a single s-t cut.

    The grid graph carries the two unary costs on the terminal edges and
    lambda on every 4-neighbor edge; ties resolve toward label 0.
    """
    if costs.num_regions != 2:
        raise ValueError("min_cut_binary requires exactly two regions")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    labels = _binary_cut(costs.costs[:, :, 0], costs.costs[:, :, 1], lam)
    return Segmentation(width=costs.width, height=costs.height,
                        num_regions=2, labels=labels.astype(np.int32))


def ab_swap(costs: UnaryCosts, lam: float, init: Segmentation,
            max_cycles: int = 20, energy_trace: list | None = None) -> Segmentation:
    """Iterated swap moves over all label pairs until no move improves.

    Pairs are visited in fixed ascending order; each move re-partitions only
    the pixels currently carrying the pair's labels by solving the restricted
    binary cut, and is accepted only on strict energy decrease. Terminates
    after a full cycle without accepted moves or after max_cycles. When
    energy_trace is a list it receives the energy after every accepted move.
    """
    if costs.num_regions < 2:
        raise ValueError("ab_swap requires at least two regions")
    if (init.height, init.width) != (costs.height, costs.width):
        raise ValueError("init segmentation does not match costs")
    K = costs.num_regions
    labels = init.labels.copy()
    current = energy(Segmentation.from_array(labels, K), costs, lam)
    if energy_trace is not None:
        energy_trace.append(current)
    for _ in range(max_cycles):
        improved = False
        for a in range(K - 1):
            for b in range(a + 1, K):
                mask = (labels == a) | (labels == b)
                if not mask.any():
                    continue
                # out-of-pair neighbors contribute a constant boundary term
                cost_a = np.where(mask, costs.costs[:, :, a], 0.0)
                cost_b = np.where(mask, costs.costs[:, :, b], 0.0)
                side = _binary_cut(cost_a, cost_b, lam, link_mask=mask)
                candidate = labels.copy()
                candidate[mask] = np.where(side[mask] == 0, a, b)
                cand_energy = energy(Segmentation.from_array(candidate, K),
                                     costs, lam)
                if cand_energy < current - _ACCEPT_MARGIN:
                    labels = candidate
                    current = cand_energy
                    improved = True
                    if energy_trace is not None:
                        energy_trace.append(current)
        if not improved:
            break
    return Segmentation(width=costs.width, height=costs.height,
                        num_regions=K, labels=labels)


def segment(img: DiscreteImage, models: ModelSet,
            params: EnergyParams | None = None,
            max_cycles: int = 20) -> Segmentation:
    """Segment an image under known models: exact cut for K=2, swaps otherwise."""
    params = params or EnergyParams()
    costs = unary_costs(img, models, params.eps_prob)
    if models.num_regions == 1:
        return Segmentation(width=img.width, height=img.height, num_regions=1,
                            labels=np.zeros_like(img.pixels))
    if models.num_regions == 2:
        return min_cut_binary(costs, params.lam)
    return ab_swap(costs, params.lam, argmin_labeling(costs), max_cycles)


def estimate_and_segment(img: DiscreteImage, num_regions: int, r: int,
                         num_slices: int, lam: float = 1.0,
                         beta_mode: str = "ring",
                         eps_prob: float = DEFAULT_EPS_PROB):
    """Full pipeline: moments, model recovery, then graph-cut segmentation.

    Returns (ModelSet, Segmentation).
    """
    moments = estimate_moments(img, r, num_slices, beta_mode)
    models = estimate_models(moments, num_regions)
    seg = segment(img, models, EnergyParams(lam=lam, eps_prob=eps_prob))
    return models, seg
