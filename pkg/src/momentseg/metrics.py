"""Evaluation measures: Bhattacharyya distances and matched Jaccard overlap.

Model quality is the permutation-matched mean Bhattacharyya distance between
estimated and reference models (lower is better, 0 iff equal); segmentation
quality is the permutation-matched mean per-region Jaccard index (higher is
better, 1 iff equal up to relabeling). Matching is exhaustive over the K!
label permutations, which is instantaneous for the K <= 8 range supported
here because per-pair statistics are precomputed in a single pass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .types import ModelSet, Segmentation

__all__ = [
    "EvalReport",
    "bhattacharyya",
    "model_set_distance",
    "proportions_distance",
    "jaccard",
    "mean_jaccard",
    "evaluate",
]

_MAX_EXHAUSTIVE_K = 8
_SIMPLEX_TOL = 1e-6


@dataclass
class EvalReport:
    """Distances, matched permutations and optional timings for one run."""

    d_b_models: float
    d_b_weights: float
    mean_jaccard: float
    model_permutation: tuple
    seg_permutation: tuple
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "d_b_models": self.d_b_models,
            "d_b_weights": self.d_b_weights,
            "mean_jaccard": self.mean_jaccard,
            "model_permutation": list(self.model_permutation),
            "seg_permutation": list(self.seg_permutation),
            "timings": dict(self.timings),
        }


def _check_simplex(v: np.ndarray, name: str) -> None:
    if v.min() < -_SIMPLEX_TOL or abs(v.sum() - 1.0) > _SIMPLEX_TOL:
        raise ValueError(f"{name} is not on the simplex within {_SIMPLEX_TOL}")


def bhattacharyya(p, q) -> float:
    """-ln sum_i sqrt(p_i q_i); +inf when the supports are disjoint."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("p and q must be vectors of equal length")
    _check_simplex(p, "p")
    _check_simplex(q, "q")
    coeff = float(np.sqrt(np.maximum(p, 0.0) * np.maximum(q, 0.0)).sum())
    if coeff <= 0.0:
        return math.inf
    return max(0.0, -math.log(coeff))


def _pairwise_db(gt: ModelSet, est: ModelSet) -> np.ndarray:
    K = gt.num_regions
    d = np.empty((K, K), dtype=np.float64)
    for s in range(K):
        for t in range(K):
            d[s, t] = bhattacharyya(gt.theta[s], est.theta[t])
    return d


def _min_perm(score: np.ndarray, minimize: bool):
    """Exhaustive search over permutations of the second index.

    Returns (best mean of score[s, pi(s)], pi). Rows/columns containing
    infinities are handled by ordinary float arithmetic (a permutation that
    uses one has +inf mean).
    """
    K = score.shape[0]
    if K > _MAX_EXHAUSTIVE_K:
        raise ValueError(f"exhaustive matching supports K <= {_MAX_EXHAUSTIVE_K}")
    rows = np.arange(K)
    best_val, best_perm = None, None
    for perm in itertools.permutations(range(K)):
        val = float(score[rows, perm].mean())
        if best_val is None or (val < best_val if minimize else val > best_val):
            best_val, best_perm = val, perm
    return best_val, best_perm


def model_set_distance(gt: ModelSet, est: ModelSet):
    """Minimum over permutations of the mean pairwise Bhattacharyya distance.

    Returns (distance, permutation) where permutation[s] is the estimated
    index matched to reference region s.
    """
    if gt.num_regions != est.num_regions or gt.palette_size != est.palette_size:
        raise ValueError("model sets must share K and L")
    return _min_perm(_pairwise_db(gt, est), minimize=True)


def proportions_distance(w, w_est, permutation=None) -> float:
    """Bhattacharyya distance between proportion vectors.

    The model-matching permutation, when given, is applied to the estimate
    first so that proportions are compared region-by-matched-region.
    """
    w = np.asarray(w, dtype=np.float64)
    w_est = np.asarray(w_est, dtype=np.float64)
    if w.shape != w_est.shape:
        raise ValueError("proportion vectors must have equal length")
    if permutation is not None:
        w_est = w_est[np.asarray(permutation, dtype=np.intp)]
    return bhattacharyya(w, w_est)


def jaccard(a, b) -> float:
    """Intersection over union of two boolean pixel masks; 1 when both empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError("masks must share a shape")
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 1.0
    return int(np.logical_and(a, b).sum()) / union


def mean_jaccard(gt: Segmentation, est: Segmentation):
    """Maximum over label permutations of the mean per-region Jaccard index.

    Returns (mean index, permutation). Regions are matched through a
    confusion matrix computed in one pass, so the K! search only touches
    K x K tables.
    """
    if (gt.height, gt.width) != (est.height, est.width):
        raise ValueError("segmentations must share dimensions")
    if gt.num_regions != est.num_regions:
        raise ValueError("segmentations must share K")
    K = gt.num_regions
    joint = np.bincount(gt.labels.ravel().astype(np.int64) * K + est.labels.ravel(),
                        minlength=K * K).reshape(K, K).astype(np.float64)
    gt_sizes = joint.sum(axis=1)
    est_sizes = joint.sum(axis=0)
    union = gt_sizes[:, None] + est_sizes[None, :] - joint
    both_empty = union == 0
    scores = np.where(both_empty, 1.0, joint / np.where(both_empty, 1.0, union))
    return _min_perm(scores, minimize=False)


def evaluate(gt_models: ModelSet, est_models: ModelSet,
             gt_seg: Segmentation, est_seg: Segmentation,
             timings: dict | None = None) -> EvalReport:
    """Bundle the three measures into one report."""
    d_models, model_perm = model_set_distance(gt_models, est_models)
    d_weights = proportions_distance(gt_models.weights, est_models.weights,
                                     model_perm)
    jac, seg_perm = mean_jaccard(gt_seg, est_seg)
    return EvalReport(d_b_models=d_models, d_b_weights=d_weights,
                      mean_jaccard=jac, model_permutation=tuple(model_perm),
                      seg_permutation=tuple(seg_perm),
                      timings=dict(timings or {}))
