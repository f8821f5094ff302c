"""Appearance-model estimation from color co-occurrence statistics.

Estimates per-region color distributions and region size proportions
directly from an image via third-order co-occurrence moments and orthogonal
tensor factorization, then segments the image by minimizing an MRF energy
with graph cuts.
"""

__version__ = "0.1.0"

from .estimator import (estimate_models, joint_diagonalize, project_simplex,
                        truncated_psd_eig, whiten_slices)
from .graphcut import (EnergyParams, UnaryCosts, ab_swap, energy,
                       estimate_and_segment, min_cut_binary, segment,
                       unary_costs)
from .metrics import (EvalReport, bhattacharyya, evaluate, jaccard,
                      mean_jaccard, model_set_distance, proportions_distance)
from .moments import (estimate_alpha, estimate_beta, estimate_gamma_slices,
                      estimate_moments, sample_moments)
from .quantize import ColorPalette, quantize_colors
from .synth import (GenConfig, MaskSpec, gen_block_textured, gen_gmm,
                    gen_rand, make_mask, models_from_gt)
from .types import (DiscreteImage, ModelSet, MomentEstimates, RgbImage,
                    Segmentation)

__all__ = [
    "__version__",
    "DiscreteImage", "RgbImage", "Segmentation", "ModelSet", "MomentEstimates",
    "estimate_alpha", "estimate_beta", "estimate_gamma_slices",
    "estimate_moments", "sample_moments",
    "truncated_psd_eig", "whiten_slices", "joint_diagonalize",
    "project_simplex", "estimate_models",
    "UnaryCosts", "EnergyParams", "unary_costs", "energy", "min_cut_binary",
    "ab_swap", "segment", "estimate_and_segment",
    "ColorPalette", "quantize_colors",
    "MaskSpec", "GenConfig", "make_mask", "gen_gmm", "gen_rand",
    "gen_block_textured", "models_from_gt",
    "EvalReport", "bhattacharyya", "model_set_distance",
    "proportions_distance", "jaccard", "mean_jaccard", "evaluate",
]
