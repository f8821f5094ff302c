"""Command-line interface.

Subcommands cover the full pipeline: synthetic data generation, color
quantization, moment estimation, model estimation, segmentation, evaluation
and the benchmark sweeps. File outputs are deterministic for fixed arguments
and seeds; wall-clock timings go to stderr (and, for bench, to the two
dedicated CSV timing columns).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .bench import PRESETS, preset_grid, run_grid
from .estimator import estimate_models
from .graphcut import EnergyParams, segment
from .imgio import (load_anymap, load_label_map, load_model_set,
                    save_anymap, save_label_map, save_model_set)
from .metrics import evaluate
from .moments import estimate_moments
from .plots import render_preset_figures
from .quantize import quantize_colors
from .synth import GenConfig, MASK_KINDS, MaskSpec, generate, make_mask, models_from_gt
from .types import DiscreteImage, RgbImage


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_discrete(path, colors: int, seed: int) -> DiscreteImage:
    """Load a graymap directly; quantize a pixmap down to `colors` indices."""
    img = load_anymap(path)
    if isinstance(img, RgbImage):
        quantized, _ = quantize_colors(img, colors, seed)
        _log(f"quantized {path} to {quantized.palette_size} colors")
        return quantized
    return img


def cmd_synth(args) -> int:
    mask = make_mask(MaskSpec(kind=args.mask, width=args.size, height=args.size))
    config = GenConfig(process=args.process, palette_size=args.L,
                       sigma=args.sigma, seed=args.seed)
    img = generate(mask, config)
    save_anymap(img, args.out_image)
    save_label_map(mask, args.out_mask)
    _log(f"wrote {args.out_image} and {args.out_mask} "
         f"({mask.num_regions} regions, L={args.L})")
    return 0


def cmd_quantize(args) -> int:
    img = load_anymap(args.input)
    if not isinstance(img, RgbImage):
        raise SystemExit("quantize expects a pixmap (P3/P6) input")
    quantized, palette = quantize_colors(img, args.colors, args.seed)
    save_anymap(quantized, args.output)
    doc = {"N": palette.num_colors,
           "centroids": [[float(c) for c in row] for row in palette.centroids]}
    with open(args.palette, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    _log(f"wrote {args.output} with {palette.num_colors} colors")
    return 0


def cmd_estimate_moments(args) -> int:
    img = _load_discrete(args.input, args.colors, args.quantize_seed)
    t0 = time.perf_counter()
    moments = estimate_moments(img, args.r, args.slices, args.beta_mode)
    _log(f"moment estimation took {time.perf_counter() - t0:.3f}s")
    doc = {
        "L": moments.palette_size,
        "r": moments.radius,
        "beta_mode": moments.beta_mode,
        "alpha": [float(v) for v in moments.alpha],
        "beta": [[float(v) for v in row] for row in moments.beta],
        "slice_colors": [int(c) for c in moments.slice_colors],
    }
    if args.gamma_out:
        gamma_file = args.gamma_out if args.gamma_out.endswith(".npy") \
            else args.gamma_out + ".npy"  # np.save appends the suffix itself
        np.save(gamma_file, moments.gamma_slices)
        doc["gamma_file"] = gamma_file
    else:
        doc["gamma_slices"] = [[[int(v) for v in row] for row in sl]
                               for sl in moments.gamma_slices]
    with open(args.output, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    return 0


def cmd_estimate(args) -> int:
    img = _load_discrete(args.input, args.colors, args.quantize_seed)
    t0 = time.perf_counter()
    moments = estimate_moments(img, args.r, args.slices, args.beta_mode)
    models = estimate_models(moments, args.k)
    _log(f"model estimation took {time.perf_counter() - t0:.3f}s")
    save_model_set(models, args.output)
    return 0


def cmd_segment(args) -> int:
    img = _load_discrete(args.input, args.colors, args.quantize_seed)
    t0 = time.perf_counter()
    moments = estimate_moments(img, args.r, args.slices, args.beta_mode)
    models = estimate_models(moments, args.k)
    t1 = time.perf_counter()
    seg = segment(img, models, EnergyParams(lam=args.lam))
    t2 = time.perf_counter()
    _log(f"estimation {t1 - t0:.3f}s, segmentation {t2 - t1:.3f}s")
    save_label_map(seg, args.labels)
    save_model_set(models, args.models)
    return 0


def cmd_eval(args) -> int:
    gt_seg = load_label_map(args.gt)
    gt_img = load_anymap(args.gt_image)
    if not isinstance(gt_img, DiscreteImage):
        raise SystemExit("eval expects a graymap ground-truth image")
    est_models = load_model_set(args.models)
    est_seg = load_label_map(args.labels)
    gt_models = models_from_gt(gt_img, gt_seg)
    report = evaluate(gt_models, est_models, gt_seg, est_seg)
    with open(args.output, "w", encoding="ascii") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    _log(f"d_b_models={report.d_b_models:.6g} "
         f"d_b_weights={report.d_b_weights:.6g} "
         f"mean_jaccard={report.mean_jaccard:.6g}")
    return 0


def cmd_bench(args) -> int:
    trials = 50 if args.full else args.trials
    grid = preset_grid(args.preset, trials=trials, seed0=args.seed)
    t0 = time.perf_counter()
    rows = run_grid(grid, out_dir=args.out)
    _log(f"preset {args.preset}: {len(rows)} cells in "
         f"{time.perf_counter() - t0:.1f}s")
    if not args.no_figures:
        for path in render_preset_figures(args.preset, rows, args.out):
            _log(f"wrote {path}")
    return 0


def _add_quantize_opts(p) -> None:
    p.add_argument("--colors", type=int, default=256,
                   help="palette size used when the input is a pixmap")
    p.add_argument("--quantize-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentseg",
        description="Appearance-model estimation from color co-occurrence "
                    "statistics, with graph-cut segmentation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic image and its mask")
    p.add_argument("--mask", choices=MASK_KINDS, required=True)
    p.add_argument("--process", choices=("gmm", "rand"), required=True)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--L", type=int, default=256)
    p.add_argument("--size", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("out_image")
    p.add_argument("out_mask")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("quantize", help="reduce a pixmap to N palette colors")
    p.add_argument("--colors", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("palette")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("estimate-moments",
                       help="estimate co-occurrence moments of an image")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--slices", type=int, required=True)
    p.add_argument("--beta-mode", choices=("ring", "axis"), default="ring")
    p.add_argument("--gamma-out", default=None,
                   help="write gamma slices to this .npy sidecar instead of inline")
    _add_quantize_opts(p)
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_estimate_moments)

    p = sub.add_parser("estimate", help="estimate region models and proportions")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--slices", type=int, required=True)
    p.add_argument("--beta-mode", choices=("ring", "axis"), default="ring")
    _add_quantize_opts(p)
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("segment", help="estimate models and segment the image")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--slices", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--beta-mode", choices=("ring", "axis"), default="ring")
    _add_quantize_opts(p)
    p.add_argument("input")
    p.add_argument("labels")
    p.add_argument("models")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", help="score models and labels against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--gt-image", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run a benchmark preset")
    p.add_argument("--preset", choices=PRESETS, required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--full", action="store_true",
                   help="use 50 trials per cell instead of the default")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
