"""Figure rendering for benchmark CSV rows.

Every preset gets a small set of matplotlib figures written next to the CSV.
Figures are presentation artifacts derived from the rows (including the
wall-time columns), so unlike the metric columns they are not covered by the
byte-reproducibility guarantee.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render_preset_figures"]


def _f(row, key):
    v = row.get(key, "")
    return float(v) if v not in ("", None) else float("nan")


def _ok(rows):
    return [r for r in rows if not r.get("error")]


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _plot_table1(rows, out_dir):
    masks = sorted({r["mask"] for r in rows})
    procs = sorted({r["process"] for r in rows})
    written = []
    for metric, label, fname in (("jac_mean", "mean Jaccard", "table1_jaccard.png"),
                                 ("db_theta_mean", "mean model distance", "table1_db.png")):
        fig, ax = plt.subplots(figsize=(6.4, 3.2))
        width = 0.8 / max(len(procs), 1)
        for i, proc in enumerate(procs):
            vals = []
            for mask in masks:
                sel = [r for r in rows if r["mask"] == mask and r["process"] == proc]
                vals.append(_f(sel[0], metric) if sel else float("nan"))
            ax.bar([j + i * width for j in range(len(masks))], vals,
                   width=width, label=proc)
        ax.set_xticks([j + 0.4 - width / 2 for j in range(len(masks))])
        ax.set_xticklabels(masks, rotation=20, ha="right", fontsize=8)
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
        written.append(_save(fig, out_dir, fname))
    return written


def _plot_lines(rows, out_dir, xkey, fname, xlabel, with_time=True):
    procs = sorted({r["process"] for r in rows})
    masks = sorted({r["mask"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.4, 3.2))
    ax2 = ax.twinx() if with_time else None
    for proc in procs:
        for mask in masks:
            sel = sorted((r for r in rows
                          if r["process"] == proc and r["mask"] == mask),
                         key=lambda r: float(r[xkey]))
            if not sel:
                continue
            xs = [float(r[xkey]) for r in sel]
            tag = f"{mask}/{proc}" if len(masks) > 1 else proc
            ax.plot(xs, [_f(r, "db_theta_mean") for r in sel],
                    marker="o", label=f"{tag} distance")
            if ax2 is not None:
                ax2.plot(xs, [_f(r, "t_est_s") for r in sel],
                         marker="s", linestyle="--", label=f"{tag} time")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("mean model distance")
    if ax2 is not None:
        ax2.set_ylabel("estimation time (s)")
    ax.legend(fontsize=7, loc="upper left")
    return [_save(fig, out_dir, fname)]


def _plot_noise(rows, out_dir):
    masks = sorted({r["mask"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.4, 3.2))
    ax2 = ax.twinx()
    for mask in masks:
        sel = sorted((r for r in rows if r["mask"] == mask),
                     key=lambda r: float(r["sigma"]))
        xs = [float(r["sigma"]) for r in sel]
        ax.plot(xs, [_f(r, "db_theta_mean") for r in sel], marker="o",
                label=f"{mask} distance")
        ax2.plot(xs, [_f(r, "jac_mean") for r in sel], marker="s",
                 linestyle="--", label=f"{mask} Jaccard")
    ax.set_xlabel("sigma")
    ax.set_ylabel("mean model distance")
    ax2.set_ylabel("mean Jaccard")
    ax2.set_ylim(0.0, 1.05)
    ax.legend(fontsize=7, loc="upper left")
    ax2.legend(fontsize=7, loc="lower left")
    return [_save(fig, out_dir, "noise_sweep.png")]


def _plot_sizecolors(rows, out_dir):
    written = []
    procs = sorted({r["process"] for r in rows})
    for proc in procs:
        sel = [r for r in rows if r["process"] == proc]
        sizes = sorted({int(r["size"]) for r in sel})
        colors = sorted({int(r["L"]) for r in sel})
        for metric, fname in (("db_theta_mean", f"sizecolors_db_{proc}.png"),
                              ("t_est_s", f"sizecolors_time_{proc}.png")):
            grid = [[next((_f(r, metric) for r in sel
                           if int(r["size"]) == d and int(r["L"]) == L),
                          float("nan"))
                     for d in sizes] for L in colors]
            fig, ax = plt.subplots(figsize=(4.2, 3.2))
            im = ax.imshow(grid, origin="lower", aspect="auto",
                           extent=[min(sizes), max(sizes), min(colors), max(colors)])
            fig.colorbar(im, ax=ax)
            ax.set_xlabel("image side")
            ax.set_ylabel("palette size")
            ax.set_title(f"{proc}: {metric}", fontsize=9)
            written.append(_save(fig, out_dir, fname))
    return written


def _plot_rsweep(rows, out_dir):
    procs = sorted({r["process"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.4, 3.2))
    for proc in procs:
        sel = sorted((r for r in rows if r["process"] == proc),
                     key=lambda r: int(r["r"]))
        ax.plot([int(r["r"]) for r in sel], [_f(r, "jac_mean") for r in sel],
                marker="o", label=proc)
    ax.set_xlabel("sampling radius")
    ax.set_ylabel("mean Jaccard")
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "r_sweep.png")]


def render_preset_figures(preset: str, rows, out_dir) -> list:
    """Render the figures for one preset; returns the written paths."""
    rows = _ok(rows)
    if not rows:
        return []
    os.makedirs(out_dir, exist_ok=True)
    if preset == "table1":
        return _plot_table1(rows, out_dir)
    if preset == "slices":
        return _plot_lines(rows, out_dir, "slices", "slices_sweep.png",
                           "retained slices")
    if preset == "noise":
        return _plot_noise(rows, out_dir)
    if preset == "sizecolors":
        return _plot_sizecolors(rows, out_dir)
    if preset == "rsweep":
        return _plot_rsweep(rows, out_dir)
    return []
