"""Figure rendering for landscape grids, masks, run records, and summaries.

Figures are built on explicit Figure objects (no pyplot state), so batch
rendering never accumulates global figures and works headless. Every render
operation writes the image to the requested path and returns the Figure for
inspection.

Loss color scales are logarithmic with a floor of 1e-12 so exact zeros stay
plottable. Trajectories stop drawing at the first iteration where the
parameter step norm has stayed below 1e-4 for 20 consecutive iterations;
runs cut by that rule count as stalled and get their end-point loss
annotated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib
import numpy as np
from matplotlib.collections import LineCollection
from matplotlib.colors import LogNorm
from matplotlib.figure import Figure

from .readers import (
    GridData,
    read_grid_file,
    read_mask_file,
    read_records_csv,
    read_summary,
)

COLOR_FLOOR = 1e-12
STALL_NORM = 1e-4
STALL_STEPS = 20
FIGURE_KINDS = ("triptych", "trajectories", "boxplot", "quantiles", "last-epoch")

_TRAJECTORY_CMAP = "inferno"
_LR_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple",
              "tab:brown", "tab:pink", "tab:olive")


@dataclass(frozen=True)
class FigureSpec:
    """A renderable figure request: what kind, from which files, to where."""

    kind: str
    inputs: tuple[str, ...]
    output: str
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"figure kind must be one of {FIGURE_KINDS},"
                             f" got {self.kind!r}")
        if not self.inputs:
            raise ValueError("figure needs at least one input file")


@dataclass(frozen=True)
class QuantileTable:
    """Gradient-magnitude quantiles of one grid, keyed by quantile level."""

    resolution: int
    levels: tuple
    values: tuple

    def __post_init__(self):
        if len(self.levels) != len(self.values) or not self.levels:
            raise ValueError("levels and values must align and be non-empty")


def quantile_table(grid: GridData,
                   levels=(0.0, 0.25, 0.5, 0.75, 1.0)) -> QuantileTable:
    for level in levels:
        if not 0.0 <= level <= 1.0:
            raise ValueError(f"quantile level {level} outside [0, 1]")
    mags = grid.magnitudes().ravel()
    return QuantileTable(resolution=grid.resolution, levels=tuple(levels),
                         values=tuple(float(v) for v in np.quantile(mags, levels)))


def _loss_norm(values: np.ndarray) -> LogNorm:
    floored = np.maximum(values, COLOR_FLOOR)
    vmin = float(floored.min())
    vmax = float(floored.max())
    if vmax <= vmin:  # constant panel; LogNorm needs a nonzero span
        vmax = vmin * 10.0
    return LogNorm(vmin=vmin, vmax=vmax)


def _heatmap(ax, grid: GridData, data: np.ndarray, **imshow_kwargs):
    """Draw an (R, R) field with axis 0 (theta1) horizontal."""
    return ax.imshow(
        data.T,
        origin="lower",
        extent=(0.0, grid.domain_max, 0.0, grid.domain_max),
        **imshow_kwargs,
    )


def render_triptych(pairs, out_path: str) -> Figure:
    """One row per (grid, mask) pair: loss, gradient magnitude, mask.

    The loss panel uses the logarithmic color scale and carries the grid
    minimum in its title; the magnitude panel carries the peak; the mask
    panel shows non-deceptive cells bright and carries the deceptive share.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one (grid, mask) pair")
    for row, (grid, mask) in enumerate(pairs):
        if grid.resolution != mask.resolution:
            raise ValueError(
                f"row {row}: grid resolution {grid.resolution} does not match"
                f" mask resolution {mask.resolution}"
            )
    fig = Figure(figsize=(10.5, 3.4 * len(pairs)), constrained_layout=True)
    axes = fig.subplots(nrows=len(pairs), ncols=3, squeeze=False)
    for row, (grid, mask) in enumerate(pairs):
        ax_loss, ax_grad, ax_mask = axes[row]
        img = _heatmap(ax_loss, grid, np.maximum(grid.values, COLOR_FLOOR),
                       norm=_loss_norm(grid.values), cmap="viridis")
        fig.colorbar(img, ax=ax_loss, shrink=0.85)
        ax_loss.set_title(f"loss, min={grid.values.min():.3g}")
        ax_loss.set_ylabel(f"B={grid.repetitions}\ntheta2")

        mags = grid.magnitudes()
        img = _heatmap(ax_grad, grid, mags, cmap="magma")
        fig.colorbar(img, ax=ax_grad, shrink=0.85)
        ax_grad.set_title(f"|grad|, peak={mags.max():.3g}")

        share = float(np.mean(mask.mask == -1))
        _heatmap(ax_mask, grid, (mask.mask >= 0).astype(float),
                 cmap="gray", vmin=0.0, vmax=1.0)
        ax_mask.set_title(f"mask, share={share:.2f}")
        for ax in axes[row]:
            ax.set_xlabel("theta1")
    fig.savefig(out_path)
    return fig


def _truncate_at_stall(thetas: np.ndarray) -> tuple[np.ndarray, bool]:
    """Cut a trajectory at the first stalled iteration.

    Step k is theta[k] -> theta[k+1]; once STALL_STEPS consecutive steps fall
    below STALL_NORM, drawing stops at the iteration that completes the run
    of small steps.
    """
    steps = np.linalg.norm(np.diff(thetas, axis=0), axis=1)
    consecutive = 0
    for k, step in enumerate(steps):
        consecutive = consecutive + 1 if step < STALL_NORM else 0
        if consecutive >= STALL_STEPS:
            return thetas[:k + 2], True
    return thetas, False


def render_trajectories(runs, grid: GridData, out_path: str,
                        crop=None) -> Figure:
    """Optimization paths over the loss heatmap.

    Each path fades bright to dark from start to end, with the start circled
    and the end crossed; stalled runs are annotated with their loss at the
    cut. ``crop`` restricts both axes to a (low, high) window.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("no runs to draw")
    fig = Figure(figsize=(7.5, 6.5), constrained_layout=True)
    ax = fig.subplots()
    img = _heatmap(ax, grid, np.maximum(grid.values, COLOR_FLOOR),
                   norm=_loss_norm(grid.values), cmap="gray")
    fig.colorbar(img, ax=ax, label="loss")
    cmap = matplotlib.colormaps[_TRAJECTORY_CMAP]

    for run in runs:
        thetas, stalled = _truncate_at_stall(run.thetas)
        ax.plot(thetas[0, 0], thetas[0, 1], marker="o", markersize=7,
                markerfacecolor="white", markeredgecolor="black", zorder=4)
        if len(thetas) > 1:
            points = thetas.reshape(-1, 1, 2)
            segments = np.concatenate([points[:-1], points[1:]], axis=1)
            # bright at the start, dark at the end
            shades = cmap(np.linspace(0.85, 0.15, len(segments)))
            ax.add_collection(LineCollection(segments, colors=shades,
                                             linewidths=1.6, zorder=3))
            ax.plot(thetas[-1, 0], thetas[-1, 1], marker="x", markersize=8,
                    color="red", zorder=4)
        if stalled:
            loss_at_cut = run.losses[len(thetas) - 1]
            ax.annotate(f"{loss_at_cut:.3g}", xy=tuple(thetas[-1]),
                        xytext=(4, 4), textcoords="offset points",
                        fontsize=8, color="red", zorder=5)

    if crop is not None:
        low, high = crop
        if not high > low:
            raise ValueError("crop window must satisfy low < high")
        ax.set_xlim(low, high)
        ax.set_ylim(low, high)
    ax.set_xlabel("theta1")
    ax.set_ylabel("theta2")
    ax.set_title(f"B={grid.repetitions}, {len(runs)} runs")
    fig.savefig(out_path)
    return fig


def _cell_label(cell: dict) -> str:
    return f"B={cell['repetitions']}"


def _box_stats(group: dict, mode: str) -> dict:
    stats = group[mode]
    clip = lambda x: max(float(x), COLOR_FLOOR)  # log axis cannot take zeros
    return {
        "med": clip(stats["median"]),
        "q1": clip(stats["q25"]),
        "q3": clip(stats["q75"]),
        "whislo": clip(stats["min"]),
        "whishi": clip(stats["max"]),
        "mean": clip(stats["mean"]),
        "label": "",
    }


def render_success(summary: dict, out_path: str, mode: str = "best") -> Figure:
    """Best- or last-loss distributions per optimizer configuration.

    One subplot per optimizer; per repetition count, one box per learning
    rate, the grid ground-truth minimum as a thick black line, and the
    deceptiveness ratio on a twin axis.
    """
    if mode not in ("best", "last"):
        raise ValueError(f"mode must be 'best' or 'last', got {mode!r}")
    cells = sorted(summary.get("cells", []),
                   key=lambda c: (c.get("n_qubits"), c.get("repetitions")))
    if not cells:
        raise ValueError("summary contains no cells")
    for cell in cells:
        gt = cell.get("ground_truth", {})
        if not isinstance(gt.get("value"), (int, float)):
            raise ValueError(f"cell {_cell_label(cell)} is missing ground truth")
        if "optimizers" not in cell:
            raise ValueError(f"cell {_cell_label(cell)} has no optimizer summary")

    kinds = sorted({g["optimizer"] for c in cells
                    for g in c["optimizers"]["groups"]})
    lrs = sorted({g["learning_rate"] for c in cells
                  for g in c["optimizers"]["groups"]})
    fig = Figure(figsize=(5.5 * len(kinds), 4.8), constrained_layout=True)
    axes = np.atleast_1d(fig.subplots(nrows=1, ncols=len(kinds)))
    positions = np.arange(len(cells))
    width = 0.8 / max(len(lrs), 1)

    for ax, kind in zip(axes, kinds):
        for j, lr in enumerate(lrs):
            stats, where = [], []
            for i, cell in enumerate(cells):
                for group in cell["optimizers"]["groups"]:
                    if group["optimizer"] == kind and group["learning_rate"] == lr:
                        stats.append(_box_stats(group, mode))
                        where.append(positions[i] - 0.4 + (j + 0.5) * width)
            if not stats:
                continue
            color = _LR_COLORS[j % len(_LR_COLORS)]
            boxes = ax.bxp(stats, positions=where, widths=width * 0.85,
                           showfliers=False, patch_artist=True)
            for patch in boxes["boxes"]:
                patch.set_facecolor(color)
                patch.set_label(None)
            boxes["boxes"][0].set_label(f"lr={lr:g}")
        gt_values = [max(c["ground_truth"]["value"], COLOR_FLOOR) for c in cells]
        ax.plot(positions, gt_values, color="black", linewidth=3.0,
                label="ground truth", zorder=1)
        ax.set_yscale("log")
        ax.set_xticks(positions)
        ax.set_xticklabels([_cell_label(c) for c in cells])
        ax.set_title(f"{kind}, {mode} loss")
        ax.set_ylabel("loss")
        ax.legend(fontsize=8)

        twin = ax.twinx()
        ratios = [c["optimizers"].get("deceptiveness_ratio") for c in cells]
        if all(isinstance(r, (int, float)) for r in ratios):
            twin.plot(positions, ratios, color="dimgray", linestyle=":",
                      marker="d", label="deceptive fraction")
        twin.set_ylim(0.0, 1.0)
        twin.set_ylabel("deceptive fraction")
    fig.savefig(out_path)
    return fig


def render_quantiles(tables, out_path: str) -> Figure:
    """Gradient-magnitude quantile curves, one per resolution."""
    tables = sorted(tables, key=lambda t: t.resolution)
    if len({t.resolution for t in tables}) < 2:
        raise ValueError("need tables for at least two distinct resolutions")
    fig = Figure(figsize=(6.5, 4.8), constrained_layout=True)
    ax = fig.subplots()
    for table in tables:
        ax.plot(table.levels, table.values, marker="o",
                label=f"R={table.resolution}")
    ax.set_xlabel("quantile level")
    ax.set_ylabel("gradient magnitude")
    ax.legend()
    fig.savefig(out_path)
    return fig


def render(spec: FigureSpec) -> Figure:
    """Load the input files named by the request and draw the figure."""
    if spec.kind == "triptych":
        if len(spec.inputs) % 2 != 0:
            raise ValueError("triptych inputs must be grid/mask path pairs")
        pairs = [(read_grid_file(g), read_mask_file(m))
                 for g, m in zip(spec.inputs[0::2], spec.inputs[1::2])]
        return render_triptych(pairs, spec.output)
    if spec.kind == "trajectories":
        if len(spec.inputs) != 2:
            raise ValueError("trajectories needs a records CSV and a grid file")
        runs = read_records_csv(spec.inputs[0])
        grid = read_grid_file(spec.inputs[1])
        return render_trajectories(runs, grid, spec.output,
                                   crop=spec.style.get("crop"))
    if spec.kind in ("boxplot", "last-epoch"):
        if len(spec.inputs) != 1:
            raise ValueError(f"{spec.kind} takes exactly one summary file")
        summary = read_summary(spec.inputs[0])
        mode = "best" if spec.kind == "boxplot" else "last"
        return render_success(summary, spec.output, mode=mode)
    levels = spec.style.get("levels", (0.0, 0.25, 0.5, 0.75, 1.0))
    tables = [quantile_table(read_grid_file(path), levels)
              for path in spec.inputs]
    return render_quantiles(tables, spec.output)
