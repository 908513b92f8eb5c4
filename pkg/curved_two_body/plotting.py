"""Static, byte-reproducible SVG figures."""
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SVG_SALT = "curved-two-body"
FIGURE_SIZE = (6.0, 4.5)

plt.rcParams["svg.hashsalt"] = SVG_SALT
plt.rcParams["svg.fonttype"] = "none"


def save_svg(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def line_figure(
    curves: dict[str, Sequence[np.ndarray]],
    xlabel: str,
    ylabel: str,
    markers: dict[str, np.ndarray] | None = None,
    logx: bool = False,
):
    """One figure with a polyline per curve name; ``markers`` are drawn as dots."""
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    for name, segments in curves.items():
        for ii, segment in enumerate(segments):
            segment = np.asarray(segment, dtype=float).reshape(-1, 2)
            ax.plot(segment[:, 0], segment[:, 1], linewidth=1.0, label=name if ii == 0 else None)
    for name, points in (markers or {}).items():
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(points):
            ax.plot(points[:, 0], points[:, 1], "o", markersize=4, label=name)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if curves or markers:
        ax.legend(loc="best", fontsize="small")
    return fig


def scatter_figure(points: np.ndarray, xlabel: str, ylabel: str, fig_ax=None):
    fig, ax = fig_ax if fig_ax is not None else plt.subplots(figsize=FIGURE_SIZE)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    ax.scatter(points[:, 0], points[:, 1], s=1, color="0.7", rasterized=False)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig


def zero_level_polylines(x: np.ndarray, y: np.ndarray, values: np.ndarray) -> list[np.ndarray]:
    """Polylines of {values = 0} on the grid x × y; ``values`` has shape (len(x), len(y))."""
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    if finite.size == 0 or finite.min() > 0 or finite.max() < 0:
        return []
    fig, ax = plt.subplots()
    contour = ax.contour(x, y, np.ma.masked_invalid(values).T, levels=[0.0])
    segments = [np.asarray(segment) for segment in contour.allsegs[0] if len(segment) > 1]
    plt.close(fig)
    return segments
