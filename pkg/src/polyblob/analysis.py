"""Ensemble analyses: kernel density estimates, mode detection, and
hysteresis-loop metrics for stress vs. mean-square extension curves."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateLoop
from .timeseries import TimeSeries


def kde_density(
    ensemble: np.ndarray,
    grid_x: np.ndarray,
    grid_y: np.ndarray,
    h_kde: float | None = None,
) -> np.ndarray:
    """Gaussian kernel density estimate on a rectangular lattice.

    Returns density values of shape (len(grid_x), len(grid_y)).  The
    default bandwidth is Scott-style, N^(-1/6) times the pooled standard
    deviation of the sample.  When the grid covers the support, lattice
    sum times cell area approximates 1.
    """
    q = np.asarray(ensemble, dtype=float)
    n = q.shape[0]
    if h_kde is None:
        std = float(np.sqrt(q.var(axis=0).mean()))
        h_kde = max(std, 1e-12) * n ** (-1.0 / 6.0)
    gx = np.asarray(grid_x, dtype=float)
    gy = np.asarray(grid_y, dtype=float)
    dx = gx[:, None] - q[None, :, 0]          # (gx, N)
    dy = gy[:, None] - q[None, :, 1]          # (gy, N)
    ex = np.exp(-(dx**2) / (2.0 * h_kde**2))
    ey = np.exp(-(dy**2) / (2.0 * h_kde**2))
    dens = ex @ ey.T / (n * 2.0 * np.pi * h_kde**2)
    return dens


def find_modes(
    density: np.ndarray,
    grid_x: np.ndarray,
    grid_y: np.ndarray,
    rel_threshold: float = 0.2,
) -> list[tuple[float, float, float]]:
    """Interior local maxima (8-neighborhood) above a fraction of the peak."""
    d = np.asarray(density)
    peak = d.max()
    if peak <= 0:
        return []
    core = d[1:-1, 1:-1]
    is_max = np.ones_like(core, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            is_max &= core >= d[1 + di : d.shape[0] - 1 + di, 1 + dj : d.shape[1] - 1 + dj]
    is_max &= core >= rel_threshold * peak
    out = []
    for i, j in zip(*np.nonzero(is_max)):
        out.append((float(grid_x[i + 1]), float(grid_y[j + 1]), float(core[i, j])))
    out.sort(key=lambda m: -m[2])
    return out


def bimodality(
    ensemble: np.ndarray,
    b: float,
    grid_points: int = 161,
    h_kde: float | None = None,
) -> tuple[bool, list[tuple[float, float, float]]]:
    """Detector for the double-spike configuration of extensible ensembles.

    Fires when the KDE has two local maxima above 20% of the global peak
    separated by more than sqrt(b); returns the detected modes as well.
    """
    half = 1.15 * np.sqrt(b)
    grid = np.linspace(-half, half, grid_points)
    dens = kde_density(ensemble, grid, grid, h_kde=h_kde)
    modes = find_modes(dens, grid, grid)
    sep = np.sqrt(b)
    for a in range(len(modes)):
        for c in range(a + 1, len(modes)):
            dist = np.hypot(modes[a][0] - modes[c][0], modes[a][1] - modes[c][1])
            if dist > sep:
                return True, modes
    return False, modes


def hysteresis_loop(series: TimeSeries) -> dict[str, float]:
    """Loop metrics of the (mean-square extension, normal stress) trajectory.

    ``series`` must carry columns ``mean_sq_ext_over_b`` and
    ``normal_stress_diff`` spanning a loading and a relaxation phase.
    The signed area is the shoelace sum over the ordered trajectory
    (closed from last back to first point); the width is the largest
    vertical gap between the two branches at common extension.
    """
    x = np.asarray(series["mean_sq_ext_over_b"], dtype=float)
    y = np.asarray(series["normal_stress_diff"], dtype=float)
    if x.size < 3:
        raise DegenerateLoop("trajectory too short to enclose a loop")
    k_max = int(np.argmax(x))
    span = x.max() - x[0]
    if span <= 0:
        raise DegenerateLoop("no loading phase detected")
    returned = np.abs(x[k_max:] - x[0]) <= 0.05 * span
    if not np.any(returned):
        raise DegenerateLoop("trajectory never returns near its starting extension")

    area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    load_x, load_y = x[: k_max + 1], y[: k_max + 1]
    ret_x, ret_y = x[k_max:][::-1], y[k_max:][::-1]
    lo = max(load_x.min(), ret_x.min())
    hi = min(load_x.max(), ret_x.max())
    width = 0.0
    if hi > lo:
        common = np.linspace(lo, hi, 200)
        yl = np.interp(common, *_monotone(load_x, load_y))
        yr = np.interp(common, *_monotone(ret_x, ret_y))
        width = float(np.max(np.abs(yl - yr)))
    return {"area": area, "width": width}


def _monotone(x: np.ndarray, y: np.ndarray):
    """Sort a branch by x for interpolation (duplicates keep first)."""
    order = np.argsort(x, kind="stable")
    return x[order], y[order]
