"""Two-stage localization: coarse grid search, then derivative-free refinement.

Objectives follow the package convention: a (G, 2) batch of candidates maps
to a (G,) score vector and a single (2,) point to a scalar. Higher is better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SystemConfig


@dataclass(frozen=True)
class SearchGrid:
    """Uniform square lattice over [-r_s, r_s]^2."""

    points: np.ndarray   # (per_axis^2, 2), row-major (x outer, y inner)
    per_axis: int
    extent: float        # square side, 2 * r_s
    cell: float          # lattice spacing, m

    def __post_init__(self):
        self.points.setflags(write=False)


def grid_points_per_axis(cfg: SystemConfig) -> int:
    """Configured per-axis count, floored so the oversampled lattice keeps the
    objective's main lobe (width ~ the range resolution) on-grid."""
    floor = math.ceil(cfg.alpha_oversample * 2.0 * cfg.r_s / cfg.range_resolution)
    return max(cfg.n_grid_per_axis, floor)


def make_grid(cfg: SystemConfig) -> SearchGrid:
    per_axis = grid_points_per_axis(cfg)
    axis = np.linspace(-cfg.r_s, cfg.r_s, per_axis)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xx.reshape(-1), yy.reshape(-1)], axis=1)
    return SearchGrid(points=pts, per_axis=per_axis, extent=2.0 * cfg.r_s,
                      cell=2.0 * cfg.r_s / (per_axis - 1))


def grid_search(objective, grid: SearchGrid):
    """Return (best_point, best_score) over the lattice.

    Ties break to the lowest linear index; non-finite scores are skipped, and
    a fully non-finite objective is an error.
    """
    scores = np.asarray(objective(grid.points), dtype=float)
    finite = np.isfinite(scores)
    if not finite.any():
        raise ValueError("objective is non-finite at every grid point")
    masked = np.where(finite, scores, -np.inf)
    best = int(np.argmax(masked))
    return grid.points[best].copy(), float(scores[best])


def nelder_mead_refine(objective, start, initial_scale: float, tol: float = 1e-10,
                       max_iter: int = 200):
    """Classical 2-D Nelder-Mead ascent from a coarse estimate.

    Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    The initial simplex is the start point plus one offset of
    ``initial_scale`` along each axis. Stops when the relative score spread
    of the simplex drops below ``tol`` or after ``max_iter`` iterations, and
    returns the best vertex seen (never worse than the start).
    """
    start = np.asarray(start, dtype=float)
    if max_iter <= 0:
        return start.copy()
    simplex = np.array([start,
                        start + [initial_scale, 0.0],
                        start + [0.0, initial_scale]])
    scores = np.array([float(objective(v)) for v in simplex])

    for _ in range(max_iter):
        order = np.argsort(-scores, kind="stable")
        simplex, scores = simplex[order], scores[order]
        spread = scores[0] - scores[2]
        if spread <= tol * max(abs(scores[0]), abs(scores[2]), 1e-30):
            break
        centroid = simplex[:2].mean(axis=0)
        reflected = centroid + (centroid - simplex[2])
        f_r = float(objective(reflected))
        if f_r > scores[0]:
            expanded = centroid + 2.0 * (centroid - simplex[2])
            f_e = float(objective(expanded))
            if f_e > f_r:
                simplex[2], scores[2] = expanded, f_e
            else:
                simplex[2], scores[2] = reflected, f_r
        elif f_r > scores[1]:
            simplex[2], scores[2] = reflected, f_r
        else:
            if f_r > scores[2]:  # outside contraction
                contracted = centroid + 0.5 * (centroid - simplex[2])
                f_c = float(objective(contracted))
                accept = f_c >= f_r
            else:                # inside contraction
                contracted = centroid - 0.5 * (centroid - simplex[2])
                f_c = float(objective(contracted))
                accept = f_c > scores[2]
            if accept:
                simplex[2], scores[2] = contracted, f_c
            else:                # shrink toward the best vertex
                simplex[1] = simplex[0] + 0.5 * (simplex[1] - simplex[0])
                simplex[2] = simplex[0] + 0.5 * (simplex[2] - simplex[0])
                scores[1] = float(objective(simplex[1]))
                scores[2] = float(objective(simplex[2]))

    best = int(np.argmax(scores))
    return simplex[best].copy()
