"""Least-squares cubic B-spline smoothing of curves on a grid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .core import ContractError, NumericError, TimeGrid

DEGREE = 3


@dataclass(frozen=True)
class SplineFit:
    knots: np.ndarray         # interior knots only
    coefficients: np.ndarray
    fitted: np.ndarray

    def spline(self, t0: float, t1: float) -> BSpline:
        full = np.concatenate([[t0] * (DEGREE + 1), self.knots, [t1] * (DEGREE + 1)])
        return BSpline(full, self.coefficients, DEGREE)


def clamped_knots(grid: TimeGrid, n_interior: int) -> tuple[np.ndarray, np.ndarray]:
    t0, t1 = grid.points[0], grid.points[-1]
    interior = t0 + (t1 - t0) * np.arange(1, n_interior + 1) / (n_interior + 1)
    full = np.concatenate([[t0] * (DEGREE + 1), interior, [t1] * (DEGREE + 1)])
    return interior, full


def bspline_design(grid: TimeGrid, n_interior: int) -> np.ndarray:
    _, full = clamped_knots(grid, n_interior)
    return BSpline.design_matrix(grid.points, full, DEGREE).toarray()


def bspline_fit(curve, grid: TimeGrid, n_interior_knots: int = 30) -> SplineFit:
    """Project ``curve`` onto the clamped cubic spline space with equally spaced knots."""
    y = np.asarray(curve, dtype=float)
    if y.shape != (len(grid),):
        raise ContractError(f"curve must have length {len(grid)}")
    if n_interior_knots < 0:
        raise ContractError("n_interior_knots must be nonnegative")
    n_basis = n_interior_knots + DEGREE + 1
    if len(grid) < n_basis:
        raise ContractError(f"need at least {n_basis} grid points for {n_interior_knots} interior knots")
    interior, _ = clamped_knots(grid, n_interior_knots)
    B = bspline_design(grid, n_interior_knots)
    coef, _, rank, _ = np.linalg.lstsq(B, y, rcond=None)
    if rank < n_basis:
        raise NumericError(f"spline design is rank deficient ({rank} < {n_basis}); "
                           "too few grid points in some knot span")
    return SplineFit(knots=interior, coefficients=coef, fitted=B @ coef)
