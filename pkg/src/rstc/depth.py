"""Angular depth for discretized functional data and the depth-trimmed mean.

The production path evaluates the closed form

    D(z | X) = (2 / pi) * E[ angle(X1 - z, X2 - z) ]

by averaging over all unordered pairs of sample curves. A Monte-Carlo
estimator of the projection definition (``projection_depth_oracle``) is
provided for cross-checking only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (ContractError, DegenerateAngleError, InsufficientSampleError,
                   TimeGrid, _check_pair)

DEFAULT_ALPHA = 0.2


@dataclass(frozen=True)
class DepthReport:
    depths: np.ndarray
    ranks: np.ndarray  # sample indices ordered by ascending depth, ties by index

    @property
    def deepest(self) -> int:
        return int(self.ranks[-1])

    def positions(self) -> np.ndarray:
        """1-based position of each sample in the ascending-depth order."""
        pos = np.empty_like(self.ranks)
        pos[self.ranks] = np.arange(1, self.ranks.size + 1)
        return pos


@dataclass(frozen=True)
class TrimmedMean:
    curve: np.ndarray
    retained: frozenset
    alpha: float


def angle(a, b, grid: TimeGrid) -> float:
    """Angle in [0, pi] between two curves under the L2 inner product."""
    a, b = _check_pair(a, b, grid)
    w = grid.weights
    na = math.sqrt(float(np.sum(w * a * a)))
    nb = math.sqrt(float(np.sum(w * b * b)))
    if na == 0.0 or nb == 0.0:
        raise DegenerateAngleError("angle undefined for a zero-norm curve")
    cos = float(np.sum(w * a * b)) / (na * nb)
    return math.acos(min(1.0, max(-1.0, cos)))


def _mean_pair_angle(diffs: np.ndarray, w: np.ndarray) -> float:
    """Mean angle over unordered pairs of rows of ``diffs``, skipping zero rows."""
    sq = np.einsum("ij,ij,j->i", diffs, diffs, w)
    d = diffs[sq > 0]
    sq = sq[sq > 0]
    m = d.shape[0]
    if m < 2:
        raise InsufficientSampleError(
            f"angular depth needs at least 2 curves distinct from the query, got {m}")
    gram = (d * w) @ d.T
    cos = np.clip(gram / np.sqrt(np.outer(sq, sq)), -1.0, 1.0)
    iu = np.triu_indices(m, k=1)
    cos = cos[iu]
    ang = np.arccos(cos)
    near = np.abs(cos) > _NEAR_PARALLEL
    if near.any():
        ang[near] = _stable_angles(d, w, sq, iu[0][near], iu[1][near])
    return float(np.mean(ang))


# arccos loses half the digits as |cos| -> 1; such pairs are recomputed
_NEAR_PARALLEL = 1 - 1e-6
_ANGLE_EPS = 1e-12


def _stable_angles(d, w, sq, i, j):
    """Half-angle formula 2*atan2(|u - v|, |u + v|) on unit vectors; exact-zero
    and exact-pi angles are restored below ``_ANGLE_EPS``."""
    u = d[i] / np.sqrt(sq[i])[:, None]
    v = d[j] / np.sqrt(sq[j])[:, None]
    minus = np.sqrt(np.sum(w * (u - v) ** 2, axis=1))
    plus = np.sqrt(np.sum(w * (u + v) ** 2, axis=1))
    ang = 2 * np.arctan2(minus, plus)
    ang[ang < _ANGLE_EPS] = 0.0
    ang[ang > np.pi - _ANGLE_EPS] = np.pi
    return ang


def angular_depth(z, sample, grid: TimeGrid) -> float:
    """Empirical angular depth of ``z`` with respect to ``sample``.

    Sample curves identical to ``z`` are skipped. The value can exceed 1 in
    degenerate collinear configurations; it is not clamped.
    """
    z = np.asarray(z, dtype=float)
    X = np.atleast_2d(np.asarray(sample, dtype=float))
    if z.shape != (len(grid),) or X.shape[1:] != (len(grid),):
        raise ContractError("curves must match the grid length")
    return 2.0 / math.pi * _mean_pair_angle(X - z, grid.weights)


def depth_vector(curves, grid: TimeGrid) -> DepthReport:
    """Depth of every curve with respect to the others (leave-one-out)."""
    X = np.asarray(curves, dtype=float)
    n = X.shape[0]
    if n < 3:
        raise InsufficientSampleError(f"depth_vector needs at least 3 curves, got {n}")
    w = grid.weights
    depths = np.empty(n)
    idx = np.arange(n)
    for i in range(n):
        depths[i] = 2.0 / math.pi * _mean_pair_angle(X[idx != i] - X[i], w)
    ranks = np.lexsort((idx, depths))
    return DepthReport(depths=depths, ranks=ranks)


def projection_depth_oracle(z, sample, grid: TimeGrid, num_directions: int = 2000,
                            seed: int = 0) -> float:
    """Monte-Carlo estimate of the projection-based depth definition.

    Directions are standard Gaussian in the frame where the quadrature inner
    product is Euclidean (coordinates scaled by sqrt of trapezoid weights).
    Used only to cross-check :func:`angular_depth`.
    """
    if num_directions < 100:
        raise ContractError("num_directions must be at least 100")
    X = np.atleast_2d(np.asarray(sample, dtype=float))
    if X.size == 0 or X.shape[0] == 0:
        raise InsufficientSampleError("empty sample")
    z = np.asarray(z, dtype=float)
    sw = np.sqrt(grid.weights)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((num_directions, len(grid)))
    proj_x = (X * sw) @ U.T           # (n, M)
    proj_z = (z * sw) @ U.T           # (M,)
    F = np.mean(proj_x <= proj_z, axis=0)
    return float(1.0 - 4.0 * np.mean((F - 0.5) ** 2))


def _trim_count(alpha: float, n: int) -> int:
    # guard against 0.29 * 100 = 28.999... style round-off
    return min(int(math.floor(alpha * n + 1e-9)), n - 1)


def trimmed_mean(curves, grid: TimeGrid, alpha: float = DEFAULT_ALPHA) -> TrimmedMean:
    """Pointwise mean after discarding the ``floor(alpha * n)`` shallowest curves."""
    X = np.atleast_2d(np.asarray(curves, dtype=float))
    n = X.shape[0]
    if X.size == 0 or n == 0:
        raise InsufficientSampleError("trimmed mean of an empty set")
    if not 0.0 <= alpha < 1.0:
        raise ContractError(f"alpha must lie in [0, 1), got {alpha}")
    m = _trim_count(alpha, n)
    keep = np.arange(n)
    if n > 2 and m > 0:
        w = grid.weights
        depths = np.empty(n)
        for i in range(n):
            try:
                depths[i] = 2.0 / math.pi * _mean_pair_angle(np.delete(X, i, axis=0) - X[i], w)
            except InsufficientSampleError:
                # all but at most one other curve coincide with this one: it sits on the mode
                depths[i] = np.inf
        order = np.lexsort((np.arange(n), depths))
        keep = np.sort(order[m:])
    return TrimmedMean(curve=X[keep].mean(axis=0), retained=frozenset(int(i) for i in keep),
                       alpha=alpha)
