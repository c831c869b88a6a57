"""Shared domain types and curve arithmetic on a common time grid.

Curves are plain 1-D float arrays; a dataset stacks them row-wise into an
``(n, l)`` matrix that shares one :class:`TimeGrid`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class RSTCError(Exception):
    """Base class for errors raised by this package."""


class ContractError(RSTCError, ValueError):
    """An argument violates an operation's preconditions."""


class IngestError(RSTCError, ValueError):
    """Raw input data cannot be turned into valid curves."""


class InsufficientSampleError(RSTCError, ValueError):
    """Too few usable curves for a depth computation."""


class DegenerateAngleError(RSTCError, ValueError):
    """Angle requested between curves where one has zero norm."""


class ConfigError(RSTCError, ValueError):
    """Invalid configuration or initial partition."""


class NumericError(RSTCError, ArithmeticError):
    """A numerical factorization or fit failed."""


@dataclass(frozen=True)
class TimeGrid:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ContractError("time grid needs at least 2 points")
        if not np.all(np.isfinite(pts)) or np.any(np.diff(pts) <= 0):
            raise ContractError("time grid must be finite and strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size

    @classmethod
    def uniform(cls, start: float, stop: float, num: int) -> "TimeGrid":
        return cls(np.linspace(start, stop, num))

    @property
    def weights(self) -> np.ndarray:
        """Composite trapezoid weights, so that ``sum(w * f)`` approximates the integral."""
        h = np.diff(self.points)
        w = np.zeros_like(self.points)
        w[:-1] += h / 2
        w[1:] += h / 2
        return w

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


@dataclass(frozen=True)
class Partition:
    labels: np.ndarray
    K: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise ContractError("labels must be one-dimensional")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise ContractError("labels must be integers")
        labels = labels.astype(np.int64)
        if self.K < 1:
            raise ContractError("K must be positive")
        if labels.size and (labels.min() < 1 or labels.max() > self.K):
            raise ContractError(f"labels must lie in 1..{self.K}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.size

    def __eq__(self, other):
        return (isinstance(other, Partition) and self.K == other.K
                and np.array_equal(self.labels, other.labels))

    def __hash__(self):
        return hash((self.K, self.labels.tobytes()))

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)

    def cluster_ids(self) -> list[int]:
        """Ids of nonempty clusters, ascending."""
        return [int(k) for k in np.unique(self.labels)]


@dataclass(frozen=True)
class Dataset:
    """Curves, ids and locations sharing one grid.

    ``locations`` is ``(n, 2)`` holding (lon, lat) or planar (x, y).
    """

    grid: TimeGrid
    ids: tuple[str, ...]
    locations: np.ndarray
    curves: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        curves = np.asarray(self.curves, dtype=float)
        locs = np.asarray(self.locations, dtype=float)
        n = len(ids)
        if n < 2:
            raise ContractError("a dataset needs at least 2 samples")
        if len(set(ids)) != n:
            seen, dup = set(), []
            for i in ids:
                if i in seen:
                    dup.append(i)
                seen.add(i)
            raise IngestError(f"duplicate sample ids: {', '.join(dup)}")
        if curves.shape != (n, len(self.grid)):
            raise ContractError(f"curves must have shape ({n}, {len(self.grid)}), got {curves.shape}")
        if locs.shape != (n, 2):
            raise ContractError(f"locations must have shape ({n}, 2), got {locs.shape}")
        if not np.all(np.isfinite(curves)):
            raise ContractError("curves must be finite; impute missing values first")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "locations", locs)

    def __len__(self) -> int:
        return len(self.ids)


def _check_pair(a, b, grid: TimeGrid):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (len(grid),) or b.shape != (len(grid),):
        raise ContractError(f"curves must have length {len(grid)}, got {a.shape} and {b.shape}")
    return a, b


def inner_product(a, b, grid: TimeGrid) -> float:
    """Trapezoid approximation of the integral of ``a * b`` over the grid."""
    a, b = _check_pair(a, b, grid)
    return float(np.sum(grid.weights * a * b))


def l2_norm(a, grid: TimeGrid) -> float:
    return float(np.sqrt(max(inner_product(a, a, grid), 0.0)))


def l2_distance(a, b, grid: TimeGrid) -> float:
    a, b = _check_pair(a, b, grid)
    return l2_norm(a - b, grid)


def l2_distances_to(curves: np.ndarray, targets: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Matrix of L2 distances between each row of ``curves`` and each row of ``targets``."""
    w = grid.weights
    diff = curves[:, None, :] - targets[None, :, :]
    return np.sqrt(np.sum(w * diff * diff, axis=-1))


def interpolate_missing(values: Sequence, grid: TimeGrid, max_missing: float = 0.05,
                        sample_id: str | None = None) -> np.ndarray:
    """Fill missing entries (``None`` or NaN) of one raw series.

    Interior gaps are linearly interpolated in time; leading and trailing gaps
    take the nearest observed value.
    """
    arr = np.array([np.nan if v is None else v for v in values], dtype=float)
    name = f"sample {sample_id!r}" if sample_id is not None else "sample"
    if arr.shape != (len(grid),):
        raise IngestError(f"{name}: expected {len(grid)} values, got {arr.size}")
    missing = np.isnan(arr)
    if np.any(np.isinf(arr)):
        raise IngestError(f"{name}: infinite values")
    if not missing.any():
        return arr
    if missing.all():
        raise IngestError(f"{name}: all values missing")
    if missing.mean() > max_missing:
        raise IngestError(f"{name}: {missing.mean():.1%} missing exceeds cap {max_missing:.1%}")
    t = grid.points
    # np.interp extends with the end values outside the observed range
    arr[missing] = np.interp(t[missing], t[~missing], arr[~missing])
    return arr
