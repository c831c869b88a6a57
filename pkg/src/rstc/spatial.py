"""Pairwise site distances, percentile thresholds and cluster proximity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ContractError

EARTH_RADIUS_KM = 6371.0
METRICS = ("geodesic", "euclidean")


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray
    metric: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ContractError("distance matrix must be square")
        if self.metric not in METRICS:
            raise ContractError(f"unknown metric {self.metric!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]

    def upper(self) -> np.ndarray:
        """Strictly upper-triangular entries (each unordered pair once)."""
        return self.values[np.triu_indices(len(self), k=1)]


def _check_lonlat(lon, lat):
    lon = np.asarray(lon, dtype=float)
    lat = np.asarray(lat, dtype=float)
    if np.any(~np.isfinite(lon)) or np.any(~np.isfinite(lat)):
        raise ContractError("coordinates must be finite")
    if np.any(np.abs(lon) > 180) or np.any(np.abs(lat) > 90):
        raise ContractError("longitude must lie in [-180, 180] and latitude in [-90, 90]")
    return np.radians(lon), np.radians(lat)


def _haversine(lon1, lat1, lon2, lat2):
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    a = np.sin(dlat / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def geodesic_km(p, q) -> float:
    """Great-circle distance in km between two (lon, lat) points, haversine formula."""
    lon, lat = _check_lonlat([p[0], q[0]], [p[1], q[1]])
    return float(_haversine(lon[0], lat[0], lon[1], lat[1]))


def pairwise_distances(points, metric: str = "geodesic") -> DistanceMatrix:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ContractError("need at least 2 points given as (n, 2) coordinates")
    if metric == "geodesic":
        lon, lat = _check_lonlat(pts[:, 0], pts[:, 1])
        d = _haversine(lon[:, None], lat[:, None], lon[None, :], lat[None, :])
    elif metric == "euclidean":
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=-1))
    else:
        raise ContractError(f"unknown metric {metric!r}; expected one of {METRICS}")
    # symmetrize bit-exactly; haversine is symmetric only up to round-off
    d = np.triu(d, k=1)
    d = d + d.T
    return DistanceMatrix(d, metric)


def distance_percentile(matrix: DistanceMatrix, p: float) -> float:
    """Nearest-rank ``p``-th percentile of the off-diagonal pairwise distances."""
    if not 0 < p <= 100:
        raise ContractError(f"percentile must lie in (0, 100], got {p}")
    vals = np.sort(matrix.upper())
    if vals.size == 0:
        raise ContractError("need at least 2 points")
    rank = math.ceil(p / 100 * vals.size - 1e-9)
    return float(vals[max(rank, 1) - 1])


def min_distance_to_cluster(i: int, members, matrix: DistanceMatrix) -> float:
    """Smallest distance from sample ``i`` to any other member of a cluster.

    A cluster consisting only of ``i`` itself yields 0.
    """
    members = np.asarray(sorted(set(int(j) for j in members)), dtype=int)
    if members.size == 0:
        raise ContractError("member set is empty")
    others = members[members != i]
    if others.size == 0:
        return 0.0
    return float(matrix.values[i, others].min())
