"""k-means on raw curve vectors, used as the comparison baseline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, Dataset, Partition


@dataclass(frozen=True)
class KMeansConfig:
    K: int = 2
    restarts: int = 10
    max_iter: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.K < 1 or self.restarts < 1 or self.max_iter < 1:
            raise ConfigError("K, restarts and max_iter must be positive")


@dataclass
class KMeansRun:
    labels: np.ndarray      # 0-based
    centers: np.ndarray
    objective: float
    trace: list[float]      # objective after every Lloyd iteration


def _sqdist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=-1)


def _seed_centers(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """Distance-squared weighted seeding (k-means++)."""
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total <= 0:
            # every point already coincides with a center
            j = rng.integers(n)
        else:
            j = int(np.searchsorted(np.cumsum(d2) / total, rng.random(), side="right"))
            j = min(j, n - 1)
        centers.append(X[j])
        d2 = np.minimum(d2, ((X - X[j]) ** 2).sum(axis=1))
    return np.array(centers)


def lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = 300) -> KMeansRun:
    centers = centers.copy()
    trace = []
    labels = None
    for _ in range(max_iter):
        d = _sqdist(X, centers)
        new = np.argmin(d, axis=1)
        trace.append(float(d[np.arange(len(X)), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for k in range(len(centers)):
            pts = X[labels == k]
            if len(pts):
                centers[k] = pts.mean(axis=0)
    d = _sqdist(X, centers)
    obj = float(d[np.arange(len(X)), labels].sum())
    return KMeansRun(labels=labels, centers=centers, objective=obj, trace=trace)


def kmeans_runs(X: np.ndarray, config: KMeansConfig) -> list[KMeansRun]:
    streams = np.random.SeedSequence(config.seed).spawn(config.restarts)
    return [lloyd(X, _seed_centers(X, config.K, np.random.default_rng(s)), config.max_iter)
            for s in streams]


def kmeans_curves(dataset: Dataset, config: KMeansConfig = KMeansConfig()) -> Partition:
    X = np.asarray(dataset.curves, dtype=float)
    if len(X) < config.K:
        raise ConfigError(f"cannot form {config.K} clusters from {len(X)} samples")
    runs = kmeans_runs(X, config)
    best = min(runs, key=lambda r: r.objective)   # first minimum wins ties
    return Partition(best.labels + 1, config.K)


def cluster_mean_curves(curves: np.ndarray, labels) -> dict[int, np.ndarray]:
    labels = np.asarray(getattr(labels, "labels", labels))
    return {int(k): curves[labels == k].mean(axis=0) for k in np.unique(labels)}
