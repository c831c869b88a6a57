"""Robust spatio-temporal clustering: alternate depth-trimmed cluster means
with nearest-mean reassignment restricted to spatially adjacent clusters."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, ContractError, Dataset, Partition, l2_distances_to
from .depth import DEFAULT_ALPHA, TrimmedMean, trimmed_mean
from .metrics import adjusted_rand_index
from .spatial import METRICS, DistanceMatrix, distance_percentile, pairwise_distances

log = logging.getLogger(__name__)

CONTINUE, FIXED_POINT, ARI_STOP, MAX_ITER = "continue", "fixed_point", "ari_stop", "max_iter"


@dataclass(frozen=True)
class RSTCConfig:
    alpha: float = DEFAULT_ALPHA
    threshold_percentile: float = 2.0
    metric: str = "geodesic"
    ari_stop: float = 0.999
    max_iter: int = 100
    # absolute threshold; overrides threshold_percentile when set (may be inf)
    threshold: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not 0.0 < self.threshold_percentile < 100.0:
            raise ConfigError(f"threshold_percentile must lie in (0, 100), got {self.threshold_percentile}")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not 0.0 < self.ari_stop <= 1.0:
            raise ConfigError(f"ari_stop must lie in (0, 1], got {self.ari_stop}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError(f"max_iter must be a positive integer, got {self.max_iter}")
        if self.threshold is not None and not self.threshold >= 0:
            raise ConfigError(f"threshold must be nonnegative, got {self.threshold}")


@dataclass
class RSTCResult:
    final: Partition
    history: list[Partition]
    means: dict[int, TrimmedMean]
    iterations: int
    stop_reason: str
    dropped_clusters: list[int]
    threshold: float
    warnings: list[str] = field(default_factory=list)


def cluster_means(dataset: Dataset, labels: Partition, alpha: float) -> dict[int, TrimmedMean]:
    """Trimmed mean of every nonempty cluster; ``retained`` holds dataset indices."""
    out = {}
    for k in labels.cluster_ids():
        idx = labels.members(k)
        tm = trimmed_mean(dataset.curves[idx], dataset.grid, alpha)
        out[k] = TrimmedMean(tm.curve, frozenset(int(idx[j]) for j in tm.retained), alpha)
    return out


def eligibility(labels: Partition, matrix: DistanceMatrix, threshold: float,
                cluster_ids: list[int]) -> np.ndarray:
    """Boolean ``(n, len(cluster_ids))``: may sample i join cluster k.

    Own cluster is always eligible; otherwise the closest other member of k
    must be strictly nearer than ``threshold``.
    """
    D = matrix.values
    lab = labels.labels
    n = lab.size
    ok = np.zeros((n, len(cluster_ids)), dtype=bool)
    for c, k in enumerate(cluster_ids):
        in_k = lab == k
        # members of k other than i itself; i is never in k when k is not its own cluster
        mind = np.where(in_k[None, :], D, np.inf).min(axis=1)
        ok[:, c] = (mind < threshold) | in_k
    return ok


def reassign_step(dataset: Dataset, labels: Partition, means: dict[int, TrimmedMean],
                  matrix: DistanceMatrix, threshold: float) -> Partition:
    """One synchronous sweep of constrained nearest-trimmed-mean reassignment."""
    ids = sorted(means)
    missing = set(labels.cluster_ids()) - set(ids)
    if missing:
        raise ContractError(f"no trimmed mean for clusters {sorted(missing)}")
    centers = np.stack([means[k].curve for k in ids])
    dist = l2_distances_to(dataset.curves, centers, dataset.grid)
    ok = eligibility(labels, matrix, threshold, ids)
    dist = np.where(ok, dist, np.inf)
    # argmin takes the first minimum: ids are ascending, so ties go to the smallest id
    best = np.argmin(dist, axis=1)
    new = np.asarray(ids)[best]
    stuck = ~ok.any(axis=1)
    new[stuck] = labels.labels[stuck]
    return Partition(new, labels.K)


def stopping_check(prev: Partition, nxt: Partition, ari_stop: float) -> str:
    if len(prev) != len(nxt):
        raise ContractError(f"partitions differ in length: {len(prev)} vs {len(nxt)}")
    if np.array_equal(prev.labels, nxt.labels):
        return FIXED_POINT
    if adjusted_rand_index(prev, nxt) >= ari_stop:
        return ARI_STOP
    return CONTINUE


def rstc_cluster(dataset: Dataset, init: Partition, config: RSTCConfig = RSTCConfig(),
                 matrix: DistanceMatrix | None = None) -> RSTCResult:
    """Run the clustering iteration from an initial partition until it settles."""
    if len(init) != len(dataset):
        raise ConfigError(f"initial partition has {len(init)} labels for {len(dataset)} samples")
    empty = [k for k in range(1, init.K + 1) if not np.any(init.labels == k)]
    if empty:
        raise ConfigError(f"initial clusters are empty: {empty}")
    if matrix is None:
        matrix = pairwise_distances(dataset.locations, config.metric)
    if config.threshold is not None:
        threshold = float(config.threshold)
    else:
        threshold = distance_percentile(matrix, config.threshold_percentile)
    log.debug("RSTC: n=%d K=%d threshold=%g", len(dataset), init.K, threshold)

    current = init
    history: list[Partition] = []
    dropped: list[int] = []
    reason = MAX_ITER
    for it in range(1, config.max_iter + 1):
        means = cluster_means(dataset, current, config.alpha)
        nxt = reassign_step(dataset, current, means, matrix, threshold)
        live = set(nxt.cluster_ids())
        for k in sorted(set(current.cluster_ids()) - live):
            log.info("cluster %d emptied at iteration %d; dropping it", k, it)
            dropped.append(k)
        history.append(nxt)
        status = stopping_check(current, nxt, config.ari_stop)
        current = nxt
        if status != CONTINUE:
            reason = status
            break

    notes = []
    if len(current.cluster_ids()) <= 1 < init.K:
        msg = f"all but one cluster dropped (dropped: {dropped})"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return RSTCResult(final=current, history=history,
                      means=cluster_means(dataset, current, config.alpha),
                      iterations=len(history), stop_reason=reason,
                      dropped_clusters=dropped, threshold=threshold, warnings=notes)
