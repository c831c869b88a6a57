"""Partition agreement and mean-function error metrics."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import ContractError, TimeGrid, l2_distance, l2_norm


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    row_ids: tuple
    col_ids: tuple

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_labels(cls, a, b, row_ids=None, col_ids=None) -> "ContingencyTable":
        """Counts of label pairs; ``row_ids``/``col_ids`` add clusters with no samples."""
        a = np.asarray(a)
        b = np.asarray(b)
        if a.shape != b.shape:
            raise ContractError(f"label vectors differ in length: {a.size} vs {b.size}")
        rows = np.union1d(a, [] if row_ids is None else list(row_ids)).astype(np.int64)
        cols = np.union1d(b, [] if col_ids is None else list(col_ids)).astype(np.int64)
        ai = np.searchsorted(rows, a)
        bi = np.searchsorted(cols, b)
        counts = np.zeros((rows.size, cols.size), dtype=np.int64)
        np.add.at(counts, (ai, bi), 1)
        return cls(counts, tuple(int(r) for r in rows), tuple(int(c) for c in cols))


def _labels(p):
    return np.asarray(getattr(p, "labels", p))


def _comb2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def adjusted_rand_index(p1, p2) -> float:
    """Hubert-Arabie adjusted Rand index of two partitions (or label arrays)."""
    table = ContingencyTable.from_labels(_labels(p1), _labels(p2))
    n = table.total
    if n < 2:
        raise ContractError("ARI needs at least 2 samples")
    index = int(_comb2(table.counts).sum())
    sa = int(_comb2(table.row_sums).sum())
    sb = int(_comb2(table.col_sums).sum())
    expected = sa * sb / (n * (n - 1) // 2)
    max_index = (sa + sb) / 2
    if max_index == expected:
        # equivalent partitions have exactly one nonzero cell per row and column
        c = table.counts > 0
        same = np.all(c.sum(axis=0) == 1) and np.all(c.sum(axis=1) == 1)
        return 1.0 if same else 0.0
    return (index - expected) / (max_index - expected)


def match_clusters(estimated, truth, exhaustive_limit: int = 8,
                   estimated_ids=None, truth_ids=None) -> dict[int, int]:
    """Map estimated cluster ids to truth ids maximizing total agreement.

    One-to-one; when the cluster counts differ, the surplus clusters on the
    larger side stay unmatched. ``estimated_ids``/``truth_ids`` name clusters
    that should take part even if no sample carries them.
    """
    table = ContingencyTable.from_labels(_labels(estimated), _labels(truth),
                                         estimated_ids, truth_ids)
    C = table.counts
    r, c = C.shape
    if max(r, c) <= exhaustive_limit:
        best, best_score = None, -1
        if r <= c:
            for perm in itertools.permutations(range(c), r):
                score = int(C[np.arange(r), list(perm)].sum())
                if score > best_score:
                    best, best_score = list(zip(range(r), perm)), score
        else:
            for perm in itertools.permutations(range(r), c):
                score = int(C[list(perm), np.arange(c)].sum())
                if score > best_score:
                    best, best_score = list(zip(perm, range(c))), score
        pairs = best
    else:
        pairs = []
        work = C.astype(float)
        for _ in range(min(r, c)):
            # argmax returns the first maximum in row-major order: smallest ids win ties
            i, j = np.unravel_index(np.argmax(work), work.shape)
            pairs.append((int(i), int(j)))
            work[i, :] = -1
            work[:, j] = -1
    return {table.row_ids[i]: table.col_ids[j] for i, j in sorted(pairs)}


def standardized_rmse(true_mean, est_mean, grid: TimeGrid) -> float:
    """Relative L2 error ``||true - est|| / ||true||``."""
    norm = l2_norm(np.asarray(true_mean, dtype=float), grid)
    if norm == 0.0:
        raise ContractError("true mean has zero norm")
    return l2_distance(true_mean, est_mean, grid) / norm


def mean_rmse(true_means: dict, est_means: dict, estimated, truth, grid: TimeGrid) -> dict:
    """Per-true-cluster RMSE after matching, plus their unweighted average.

    Every estimated cluster with a mean takes part in the matching, including
    one that holds no evaluated sample (e.g. a cluster of outliers). A true
    cluster left unmatched (fewer estimated clusters) is scored against the
    estimated cluster holding most of its members.
    """
    est = _labels(estimated)
    tru = _labels(truth)
    mapping = match_clusters(est, tru, estimated_ids=list(est_means), truth_ids=list(true_means))
    inverse = {t: e for e, t in mapping.items()}
    per = {}
    for k in sorted(true_means):
        e = inverse.get(k)
        if e is None:
            ids, counts = np.unique(est[tru == k], return_counts=True)
            e = int(ids[np.argmax(counts)])
        per[k] = standardized_rmse(true_means[k], est_means[e], grid)
    return {"per_cluster": per, "mean": float(np.mean(list(per.values())))}
