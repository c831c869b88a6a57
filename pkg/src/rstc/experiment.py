"""Simulation replications comparing RSTC against the k-means baseline."""
from __future__ import annotations

from dataclasses import replace

import numpy as np
from scipy.spatial import cKDTree

from .baselines import KMeansConfig, cluster_mean_curves, kmeans_curves
from .core import Dataset, Partition
from .engine import RSTCConfig, rstc_cluster
from .metrics import adjusted_rand_index, mean_rmse
from .simgen import SimConfig, SyntheticTruth, generate_scenario
from .spatial import pairwise_distances

PART1 = SimConfig(scenario="mrf", n_outliers=0)
PART2 = SimConfig(scenario="rule", n_outliers=15)
PART1_PERCENTILES = (10.0, 20.0, 30.0)
PART2_PERCENTILES = (10.0, 5.0, 2.0)


def replication_seeds(seed: int, count: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def truth_init(dataset: Dataset, truth: SyntheticTruth) -> Partition:
    """Initial partition from perfect prior knowledge: the true labels.

    Outliers have no true cluster and start in the cluster of their nearest
    inlier site.
    """
    labels = truth.labels.copy()
    inl = ~truth.outlier_flags
    if (~inl).any():
        _, j = cKDTree(dataset.locations[inl]).query(dataset.locations[~inl])
        labels[~inl] = labels[inl][j]
    return Partition(labels, truth.K)


def evaluate_partition(labels, est_means, dataset: Dataset, truth: SyntheticTruth) -> dict:
    labels = np.asarray(getattr(labels, "labels", labels))
    inl = ~truth.outlier_flags
    rm = mean_rmse(truth.true_means, est_means, labels[inl], truth.labels[inl], dataset.grid)
    return {"ari": adjusted_rand_index(labels[inl], truth.labels[inl]), "rmse": rm["mean"]}


def run_replication(sim: SimConfig, percentiles=(20.0,), alpha: float = 0.2,
                    kmeans_restarts: int = 10) -> dict:
    """Simulate one dataset and score RSTC (one run per percentile) and k-means."""
    ds, truth = generate_scenario(sim)
    init = truth_init(ds, truth)
    matrix = pairwise_distances(ds.locations, "euclidean")
    out = {"seed": sim.seed, "n": len(ds)}
    for p in percentiles:
        cfg = RSTCConfig(alpha=alpha, threshold_percentile=p, metric="euclidean")
        res = rstc_cluster(ds, init, cfg, matrix=matrix)
        means = {k: m.curve for k, m in res.means.items()}
        out[f"rstc_{p:g}"] = evaluate_partition(res.final, means, ds, truth) | {
            "iterations": res.iterations, "stop_reason": res.stop_reason}
    km = kmeans_curves(ds, KMeansConfig(K=truth.K, restarts=kmeans_restarts, seed=sim.seed))
    out["kmeans"] = evaluate_partition(km, cluster_mean_curves(ds.curves, km), ds, truth)
    return out


def run_study(base: SimConfig, replications: int, seed: int, percentiles, alpha: float = 0.2,
              jobs: int = 1) -> list[dict]:
    configs = [replace(base, seed=s) for s in replication_seeds(seed, replications)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(run_replication, configs, [tuple(percentiles)] * len(configs),
                                 [alpha] * len(configs)))
    return [run_replication(c, tuple(percentiles), alpha) for c in configs]


def summarize(results: list[dict]) -> dict:
    """Mean and standard deviation of ARI and RMSE per method."""
    methods = [k for k in results[0] if isinstance(results[0][k], dict)]
    summary = {}
    for m in methods:
        ari = np.array([r[m]["ari"] for r in results])
        rmse = np.array([r[m]["rmse"] for r in results])
        summary[m] = {"ari_mean": float(ari.mean()), "ari_sd": float(ari.std(ddof=1)) if len(ari) > 1 else 0.0,
                      "rmse_mean": float(rmse.mean()),
                      "rmse_sd": float(rmse.std(ddof=1)) if len(rmse) > 1 else 0.0}
    return summary
