"""Synthetic spatio-temporal functional data.

Two membership designs over a planar lon/lat rectangle:

* ``mrf``: Potts-type Markov random field drawn by Gibbs sampling;
* ``rule``: a thresholded smooth score of the coordinates,

optionally followed by appended outlier curves at random sites. Curves are
cluster mean + two spatially correlated random-effect components + white
noise.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np
from scipy.spatial import cKDTree

from .core import ConfigError, ContractError, Dataset, NumericError, Partition, TimeGrid
from .spatial import pairwise_distances

OUTLIER_LABEL = 0
DEFAULT_REGION = (107.0, 125.0, 28.0, 43.0)  # lon_min, lon_max, lat_min, lat_max
SCENARIOS = ("mrf", "rule")


def default_grid() -> tuple[float, ...]:
    return tuple(j / 30 for j in range(1, 31))


@dataclass(frozen=True)
class SimConfig:
    n: int = 156
    grid: tuple[float, ...] = field(default_factory=default_grid)
    nu: float = 0.5
    K: int = 2
    phi: float = 1.0
    sigma_gamma: tuple[float, float] = (7.0, 2.0)
    sigma_eps: float = 0.4
    scenario: str = "mrf"
    n_outliers: int = 0
    region: tuple[float, float, float, float] = DEFAULT_REGION
    seed: int = 0
    # "bundled" = the packaged 156-site file; None = uniform sites in region; else a path
    sites: str | None = "bundled"
    gibbs_sweeps: int = 100

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(t) for t in self.grid))
        object.__setattr__(self, "sigma_gamma", tuple(float(s) for s in self.sigma_gamma))
        object.__setattr__(self, "region", tuple(float(r) for r in self.region))
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.scenario == "rule" and self.K != 2:
            raise ConfigError("the rule scenario produces exactly 2 clusters")
        if self.K not in (1, 2):
            raise ConfigError("mean functions are defined for K <= 2 only")
        if len(self.sigma_gamma) != 2 or min(self.sigma_gamma) < 0 or self.sigma_eps < 0:
            raise ConfigError("variances must be nonnegative and sigma_gamma has two entries")
        if self.phi <= 0:
            raise ConfigError("phi must be positive")
        if self.n_outliers < 0:
            raise ConfigError("n_outliers must be nonnegative")
        lo0, lo1, la0, la1 = self.region
        if not (lo0 < lo1 and la0 < la1):
            raise ConfigError("region must be (lon_min, lon_max, lat_min, lat_max)")
        try:
            TimeGrid(np.asarray(self.grid))
        except ContractError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = list(self.grid)
        d["sigma_gamma"] = list(self.sigma_gamma)
        d["region"] = list(self.region)
        return d


@dataclass
class SyntheticTruth:
    labels: np.ndarray          # cluster ids, OUTLIER_LABEL for outliers
    true_means: dict[int, np.ndarray]
    outlier_flags: np.ndarray
    K: int

    def inlier_partition(self) -> Partition:
        return Partition(self.labels[~self.outlier_flags], self.K)


def mean_function(k: int, t):
    t = np.asarray(t, dtype=float)
    if k == 1:
        return 1.8 * np.cos(np.pi * t ** 2)
    if k == 2:
        return np.cos(np.pi * t)
    raise ContractError(f"mean function defined for clusters 1 and 2, got {k}")


def eigenfunctions(q: int, t):
    """Random-effect basis: sqrt(2) sin(2 pi t) and the cubic Bernstein 3 t^2 (1 - t)."""
    t = np.asarray(t, dtype=float)
    if q == 1:
        return math.sqrt(2) * np.sin(2 * np.pi * t)
    if q == 2:
        return 3 * t ** 2 * (1 - t)
    raise ContractError(f"eigenfunction index must be 1 or 2, got {q}")


def load_sites(path: str | None = None) -> np.ndarray:
    """Read ``lon lat`` pairs, one per line; default is the bundled 156-site file."""
    if path is None or path == "bundled":
        text = resources.files("rstc.data").joinpath("sites156.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    try:
        pts = np.array([[float(a), float(b)] for a, b in rows])
    except ValueError as exc:
        raise ConfigError(f"malformed site file {path!r}: {exc}") from exc
    return pts


def uniform_sites(n: int, region, rng: np.random.Generator) -> np.ndarray:
    lo0, lo1, la0, la1 = region
    return np.column_stack([rng.uniform(lo0, lo1, n), rng.uniform(la0, la1, n)])


def knn_neighbors(locations, k: int = 4) -> np.ndarray:
    pts = np.asarray(locations, dtype=float)
    k = min(k, len(pts) - 1)
    _, idx = cKDTree(pts).query(pts, k=k + 1)
    # drop self; with coincident sites self may not come first
    out = np.empty((len(pts), k), dtype=int)
    for i, row in enumerate(idx):
        row = [j for j in row if j != i]
        out[i] = row[:k]
    return out


def gibbs_mrf_labels(locations, nu: float = 0.5, K: int = 2, sweeps: int = 100,
                     seed: int | np.random.Generator = 0, n_neighbors: int = 4) -> Partition:
    """Potts-model labels on a k-nearest-neighbour graph via single-site Gibbs sweeps."""
    if sweeps < 1:
        raise ContractError("sweeps must be at least 1")
    rng = np.random.default_rng(seed)
    nbrs = knn_neighbors(locations, n_neighbors)
    n = len(nbrs)
    z = rng.integers(1, K + 1, size=n)
    ks = np.arange(1, K + 1)
    for _ in range(sweeps):
        u = rng.random(n)
        for i in range(n):
            counts = (z[nbrs[i]][:, None] == ks).sum(axis=0)
            logits = nu * counts
            p = np.exp(logits - logits.max())
            cdf = np.cumsum(p / p.sum())
            z[i] = ks[min(np.searchsorted(cdf, u[i], side="right"), K - 1)]
    return Partition(z, K)


def rule_scores(locations, a1: float, a2: float) -> np.ndarray:
    lon = np.asarray(locations, dtype=float)[:, 0]
    lat = np.asarray(locations, dtype=float)[:, 1]
    return a1 * np.cos(2 * lon) + a2 * lon * lat


def rule_labels(locations, seed: int | np.random.Generator = 0,
                params: tuple[float, float, float] | None = None) -> Partition:
    """Cluster 2 where a random smooth coordinate score exceeds its beta-quantile.

    ``params`` = (a1, a2, beta) bypasses the random draw.
    """
    rng = np.random.default_rng(seed)
    if params is None:
        a1 = rng.uniform(-1, 1)
        a2 = rng.uniform(-0.5, 0.5)
        beta = rng.uniform(0.3, 0.7)
    else:
        a1, a2, beta = params
    s = rule_scores(locations, a1, a2)
    cut = np.sort(s)[max(math.ceil(beta * s.size - 1e-12), 1) - 1]
    return Partition(1 + (s > cut).astype(int), 2)


def sample_gp_effects(locations, sigma2: float, phi: float,
                      seed: int | np.random.Generator = 0) -> np.ndarray:
    """One draw of a zero-mean field with covariance sigma2 * exp(-d / phi).

    Coincident sites share one value exactly.
    """
    if sigma2 < 0 or phi <= 0:
        raise ContractError("need sigma2 >= 0 and phi > 0")
    rng = np.random.default_rng(seed)
    pts = np.asarray(locations, dtype=float)
    uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
    inverse = np.ravel(inverse)
    normals = rng.standard_normal(len(uniq))
    if sigma2 == 0:
        return np.zeros(len(pts))
    cov = sigma2 * np.exp(-pairwise_distances(uniq, "euclidean").values / phi) \
        if len(uniq) > 1 else np.full((1, 1), sigma2)
    L = _jittered_cholesky(cov)
    return (L @ normals)[inverse]


def _jittered_cholesky(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-8
    while jitter <= 1e-4 * (1 + 1e-9):
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(len(cov)))
        except np.linalg.LinAlgError:
            jitter *= 10
    raise NumericError("covariance not factorizable even with 1e-4 diagonal jitter")


def outlier_curve(t, c: float, c1: float):
    t = np.asarray(t, dtype=float)
    return 3 * c * np.exp(np.cos(np.pi * (t - c1)))


def generate_scenario(config: SimConfig) -> tuple[Dataset, SyntheticTruth]:
    rng = np.random.default_rng(config.seed)
    t = np.asarray(config.grid)
    grid = TimeGrid(t)

    if config.sites is None:
        sites = uniform_sites(config.n, config.region, rng)
    else:
        sites = load_sites(config.sites)
        if len(sites) != config.n:
            raise ConfigError(f"site file has {len(sites)} sites but n = {config.n}")

    if config.scenario == "mrf":
        labels = gibbs_mrf_labels(sites, config.nu, config.K, config.gibbs_sweeps, rng).labels
    else:
        labels = rule_labels(sites, rng).labels

    m = config.n_outliers
    out_sites = uniform_sites(m, config.region, rng)
    locs = np.vstack([sites, out_sites])
    n_total = config.n + m

    gamma = np.column_stack([sample_gp_effects(locs, s2, config.phi, rng)
                             for s2 in config.sigma_gamma])
    basis = np.vstack([eigenfunctions(1, t), eigenfunctions(2, t)])

    curves = np.empty((n_total, t.size))
    true_means = {k: mean_function(k, t) for k in range(1, config.K + 1)}
    for i in range(config.n):
        curves[i] = true_means[int(labels[i])]
    cs = rng.uniform(1, 2, m)
    c1s = rng.uniform(0, 1, m)
    for j in range(m):
        curves[config.n + j] = outlier_curve(t, cs[j], c1s[j])
    curves += gamma @ basis
    curves += rng.normal(0.0, math.sqrt(config.sigma_eps), size=curves.shape)

    flags = np.zeros(n_total, dtype=bool)
    flags[config.n:] = True
    truth_labels = np.concatenate([labels, np.full(m, OUTLIER_LABEL)])
    ids = [f"s{i + 1:03d}" for i in range(config.n)] + [f"o{j + 1:03d}" for j in range(m)]
    ds = Dataset(grid=grid, ids=tuple(ids), locations=locs, curves=curves,
                 meta={"config": config.to_dict()})
    truth = SyntheticTruth(labels=truth_labels, true_means=true_means, outlier_flags=flags,
                           K=config.K)
    return ds, truth
