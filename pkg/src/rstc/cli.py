"""Command-line front end: ``rstc {simulate,depth,cluster,evaluate}``.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numeric error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import (ConfigError, ContractError, DegenerateAngleError, IngestError,
                   InsufficientSampleError, NumericError, Partition)
from .depth import depth_vector
from .engine import RSTCConfig, rstc_cluster
from .experiment import replication_seeds
from .io import (align, load_dataset, read_curves, read_labels, read_means, read_truth, sha256,
                 write_curves, write_rows)
from .metrics import adjusted_rand_index, mean_rmse
from .simgen import SimConfig, generate_scenario
from .smooth import bspline_fit

log = logging.getLogger("rstc")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _load_json_config(path, cls, extra=()):
    """Parse a JSON object whose keys must be fields of ``cls`` (or ``extra``)."""
    if path is None:
        return {}, {}
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    allowed = {f.name for f in fields(cls)} | set(extra)
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown config key(s): {', '.join(unknown)}")
    own = {k: v for k, v in raw.items() if k not in extra}
    return own, {k: raw[k] for k in extra if k in raw}


def _build(cls, kwargs):
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {cls.__name__}: {exc}") from exc


def _write_manifest(out: Path, subcommand: str, argv, config: dict, seeds, inputs):
    manifest = {
        "subcommand": subcommand,
        "argv": list(argv),
        "config": config,
        "seeds": seeds,
        "inputs": {str(p): sha256(p) for p in inputs if p is not None},
        "version": __version__,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _simulate_one(args):
    cfg, rep_dir = args
    ds, truth = generate_scenario(cfg)
    rep_dir.mkdir(parents=True, exist_ok=True)
    write_curves(rep_dir / "curves.csv", ds.ids, ds.grid, ds.curves)
    write_rows(rep_dir / "locations.csv", ["id", "lon", "lat"],
               [[i, repr(float(x)), repr(float(y))] for i, (x, y) in zip(ds.ids, ds.locations)])
    write_rows(rep_dir / "truth.csv", ["id", "cluster", "outlier"],
               [[i, int(k), int(o)] for i, k, o in zip(ds.ids, truth.labels, truth.outlier_flags)])
    write_curves(rep_dir / "true_means.csv", [str(k) for k in truth.true_means], ds.grid,
                 np.stack(list(truth.true_means.values())))
    return len(ds)


def cmd_simulate(args) -> int:
    own, extra = _load_json_config(args.config, SimConfig, extra=("replications",))
    reps = int(extra.get("replications", 50))
    if reps < 1:
        raise ConfigError("replications must be positive")
    if args.seed is not None:
        own["seed"] = args.seed
    base = _build(SimConfig, own)
    out = Path(args.out or "sim_out")
    out.mkdir(parents=True, exist_ok=True)
    seeds = replication_seeds(base.seed, reps)
    jobs = [(replace(base, seed=s), out / f"rep_{r + 1:03d}") for r, s in enumerate(seeds)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            sizes = list(pool.map(_simulate_one, jobs))
    else:
        sizes = [_simulate_one(j) for j in jobs]
    _write_manifest(out, "simulate", args.argv, base.to_dict() | {"replications": reps},
                    seeds, [args.config])
    print(f"wrote {reps} replications ({sizes[0]} samples each) to {out}")
    return EXIT_OK


def cmd_depth(args) -> int:
    ids, grid, curves = read_curves(args.curves, args.max_missing)
    if len(ids) < 3:
        raise InsufficientSampleError(f"depth needs at least 3 curves, got {len(ids)}")
    report = depth_vector(curves, grid)
    pos = report.positions()
    rows = [[i, repr(float(d)), int(r)] for i, d, r in zip(ids, report.depths, pos)]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_rows(out / "depth.csv", ["id", "depth", "rank"], rows)
        _write_manifest(out, "depth", args.argv, {}, [], [args.curves])
    else:
        print("id,depth,rank")
        for r in rows:
            print(",".join(str(c) for c in r))
    return EXIT_OK


def cmd_cluster(args) -> int:
    own, _ = _load_json_config(args.config, RSTCConfig)
    for flag, key in (("alpha", "alpha"), ("threshold_percentile", "threshold_percentile"),
                      ("metric", "metric")):
        if getattr(args, flag) is not None:
            own[key] = getattr(args, flag)
    cfg = _build(RSTCConfig, own)
    ds = load_dataset(args.curves, args.locations, args.max_missing)
    init_map = read_labels(args.init)
    init_labels = np.array(align(list(ds.ids), init_map, "initial label"))
    if init_labels.min() < 1:
        raise ConfigError("initial cluster ids must be positive integers")
    init = Partition(init_labels, int(init_labels.max()))
    res = rstc_cluster(ds, init, cfg)

    out = Path(args.out or "rstc_out")
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / "labels.csv", ["id", "cluster"],
               [[i, int(k)] for i, k in zip(ds.ids, res.final.labels)])
    ks = sorted(res.means)
    write_curves(out / "means.csv", [str(k) for k in ks], ds.grid,
                 np.stack([res.means[k].curve for k in ks]))
    if args.smooth_knots is not None:
        fits = [bspline_fit(res.means[k].curve, ds.grid, args.smooth_knots) for k in ks]
        write_curves(out / "means_smoothed.csv", [str(k) for k in ks], ds.grid,
                     np.stack([f.fitted for f in fits]))
    write_rows(out / "history.csv", ["id"] + [f"iter_{m}" for m in range(len(res.history) + 1)],
               [[i, int(init.labels[j])] + [int(h.labels[j]) for h in res.history]
                for j, i in enumerate(ds.ids)])
    report = {
        "iterations": res.iterations,
        "stop_reason": res.stop_reason,
        "threshold": res.threshold,
        "dropped_clusters": res.dropped_clusters,
        "cluster_sizes": {str(k): int(np.sum(res.final.labels == k)) for k in ks},
        "warnings": res.warnings,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "cluster", args.argv, asdict(cfg) | {"smooth_knots": args.smooth_knots},
                    [], [args.curves, args.locations, args.init, args.config])
    print(f"{res.stop_reason} after {res.iterations} iteration(s); wrote results to {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    labels = read_labels(args.labels)
    truth = read_truth(args.truth)
    ids = list(truth)
    est = np.array(align(ids, labels, "estimated label"))
    tru = np.array([truth[i][0] for i in ids])
    outlier = np.array([truth[i][1] for i in ids])
    keep = ~outlier
    result = {"n": int(keep.sum()), "n_outliers_excluded": int(outlier.sum()),
              "ari": adjusted_rand_index(est[keep], tru[keep])}
    if (args.true_means is None) != (args.est_means is None):
        raise ConfigError("--true-means and --est-means must be given together")
    if args.true_means is not None:
        grid_t, true_means = read_means(args.true_means)
        grid_e, est_means = read_means(args.est_means)
        if grid_t != grid_e:
            raise IngestError("true and estimated means use different grids")
        rm = mean_rmse(true_means, est_means, est[keep], tru[keep], grid_t)
        result["rmse"] = rm["mean"]
        result["rmse_per_cluster"] = {str(k): v for k, v in rm["per_cluster"].items()}
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.json").write_text(text)
        _write_manifest(out, "evaluate", args.argv, {}, [],
                        [args.labels, args.truth, args.true_means, args.est_means])
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (unknown keys rejected)")
    common.add_argument("--out", help="output directory (simulate: sim_out, cluster: rstc_out)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--max-missing", type=float, default=0.05,
                        help="maximum fraction of missing values imputed per curve")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="rstc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="generate simulation replications")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("depth", parents=[common], help="angular depth of every curve")
    d.add_argument("curves")
    d.set_defaults(func=cmd_depth)

    c = sub.add_parser("cluster", parents=[common], help="run RSTC from an initial partition")
    c.add_argument("--curves", required=True)
    c.add_argument("--locations", required=True)
    c.add_argument("--init", required=True, help="initial labels CSV (id,cluster)")
    c.add_argument("--threshold-percentile", type=float)
    c.add_argument("--metric", choices=("geodesic", "euclidean"))
    c.add_argument("--alpha", type=float)
    c.add_argument("--smooth-knots", type=int, help="also write B-spline smoothed means")
    c.set_defaults(func=cmd_cluster)

    e = sub.add_parser("evaluate", parents=[common], help="ARI and mean-curve RMSE against truth")
    e.add_argument("--labels", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--true-means")
    e.add_argument("--est-means")
    e.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"rstc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"rstc: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (IngestError, ContractError, InsufficientSampleError, DegenerateAngleError,
            FileNotFoundError) as exc:
        print(f"rstc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
