import csv
import json
from importlib import resources

import numpy as np
import pytest

from rstc import adjusted_rand_index, min_distance_to_cluster, pairwise_distances
from rstc.cli import main
from rstc.io import read_curves, read_labels, read_locations

DATA = resources.files("rstc.data")
CURVES = str(DATA / "demo_cities_curves.csv")
LOCS = str(DATA / "demo_cities_locations.csv")
INIT = str(DATA / "demo_cities_init.csv")


def write(path, text):
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_depth_constant_triple(tmp_path, capsys):
    p = write(tmp_path / "c.csv", "id,0,0.5,1\na,0,0,0\nb,1,1,1\nc,2,2,2\n")
    assert main(["depth", p]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0] == "id,depth,rank"
    body = [r.split(",") for r in rows[1:]]
    assert len(body) == 3
    deepest = max(body, key=lambda r: int(r[2]))
    assert deepest[0] == "b" and float(deepest[1]) == 2.0


def test_depth_writes_file(tmp_path):
    out = tmp_path / "o"
    assert main(["depth", CURVES, "--out", str(out)]) == 0
    assert len(read_csv(out / "depth.csv")) == 21
    assert (out / "manifest.json").exists()


def test_depth_errors(tmp_path, capsys):
    dup = write(tmp_path / "d.csv", "id,0,1\na,0,0\nb,1,1\na,2,2\n")
    assert main(["depth", dup]) == 3
    assert "a" in capsys.readouterr().err
    two = write(tmp_path / "t.csv", "id,0,1\na,0,0\nb,1,1\n")
    assert main(["depth", two]) != 0
    assert main(["depth", str(tmp_path / "missing.csv")]) == 3


def run_cluster(out, *extra):
    return main(["cluster", "--curves", CURVES, "--locations", LOCS, "--init", INIT,
                 "--threshold-percentile", "2", "--metric", "geodesic", "--smooth-knots", "30",
                 "--out", str(out), *extra])


def test_cluster_pipeline_replays_constraint(tmp_path):
    out = tmp_path / "run"
    assert run_cluster(out) == 0
    for name in ("labels.csv", "means.csv", "means_smoothed.csv", "history.csv",
                 "report.json", "manifest.json"):
        assert (out / name).exists()
    report = json.loads((out / "report.json").read_text())
    assert report["stop_reason"] in ("fixed_point", "ari_stop")

    ids, grid, _ = read_curves(CURVES)
    locs = read_locations(LOCS)
    D = pairwise_distances(np.array([locs[i] for i in ids]), "geodesic")
    hist = read_csv(out / "history.csv")
    assert hist[0][0] == "id" and [r[0] for r in hist[1:]] == ids
    steps = np.array([[int(c) for c in r[1:]] for r in hist[1:]]).T
    assert len(steps) == report["iterations"] + 1
    for prev, nxt in zip(steps, steps[1:]):
        for i in np.flatnonzero(prev != nxt):
            assert min_distance_to_cluster(i, np.flatnonzero(prev == nxt[i]), D) < report["threshold"]
    final = read_labels(out / "labels.csv")
    np.testing.assert_array_equal([final[i] for i in ids], steps[-1])
    # the two deliberately mislabelled cities move to their neighbours' cluster
    assert final["city04"] == 1 and final["city17"] == 2
    assert read_csv(out / "means_smoothed.csv")[0] == read_csv(out / "means.csv")[0]


def test_cluster_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cluster(a) == 0 and run_cluster(b) == 0
    for name in ("labels.csv", "means.csv", "means_smoothed.csv", "history.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    assert ma["subcommand"] == "cluster" and ma["config"]["threshold_percentile"] == 2.0
    assert set(ma["inputs"]) == {CURVES, LOCS, INIT}


def test_cluster_correct_init_is_fixed_point(tmp_path):
    labels = read_labels(INIT)
    labels["city04"], labels["city17"] = 1, 2
    init = write(tmp_path / "init.csv", "id,cluster\n" + "".join(f"{k},{v}\n" for k, v in labels.items()))
    out = tmp_path / "o"
    assert main(["cluster", "--curves", CURVES, "--locations", LOCS, "--init", init,
                 "--out", str(out)]) == 0
    final = read_labels(out / "labels.csv")
    assert final == labels


def test_cluster_missing_location(tmp_path, capsys):
    lines = (DATA / "demo_cities_locations.csv").read_text().splitlines()
    locs = write(tmp_path / "l.csv", "\n".join(l for l in lines if not l.startswith("city07")) + "\n")
    code = main(["cluster", "--curves", CURVES, "--locations", locs, "--init", INIT,
                 "--out", str(tmp_path / "o")])
    assert code == 3
    assert "city07" in capsys.readouterr().err


def test_cluster_config_errors(tmp_path):
    bad = write(tmp_path / "cfg.json", json.dumps({"alpha": 0.1, "threshhold": 3}))
    args = ["cluster", "--curves", CURVES, "--locations", LOCS, "--init", INIT,
            "--out", str(tmp_path / "o")]
    assert main(args + ["--config", bad]) == 2
    assert main(args + ["--alpha", "1.5"]) == 2
    good = write(tmp_path / "ok.json", json.dumps({"alpha": 0.1, "metric": "geodesic"}))
    assert main(args + ["--config", good]) == 0
    assert main(["cluster"]) == 2


def test_simulate_sizes_and_determinism(tmp_path):
    cfg1 = write(tmp_path / "p1.json", json.dumps({"replications": 2}))
    cfg2 = write(tmp_path / "p2.json", json.dumps({"replications": 1, "scenario": "rule",
                                                   "n_outliers": 15}))
    assert main(["simulate", "--config", cfg1, "--out", str(tmp_path / "s1"), "--seed", "5"]) == 0
    assert len(read_csv(tmp_path / "s1" / "rep_002" / "curves.csv")) == 157
    assert main(["simulate", "--config", cfg2, "--out", str(tmp_path / "s2")]) == 0
    assert main(["simulate", "--config", cfg2, "--out", str(tmp_path / "s3")]) == 0
    for name in ("curves.csv", "locations.csv", "truth.csv", "true_means.csv"):
        a = (tmp_path / "s2" / "rep_001" / name).read_bytes()
        assert a == (tmp_path / "s3" / "rep_001" / name).read_bytes()
    assert len(read_csv(tmp_path / "s2" / "rep_001" / "curves.csv")) == 172
    m = json.loads((tmp_path / "s1" / "manifest.json").read_text())
    assert m["config"]["seed"] == 5 and len(m["seeds"]) == 2


def test_simulate_default_replications(tmp_path):
    cfg = write(tmp_path / "p.json", json.dumps({"n": 20, "sites": None, "gibbs_sweeps": 2}))
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "s"), "--jobs", "2"]) == 0
    assert len(list((tmp_path / "s").glob("rep_*"))) == 50


def test_simulate_bad_config(tmp_path):
    assert main(["simulate", "--config", write(tmp_path / "a.json", '{"nn": 3}'),
                 "--out", str(tmp_path / "o")]) == 2
    assert main(["simulate", "--config", write(tmp_path / "b.json", '{"phi": -1}'),
                 "--out", str(tmp_path / "o")]) == 2
    assert main(["simulate", "--config", write(tmp_path / "c.json", "[1]"),
                 "--out", str(tmp_path / "o")]) == 2


def test_simulate_then_evaluate(tmp_path, capsys):
    cfg = write(tmp_path / "p.json", json.dumps({"replications": 1, "scenario": "rule",
                                                 "n_outliers": 15}))
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "s")])
    rep = tmp_path / "s" / "rep_001"
    truth = read_csv(rep / "truth.csv")
    labels = write(tmp_path / "lab.csv", "id,cluster\n" + "".join(
        f"{r[0]},{r[1] if r[2] == '0' else 1}\n" for r in truth[1:]))
    capsys.readouterr()
    assert main(["evaluate", "--labels", labels, "--truth", str(rep / "truth.csv"),
                 "--true-means", str(rep / "true_means.csv"),
                 "--est-means", str(rep / "true_means.csv")]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["ari"] == 1.0 and res["rmse"] == 0.0
    assert res["n"] == 156 and res["n_outliers_excluded"] == 15


def test_evaluate_hand_case(tmp_path, capsys):
    truth = write(tmp_path / "t.csv", "id,cluster,outlier\na,1,0\nb,1,0\nc,2,0\nd,2,0\n")
    labels = write(tmp_path / "l.csv", "id,cluster\na,1\nb,1\nc,1\nd,2\n")
    assert main(["evaluate", "--labels", labels, "--truth", truth, "--out", str(tmp_path / "e")]) == 0
    assert json.loads(capsys.readouterr().out)["ari"] == 0.0
    assert json.loads((tmp_path / "e" / "metrics.json").read_text())["ari"] == 0.0
    short = write(tmp_path / "s.csv", "id,cluster\na,1\nb,1\nc,1\n")
    assert main(["evaluate", "--labels", short, "--truth", truth]) == 3
    assert main(["evaluate", "--labels", labels, "--truth", truth, "--true-means", truth]) == 2


def test_max_missing_flag(tmp_path):
    p = write(tmp_path / "m.csv", "id,0,1,2,3\na,0,,,0\nb,1,1,1,1\nc,2,2,2,2\n")
    assert main(["depth", p]) == 3
    assert main(["depth", p, "--max-missing", "0.5"]) == 0
