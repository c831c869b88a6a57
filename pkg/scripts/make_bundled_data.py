"""Regenerate the package's bundled data files.

* ``sites156.txt``: 156 pseudo-station coordinates in the 107-125E, 28-43N
  rectangle, used by the simulation designs;
* ``demo_cities_*.csv``: a 20-city, 731-day synthetic daily series with a
  few missing cells, used by the end-to-end pipeline test and README demo.
"""
from pathlib import Path

import numpy as np

DATA = Path(__file__).resolve().parents[1] / "src" / "rstc" / "data"


def make_sites(rng):
    # jittered lattice thinned at random: irregular but without large voids
    lon = np.linspace(107.5, 124.5, 16)
    lat = np.linspace(28.5, 42.5, 13)
    grid = np.array([(x, y) for x in lon for y in lat])
    keep = np.sort(rng.choice(len(grid), 156, replace=False))
    pts = grid[keep] + rng.uniform(-0.45, 0.45, size=(156, 2))
    lines = ["# lon lat (decimal degrees); synthetic sites, not real station coordinates"]
    lines += [f"{x:.4f} {y:.4f}" for x, y in pts]
    (DATA / "sites156.txt").write_text("\n".join(lines) + "\n")


def make_demo(rng):
    # two provinces-like groups of ten cities each, north and south
    north = np.column_stack([rng.uniform(113, 119, 10), rng.uniform(36, 40, 10)])
    south = np.column_stack([rng.uniform(110, 116, 10), rng.uniform(22, 26, 10)])
    locs = np.vstack([north, south])
    # the two cities mislabeled in the init file sit next to a correctly labeled
    # neighbour, so a 2nd-percentile threshold still lets them move
    locs[3] = locs[4] + (0.12, 0.08)
    locs[16] = locs[17] + (0.10, -0.11)
    days = np.arange(731)
    season = np.cos(2 * np.pi * (days - 15) / 365.25)
    ids = [f"city{i + 1:02d}" for i in range(20)]
    rows = []
    for i in range(20):
        if i < 10:
            base = 75 + 40 * season
        else:
            base = 35 + 12 * season
        y = base + rng.normal(0, 8, days.size)
        y = np.maximum(y, 2.0)
        rows.append(y)
    curves = np.array(rows)
    # sprinkle missing values (< 1%) including a leading gap
    miss = [(2, 0), (2, 1), (5, 100), (5, 101), (5, 102), (13, 400), (17, 730)]
    header = "id," + ",".join(str(d) for d in days)
    out = [header]
    for i, cid in enumerate(ids):
        vals = [f"{v:.1f}" for v in curves[i]]
        for r, c in miss:
            if r == i:
                vals[c] = ""
        out.append(cid + "," + ",".join(vals))
    (DATA / "demo_cities_curves.csv").write_text("\n".join(out) + "\n")
    loc_lines = ["id,lon,lat"] + [f"{cid},{x:.4f},{y:.4f}" for cid, (x, y) in zip(ids, locs)]
    (DATA / "demo_cities_locations.csv").write_text("\n".join(loc_lines) + "\n")
    # prior-knowledge init: by latitude band, with two cities placed in the wrong group
    init = [1 if y > 31 else 2 for _, y in locs]
    init[3], init[16] = 2, 1
    init_lines = ["id,cluster"] + [f"{cid},{k}" for cid, k in zip(ids, init)]
    (DATA / "demo_cities_init.csv").write_text("\n".join(init_lines) + "\n")


if __name__ == "__main__":
    make_sites(np.random.default_rng(20150101))
    make_demo(np.random.default_rng(20161231))
