"""Run both simulation designs and print mean (sd) ARI / RMSE tables.

Part 1: MRF memberships, no outliers, RSTC at the 10/20/30th distance
percentiles. Part 2: rule memberships plus 15 outliers, RSTC at the
10/5/2nd percentiles. k-means is the baseline in both.

    python3 scripts/reproduce_tables.py --replications 50 --jobs 4
"""
import argparse
import json
import time
from pathlib import Path

from rstc.experiment import (PART1, PART1_PERCENTILES, PART2, PART2_PERCENTILES, run_study,
                             summarize)


def format_table(title, summary):
    lines = [title, f"{'method':<12}{'ARI':>18}{'RMSE':>18}"]
    for method, s in summary.items():
        lines.append(f"{method:<12}{s['ari_mean']:>10.3f} ({s['ari_sd']:.3f})"
                     f"{s['rmse_mean']:>10.3f} ({s['rmse_sd']:.3f})")
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replications", type=int, default=50)
    ap.add_argument("--seed", type=int, default=20240101)
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--part", choices=("1", "2", "both"), default="both")
    ap.add_argument("--json", type=Path, help="also dump per-replication results here")
    args = ap.parse_args()

    designs = {"1": ("Part 1: MRF memberships", PART1, PART1_PERCENTILES),
               "2": ("Part 2: rule memberships + 15 outliers", PART2, PART2_PERCENTILES)}
    dump = {}
    for key in ("1", "2") if args.part == "both" else (args.part,):
        title, base, pcts = designs[key]
        t0 = time.time()
        results = run_study(base, args.replications, args.seed, pcts, args.alpha, args.jobs)
        print(format_table(f"{title} ({args.replications} replications, "
                           f"{time.time() - t0:.1f} s)", summarize(results)))
        print()
        dump[f"part{key}"] = results
    if args.json:
        args.json.write_text(json.dumps(dump, indent=2) + "\n")


if __name__ == "__main__":
    main()
