"""Window-length x step-size grid for each algorithm, written as CSVs for heatmaps.

The grid spans windows of 4h-12h and steps of 30min-2h, which includes the
4h window with 30min steps.

    python scripts/sweep_grid.py --hours 24 --out-dir results/sweep
"""

import argparse
import csv
from pathlib import Path

from memestream.cli import main as cli
from memestream.synth import SynthConfig, follower_graph, write_jsonl

STEPS = (1800, 3600, 7200)
WINDOW_HOURS = (4, 6, 8, 12)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--hours", type=float, default=24)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results/sweep")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    synth = SynthConfig(rng_seed=args.seed, duration_hours=args.hours, noise_tweet_fraction=0.3,
                        user_overlap=0.2, shared_vocab=0.3)
    write_jsonl(synth, out / "stream.jsonl")
    follower_graph(synth).dump(out / "graph.txt")

    for algo in ("psc", "b1", "b2"):
        for dt in STEPS:
            ells = [int(h * 3600 // dt) for h in WINDOW_HOURS if h * 3600 % dt == 0]
            argv = ["sweep", "--input", str(out / "stream.jsonl"), "--out", str(out / f"{algo}_{dt}.csv"),
                    "--algorithm", algo, "--ell", ",".join(map(str, ells)), "--delta-t", str(dt),
                    "--seed", str(args.seed)]
            if algo == "b2":
                argv += ["--follower-graph", str(out / "graph.txt")]
            if cli(argv) != 0:
                raise SystemExit(f"sweep failed for {algo} dt={dt}")

        print(f"\n{algo.upper()} mean NMI (rows: window hours, cols: step minutes)")
        print("      " + "".join(f"{dt // 60:>8}" for dt in STEPS))
        table = {}
        for dt in STEPS:
            with open(out / f"{algo}_{dt}.csv") as fh:
                for r in csv.DictReader(fh):
                    table[(int(r["window_seconds"]) // 3600, dt)] = float(r["mean_nmi"])
        for h in WINDOW_HOURS:
            cells = "".join(f"{table[(h, dt)]:>8.3f}" if (h, dt) in table else f"{'-':>8}" for dt in STEPS)
            print(f"{h:>4}h " + cells)


if __name__ == "__main__":
    main()
