"""Reduction-ratio and cluster-count sweeps: MAE and occupancy per value.

    python scripts/sensitivity.py --param gamma --values 0.01 0.1 0.3 0.5 --dynamics cr
    python scripts/sensitivity.py --param k --values 1 4 7 10 --graph ws --dynamics fhn
"""
import argparse
from pathlib import Path

from _common import make_dataset, make_graph, write_rows

from netskel.pipeline import SWEEP_PARAMS, TrainConfig, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--param", choices=sorted(SWEEP_PARAMS), required=True)
    ap.add_argument("--values", nargs="+", required=True)
    ap.add_argument("--graph", choices=("ba", "ws"), default="ba")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--dynamics", choices=("fhn", "cr", "hr"), default="cr")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=5)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    g = make_graph(args.graph, args.n, args.seed)
    ds = make_dataset(g, args.dynamics, args.seed)
    values = [SWEEP_PARAMS[args.param](v) for v in args.values]
    base = TrainConfig(seed=args.seed, epochs=args.epochs, solver="euler")
    rows = []
    for row in sweep(base, args.param, values, g, ds):
        rep = row["report"]
        rows.append({"param": args.param, "value": row["value"],
                     "mean_mae": rep.mean_mae if rep else "", "occupancy": rep.occupancy if rep else "",
                     "error": row["error"] or ""})
        print(rows[-1], flush=True)
    write_rows(args.out or Path(f"results/sensitivity_{args.param}.csv"), rows)


if __name__ == "__main__":
    main()
