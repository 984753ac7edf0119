"""Shared helpers for the experiment scripts."""
from __future__ import annotations

import csv
import time
from pathlib import Path

from netskel.dynamics import DURATION, SIM_DT, build_dataset, initial_state, make_spec, simulate
from netskel.graph import generate_ba, generate_ws
from netskel.pipeline import TrainConfig, evaluate, train


def make_graph(kind: str, n: int, seed: int):
    return generate_ba(n, 3, seed) if kind == "ba" else generate_ws(n, 6, 0.1, seed)


def make_dataset(graph, dynamics: str, seed: int):
    spec = make_spec(dynamics, graph.node_count, seed)
    steps = int(round(DURATION[dynamics] / SIM_DT))
    return build_dataset(simulate(spec, graph, initial_state(spec, graph.node_count, seed), SIM_DT, steps), SIM_DT)


def fit(graph, ds, **cfg) -> dict:
    t0 = time.perf_counter()
    res = train(TrainConfig(**cfg), graph, ds)
    rep = evaluate(res.model, ds)
    return {"mean_mae": rep.mean_mae, "occupancy": rep.occupancy, "seconds": time.perf_counter() - t0}


def write_rows(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
