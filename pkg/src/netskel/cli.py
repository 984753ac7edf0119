"""Command-line driver: graphs, simulation, training, evaluation, sweeps and exports.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dynamics import (DURATION, SIM_DT, STATE_DIM, build_dataset, initial_state, load_dataset,
                       make_spec, save_dataset, simulate)
from .graph import Graph, generate_ba, generate_ws, graph_stats, load_edge_list, save_edge_list
from .pipeline import (TrainConfig, content_hash, evaluate, export_latent, export_skeleton, load_model,
                       persistence_baseline, save_model, sweep, train, write_metrics_csv)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("netskel")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

MODEL_KEYS = ("gamma", "k", "solver", "ode_dt", "ode_init_scale", "latent_dim", "hidden", "agg_dim",
              "assign_depth", "assignment", "physics_init", "riemannian_squared_norm", "skeleton_norm")
TRAIN_KEYS = ("batch_size", "epochs", "lr", "alpha_s", "alpha_e", "alpha_r", "seed", "finetune_epochs",
              "pretrain_iters", "pretrain_lr", "max_train_windows")

DEFAULT_RUN = {
    "graph": {"kind": "ba", "n": 200, "m": 3, "k": 4, "p": 0.1, "seed": 0, "path": ""},
    "dynamics": {"kind": "fhn", "seed": 0},
    "dataset": {"observations": 500, "lookback": 12, "horizon": 120, "path": ""},
    "model": {k: getattr(TrainConfig, k) for k in MODEL_KEYS},
    "train": {k: getattr(TrainConfig, k) for k in TRAIN_KEYS},
    "eval": {"split": "test", "batch_size": 16},
}

class ConfigError(ValueError):
    pass

# -- configuration ---------------------------------------------------------------------
def _coerce(value, like):
    if isinstance(like, bool):
        if isinstance(value, str):
            low = value.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ConfigError(f"expected a boolean, got {value!r}")
        return bool(value)
    if isinstance(like, int):
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"expected an integer, got {value!r}")
        return int(value)
    if isinstance(like, float):
        return float(value)
    return str(value)

def resolve_config(file_cfg: dict | None = None, overrides: list[str] | None = None) -> dict:
    """Defaults <- file <- `section.key=value` overrides; unknown sections/keys are rejected."""
    cfg = json.loads(json.dumps(DEFAULT_RUN))
    for section, values in (file_cfg or {}).items():
        if section not in cfg:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, v in values.items():
            if key not in cfg[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            cfg[section][key] = _coerce(v, DEFAULT_RUN[section][key])
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        lhs, v = item.split("=", 1)
        section, key = lhs.split(".", 1)
        if section not in cfg or key not in cfg[section]:
            raise ConfigError(f"unknown key {lhs}")
        cfg[section][key] = _coerce(v, DEFAULT_RUN[section][key])
    return cfg

def read_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        return tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from None

def train_config(cfg: dict) -> TrainConfig:
    values = {**cfg["model"], **cfg["train"],
              "lookback": cfg["dataset"]["lookback"], "horizon": cfg["dataset"]["horizon"]}
    return TrainConfig(**values).validate()

def graph_from_config(gcfg: dict) -> Graph:
    if gcfg["path"]:
        return load_edge_list(gcfg["path"])
    if gcfg["kind"] == "ba":
        return generate_ba(gcfg["n"], gcfg["m"], gcfg["seed"])
    if gcfg["kind"] == "ws":
        return generate_ws(gcfg["n"], gcfg["k"], gcfg["p"], gcfg["seed"])
    raise ConfigError(f"unknown graph kind {gcfg['kind']!r}")

def simulate_dataset(graph: Graph, kind: str, seed: int, observations: int = 500,
                     lookback: int = 12, horizon: int = 120):
    spec = make_spec(kind, graph.node_count, seed)
    steps = int(round(DURATION[spec.kind] / SIM_DT))
    raw = simulate(spec, graph, initial_state(spec, graph.node_count, seed), SIM_DT, steps)
    meta = {"dynamics": spec.to_json(), "sim_dt": SIM_DT, "raw_steps": steps + 1,
            "init_seed": seed}
    return build_dataset(raw, SIM_DT, observations, lookback, horizon, meta=meta)

def dataset_from_config(cfg: dict, graph: Graph):
    d = cfg["dataset"]
    if d["path"]:
        ds = load_dataset(d["path"], d["lookback"], d["horizon"])
        if ds.n_nodes != graph.node_count:
            raise ConfigError(f"trajectory has {ds.n_nodes} nodes, graph has {graph.node_count}")
        return ds
    return simulate_dataset(graph, cfg["dynamics"]["kind"], cfg["dynamics"]["seed"], d["observations"],
                            d["lookback"], d["horizon"])

# -- commands ------------------------------------------------------------------------------
def cmd_generate_graph(args) -> int:
    if args.kind == "ba":
        g = generate_ba(args.n, args.m, args.seed)
    else:
        g = generate_ws(args.n, args.k, args.p, args.seed)
    save_edge_list(g, args.out)
    print(json.dumps({"out": str(args.out), **graph_stats(g)}, default=float))
    return EXIT_OK

def cmd_simulate(args) -> int:
    graph = load_edge_list(args.graph)
    ds = simulate_dataset(graph, args.dynamics, args.seed, args.observations)
    ds.meta["graph"] = str(args.graph)
    save_dataset(args.out, ds)
    print(json.dumps({"out": str(args.out), "observations": ds.n_obs, "nodes": ds.n_nodes,
                      "state_dim": ds.state_dim, "dt_obs": ds.dt_obs}))
    return EXIT_OK

def _write_summary(path, rep, cfg: dict, digest: str, extra: dict | None = None) -> None:
    body = {**rep.summary(), "config": cfg, "content_hash": digest, **(extra or {})}
    Path(path).write_text(json.dumps(body, indent=2, default=float))

def cmd_train(args) -> int:
    cfg = resolve_config(read_config(args.config), args.set)
    tcfg = train_config(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    echo = json.dumps(cfg, indent=2)
    print(echo)
    (out / "resolved_config.json").write_text(echo)
    graph = graph_from_config(cfg["graph"])
    ds = dataset_from_config(cfg, graph)
    save_dataset(out / "data.dskt", ds)
    res = train(tcfg, graph, ds)
    save_model(out / "model", res.model, ds, {"run_config": cfg})
    rep = evaluate(res.model, ds, cfg["eval"]["split"], cfg["eval"]["batch_size"])
    base = persistence_baseline(ds, cfg["eval"]["split"])
    write_metrics_csv(out / "metrics.csv", [("model", rep), ("persistence", base)])
    (out / "train_log.json").write_text(json.dumps(res.log, indent=2, default=float))
    export_skeleton(out / "skeleton", res.model)
    _write_summary(out / "summary.json", rep, cfg, content_hash(graph, ds, cfg),
                   {"persistence_mean_mae": base.mean_mae})
    print(json.dumps({"mean_mae": rep.mean_mae, "persistence_mean_mae": base.mean_mae,
                      "occupancy": rep.occupancy}))
    return EXIT_OK

def cmd_eval(args) -> int:
    model = load_model(args.model)
    ds = load_dataset(args.data, model.cfg.lookback, model.cfg.horizon)
    if ds.n_nodes != model.graph.node_count:
        raise ConfigError(f"trajectory has {ds.n_nodes} nodes, model expects {model.graph.node_count}")
    rep = evaluate(model, ds, args.split)
    out = Path(args.out) if args.out else Path(args.model) / f"eval_{args.split}.csv"
    write_metrics_csv(out, [(args.run_id, rep)])
    print(json.dumps({"out": str(out), **rep.summary()}, default=float))
    return EXIT_OK

def cmd_sweep(args) -> int:
    cfg = resolve_config(read_config(args.config) if args.config else None, args.set)
    base = train_config(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(json.dumps(cfg, indent=2))
    graph = graph_from_config(cfg["graph"])
    ds = dataset_from_config(cfg, graph)
    rows = sweep(base, args.param, args.values, graph, ds, cfg["eval"]["split"])
    metrics, summaries = [], []
    for row in rows:
        run_id = f"{args.param}={row['value']}"
        entry = {"run_id": run_id, "param": args.param, "value": row["value"], "error": row["error"]}
        if row["report"] is not None:
            metrics.append((run_id, row["report"]))
            entry.update(row["report"].summary())
        summaries.append(entry)
    write_metrics_csv(out / "sweep_metrics.csv", metrics)
    body = {"runs": summaries, "config": cfg, "content_hash": content_hash(graph, ds, cfg)}
    (out / "sweep_summary.json").write_text(json.dumps(body, indent=2, default=float))
    for entry in summaries:
        print(json.dumps(entry, default=float))
    return EXIT_OK if all(r["error"] is None for r in rows) else EXIT_NUMERIC

def cmd_export_skeleton(args) -> int:
    model = load_model(args.model)
    paths = export_skeleton(args.out, model)
    if args.data:
        ds = load_dataset(args.data, model.cfg.lookback, model.cfg.horizon)
        start = int(ds.windows["test"][0]) if args.window is None else args.window
        paths["latent"] = Path(args.out) / "latent.dskt"
        export_latent(paths["latent"], model, ds, start)
    print(json.dumps({k: str(v) for k, v in paths.items()}))
    return EXIT_OK

# -- parser ----------------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netskel", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-graph", help="write a synthetic graph as an edge list")
    g.add_argument("--kind", choices=("ba", "ws"), required=True, help="Barabási-Albert or Watts-Strogatz")
    g.add_argument("--n", type=int, required=True, help="node count")
    g.add_argument("--m", type=int, default=3, help="edges per new node (ba)")
    g.add_argument("--k", type=int, default=4, help="even ring degree (ws)")
    g.add_argument("--p", type=float, default=0.1, help="rewiring probability (ws)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True, help="edge-list path")
    g.set_defaults(func=cmd_generate_graph)

    s = sub.add_parser("simulate", help="simulate dynamics on a graph and write the observation file")
    s.add_argument("--graph", type=Path, required=True, help="edge-list path")
    s.add_argument("--dynamics", choices=tuple(STATE_DIM), required=True, help="hr, fhn or cr")
    s.add_argument("--seed", type=int, default=0, help="seed for initial states and cr frequencies")
    s.add_argument("--observations", type=int, default=500, help="frames kept after downsampling")
    s.add_argument("--out", type=Path, required=True, help="trajectory path; sidecar gets .json appended")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("train", help="train from a TOML run config")
    t.add_argument("--config", type=Path, required=True, help="TOML file with [graph] [dynamics] [dataset] "
                   "[model] [train] [eval] tables")
    t.add_argument("--out-dir", type=Path, required=True)
    t.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config value (repeatable)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="per-step MAE of a saved model on a trajectory file")
    e.add_argument("--model", type=Path, required=True, help="model directory written by train")
    e.add_argument("--data", type=Path, required=True, help="trajectory file")
    e.add_argument("--split", choices=("train", "val", "test"), default="test")
    e.add_argument("--run-id", default="model", help="run_id column value")
    e.add_argument("--out", type=Path, help="metrics CSV (default: <model>/eval_<split>.csv)")
    e.set_defaults(func=cmd_eval)

    w = sub.add_parser("sweep", help="train/evaluate once per value of gamma or k")
    w.add_argument("--config", type=Path, help="TOML run config (defaults if omitted)")
    w.add_argument("--param", choices=("gamma", "k"), required=True)
    w.add_argument("--values", nargs="+", required=True, help="values to try")
    w.add_argument("--out-dir", type=Path, required=True)
    w.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    w.set_defaults(func=cmd_sweep)

    x = sub.add_parser("export-skeleton", help="write assignment, super-edges, clusters and embedding CSVs")
    x.add_argument("--model", type=Path, required=True)
    x.add_argument("--out", type=Path, required=True, help="output directory")
    x.add_argument("--data", type=Path, help="trajectory file; also exports one latent trajectory")
    x.add_argument("--window", type=int, help="window start for the latent export (default: first test window)")
    x.set_defaults(func=cmd_export_skeleton)
    return ap

def _parse_values(param: str, values: list[str]) -> list:
    cast = float if param == "gamma" else int
    try:
        return [cast(v) for v in values]
    except ValueError:
        raise ConfigError(f"--values for {param} must be {cast.__name__}s") from None

def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "sweep":
            args.values = _parse_values(args.param, args.values)
        return args.func(args)
    except FloatingPointError as exc:  # includes training, solver and simulation failures
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

if __name__ == "__main__":
    sys.exit(main())
