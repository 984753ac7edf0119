"""Model assembly, training, evaluation, skeleton baselines and sensitivity sweeps."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diffprog import Adam, Module, NonFiniteError, Tensor, load_params, no_grad, normalized_adjacency, save_params
from .diffprog import tensor as T
from .diffprog.layers import glorot, param
from .dynamics import TrajectoryDataset
from .graph import Graph, betweenness
from .hyperbolic import EmbeddingSet, clip_to_disk, embed_topology, polar_to_disk, riemannian_scale
from .skeleton import (AssignmentModel, aggregate_states, entropy_loss, occupancy_ratio, one_hot,
                       physics_init, pretrain_assignment, reconstruction_loss, skeleton_adjacency,
                       super_count)
from .skeleton_ode import Encoder, OdeFunc, SolverError, integrate, skeleton_operator
from .superres import RefinerBank, cluster_by_degree, expand

log = logging.getLogger(__name__)

FINETUNE_CACHE_BYTES = 1 << 28
ASSIGNMENT_KINDS = ("adaptive", "random", "degree", "betweenness", "static_rg")


class TrainingError(FloatingPointError):
    """Non-finite loss or state during training; carries a diagnostic dict."""

    def __init__(self, msg: str, diagnostics: dict | None = None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


@dataclass
class TrainConfig:
    gamma: float = 0.5
    k: int = 10
    lookback: int = 12
    horizon: int = 120
    batch_size: int = 8
    epochs: int = 50
    lr: float = 1e-3
    alpha_s: float = 1.0
    alpha_e: float = 0.1
    alpha_r: float = 0.1
    seed: int = 0
    solver: str = "rk4"
    ode_dt: float = 1.0
    ode_init_scale: float = 0.1
    latent_dim: int = 16
    hidden: int = 64
    agg_dim: int = 32
    assign_depth: int = 2
    finetune_epochs: int = 10
    pretrain_iters: int = 500
    pretrain_lr: float = 1e-3
    assignment: str = "adaptive"
    physics_init: bool = True
    riemannian_squared_norm: bool = False
    skeleton_norm: str = "row"
    max_train_windows: int = 0  # 0 keeps every training window

    def validate(self) -> "TrainConfig":
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        for name in ("k", "lookback", "horizon", "batch_size", "latent_dim", "hidden", "agg_dim",
                     "assign_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("epochs", "finetune_epochs", "pretrain_iters", "max_train_windows"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.lr <= 0 or self.pretrain_lr <= 0 or self.ode_dt <= 0 or self.ode_init_scale < 0:
            raise ValueError("learning rates and ode_dt must be positive, ode_init_scale non-negative")
        if min(self.alpha_s, self.alpha_e, self.alpha_r) < 0:
            raise ValueError("loss weights must be non-negative")
        if self.solver not in ("euler", "rk4"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.assignment not in ASSIGNMENT_KINDS:
            raise ValueError(f"unknown assignment {self.assignment!r}; expected one of {ASSIGNMENT_KINDS}")
        if self.skeleton_norm not in ("row", "sym", "raw"):
            raise ValueError(f"unknown skeleton_norm {self.skeleton_norm!r}")
        return self

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class EvalReport:
    mae_per_step: np.ndarray
    occupancy: float = float("nan")
    seconds_per_iter: float = float("nan")
    n_windows: int = 0

    @property
    def mean_mae(self) -> float:
        return float(np.mean(self.mae_per_step))

    def summary(self) -> dict:
        return {"mean_mae": self.mean_mae, "occupancy": self.occupancy,
                "seconds_per_iter": self.seconds_per_iter, "n_windows": self.n_windows}


# -- baselines -------------------------------------------------------------------
def baseline_assignment(kind: str, graph: Graph, gamma: float, seed: int = 0,
                        emb: EmbeddingSet | None = None) -> np.ndarray:
    """Fixed hard assignment (super index per node) for the skeleton baselines."""
    n = graph.node_count
    s = super_count(n, gamma)
    if s == n:
        return np.arange(n)
    rng = np.random.default_rng([seed, 5])
    if kind == "random":
        return rng.integers(s, size=n)
    if kind in ("degree", "betweenness"):
        score = graph.degrees.astype(float) if kind == "degree" else betweenness(graph)
        ranked = np.lexsort((np.arange(n), -score))
        hard = np.empty(n, dtype=np.int64)
        hard[ranked[:s]] = np.arange(s)
        hard[ranked[s:]] = rng.integers(s, size=n - s)
        return hard
    if kind == "static_rg":
        p0, _ = physics_init(emb if emb is not None else embed_topology(graph), gamma)
        return p0.hard
    raise ValueError(f"unknown baseline assignment {kind!r}")


# -- model -------------------------------------------------------------------------
class SkeletonForecaster(Module):
    """Aggregation -> latent skeleton ODE -> degree-clustered lifting."""

    def __init__(self, graph: Graph, cfg: TrainConfig, state_dim: int,
                 emb: EmbeddingSet | None = None, super_points: np.ndarray | None = None,
                 fixed_hard: np.ndarray | None = None):
        cfg.validate()
        self.cfg = cfg
        self.graph = graph
        self.state_dim = state_dim
        rng = np.random.default_rng([cfg.seed, 7])
        n, L, H, d = graph.node_count, cfg.lookback, cfg.horizon, state_dim
        self.n_super = super_count(n, cfg.gamma)
        self.embedding = emb if emb is not None else embed_topology(graph)
        self.fixed_hard = None if fixed_hard is None else np.asarray(fixed_hard, dtype=np.int64)
        self.assign = None
        if self.fixed_hard is None:
            if super_points is None:
                _, super_points = physics_init(self.embedding, cfg.gamma)
            self.assign = AssignmentModel(self.embedding, super_points, rng, hidden=cfg.hidden,
                                          depth=cfg.assign_depth)
        self.theta1 = param(glorot(rng, L * d, cfg.agg_dim))
        self.encoder = Encoder(cfg.agg_dim, cfg.hidden, cfg.latent_dim, rng)
        self.ode = OdeFunc(cfg.latent_dim, cfg.hidden, rng, out_scale=cfg.ode_init_scale)
        with _quiet_warnings():
            self.clustering = cluster_by_degree(graph, cfg.k, cfg.seed)
        self.refiners = RefinerBank(self.clustering, L * d, H * cfg.latent_dim, H * d, cfg.hidden, rng)
        self.a_hat = normalized_adjacency(graph.adjacency())
        self.adj_dense = graph.dense()

    # assignment ----------------------------------------------------------------
    def assignment(self) -> Tensor:
        if self.fixed_hard is not None:
            return Tensor(one_hot(self.fixed_hard, self.n_super))
        return self.assign()

    def hard_assignment(self) -> np.ndarray:
        if self.fixed_hard is not None:
            return self.fixed_hard
        with no_grad():
            return np.argmax(self.assign().data, axis=0)

    def skeleton(self, hard: np.ndarray | None = None) -> np.ndarray:
        hard = self.hard_assignment() if hard is None else hard
        return skeleton_adjacency(hard, self.graph.adjacency(), self.n_super)

    # forward -----------------------------------------------------------------
    def encode(self, hist: np.ndarray, p: Tensor) -> Tensor:
        b, n, L, d = hist.shape
        x = hist.reshape(b, n, L * d)
        return self.encoder(aggregate_states(self.a_hat, x, self.theta1, p))

    def latent_trajectory(self, hist: np.ndarray, p: Tensor | None = None,
                          hard: np.ndarray | None = None) -> tuple[Tensor, Tensor, np.ndarray]:
        """(Z over the horizon (B,S,H,h), P, hard assignment)."""
        p = self.assignment() if p is None else p
        hard = np.argmax(p.data, axis=0) if hard is None else hard
        self.ode.a_hat = skeleton_operator(self.skeleton(hard), self.cfg.skeleton_norm)
        z0 = self.encode(hist, p)
        z = integrate(z0, self.ode, self.cfg.horizon, self.cfg.ode_dt, self.cfg.solver)
        return z, p, hard

    def lift(self, hist: np.ndarray, z: Tensor, hard: np.ndarray) -> Tensor:
        b, n, L, d = hist.shape
        node_lat = expand(z, hard)  # B,N,H,h
        node_lat = node_lat.reshape(b, n, self.cfg.horizon * self.cfg.latent_dim)
        out = self.refiners(hist.reshape(b, n, L * d), node_lat)
        return out.reshape(b, n, self.cfg.horizon, d)

    def forward(self, hist: np.ndarray):
        z, p, hard = self.latent_trajectory(hist)
        return self.lift(hist, z, hard), z, p, hard

    def predict(self, hist: np.ndarray) -> np.ndarray:
        """Normalized predictions (B,N,H,d) for normalized histories (B,N,L,d)."""
        with no_grad():
            return self.forward(hist)[0].data

    def skeleton_targets(self, windows: np.ndarray, p: np.ndarray) -> np.ndarray:
        """Encoder image of the observed lookback window ending at each horizon step,
        as constants (B,S,H,h). `windows` holds the full B×N×(L+H)×d frames."""
        L, H = self.cfg.lookback, self.cfg.horizon
        idx = np.arange(1, H + 1)[:, None] + np.arange(L)[None, :]
        w = windows[:, :, idx]  # B,N,H,L,d
        b, n, _, _, d = w.shape
        w = w.transpose(0, 2, 1, 3, 4).reshape(b, H, n, L * d)
        with no_grad():
            xs = aggregate_states(self.a_hat, w, self.theta1, Tensor(p))
            zt = self.encoder(xs).data  # B,H,S,h
        return zt.transpose(0, 2, 1, 3)

    # persistence -------------------------------------------------------------------
    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = set(own) - set(arrays)
        if missing:
            raise ValueError(f"checkpoint lacks parameters: {sorted(missing)[:5]}")
        for name, p in own.items():
            if arrays[name].shape != p.shape:
                raise ValueError(f"shape mismatch for {name}: {arrays[name].shape} vs {p.shape}")
            p.data = np.array(arrays[name], dtype=np.float64)


class _quiet_warnings:
    def __enter__(self):
        import warnings
        self._ctx = warnings.catch_warnings()
        self._ctx.__enter__()
        warnings.simplefilter("ignore")

    def __exit__(self, *exc):
        return self._ctx.__exit__(*exc)


def mse(a, b) -> Tensor:
    diff = T.as_tensor(a) - b
    return T.mean(diff * diff)


# -- training ------------------------------------------------------------------------
@dataclass
class TrainResult:
    model: SkeletonForecaster
    log: dict = field(default_factory=dict)


def _random_disk_points(rng: np.random.Generator, count: int, r_max: float = 0.9) -> np.ndarray:
    r = r_max * np.sqrt(rng.uniform(size=count))
    return polar_to_disk(r, rng.uniform(0, 2 * np.pi, size=count))


def build_model(cfg: TrainConfig, graph: Graph, state_dim: int, train_log: dict | None = None
                ) -> SkeletonForecaster:
    """Embedding, initialization of the assignment and (optionally) pretraining."""
    cfg.validate()
    train_log = {} if train_log is None else train_log
    emb = embed_topology(graph)
    n_super = super_count(graph.node_count, cfg.gamma)
    if cfg.assignment != "adaptive":
        hard = baseline_assignment(cfg.assignment, graph, cfg.gamma, cfg.seed, emb)
        return SkeletonForecaster(graph, cfg, state_dim, emb, fixed_hard=hard)
    if cfg.physics_init:
        p0, points = physics_init(emb, cfg.gamma)
    else:
        p0, points = None, _random_disk_points(np.random.default_rng([cfg.seed, 9]), n_super)
    model = SkeletonForecaster(graph, cfg, state_dim, emb, super_points=points)
    if p0 is not None and cfg.pretrain_iters:
        hist = pretrain_assignment(model.assign, p0.soft, cfg.pretrain_iters, cfg.pretrain_lr)
        train_log["pretrain_loss"] = hist
        train_log["pretrain_agreement"] = float(np.mean(model.hard_assignment() == p0.hard))
    return model


def _train_windows(cfg: TrainConfig, ds: TrajectoryDataset) -> np.ndarray:
    w = ds.windows["train"]
    if cfg.max_train_windows and len(w) > cfg.max_train_windows:
        keep = np.linspace(0, len(w) - 1, cfg.max_train_windows).round().astype(int)
        w = w[keep]
    return w


def _check_compat(cfg: TrainConfig, graph: Graph, ds: TrajectoryDataset) -> None:
    if ds.n_nodes != graph.node_count:
        raise ValueError(f"dataset has {ds.n_nodes} nodes, graph has {graph.node_count}")
    if (ds.lookback, ds.horizon) != (cfg.lookback, cfg.horizon):
        raise ValueError("dataset windows do not match config lookback/horizon")


def train(cfg: TrainConfig, graph: Graph, ds: TrajectoryDataset, model: SkeletonForecaster | None = None
          ) -> TrainResult:
    """Embed, initialize, pretrain, train end to end, then fine-tune the refiners."""
    cfg.validate()
    _check_compat(cfg, graph, ds)
    info: dict = {"epochs": [], "finetune": []}
    if model is None:
        model = build_model(cfg, graph, ds.state_dim, info)
    rng = np.random.default_rng([cfg.seed, 11])
    windows = _train_windows(cfg, ds)

    opt = Adam(model.parameters(), lr=cfg.lr)
    adaptive = model.assign is not None
    if adaptive:
        sp_ = model.assign.super_points
        opt.grad_transforms[id(sp_)] = lambda th, g: riemannian_scale(th, g, cfg.riemannian_squared_norm)
        opt.post_update[id(sp_)] = clip_to_disk

    for epoch in range(cfg.epochs):
        sums = {"loss": 0.0, "pred": 0.0, "skel": 0.0, "entropy": 0.0, "recon": 0.0}
        t0, n_batches = time.perf_counter(), 0
        for batch in _batches(rng.permutation(windows), cfg.batch_size):
            full = ds.full_windows(batch)
            hist, fut = full[:, :, :cfg.lookback], full[:, :, cfg.lookback:]
            opt.zero_grad()
            try:
                pred, z, p, hard = model.forward(hist)
                terms = {"pred": mse(pred, fut)}
                if cfg.alpha_s:
                    terms["skel"] = mse(z, model.skeleton_targets(full, p.data))
                if adaptive and cfg.alpha_e:
                    terms["entropy"] = entropy_loss(p)
                if adaptive and cfg.alpha_r:
                    terms["recon"] = reconstruction_loss(p, model.adj_dense)
                weights = {"pred": 1.0, "skel": cfg.alpha_s, "entropy": cfg.alpha_e, "recon": cfg.alpha_r}
                loss = sum(weights[k] * v for k, v in terms.items())
                loss.backward()
            except (NonFiniteError, SolverError) as exc:
                raise TrainingError(f"non-finite value in epoch {epoch} batch {n_batches}: {exc}",
                                    {"epoch": epoch, "batch": n_batches, "history": info["epochs"]}) from exc
            opt.step()
            sums["loss"] += float(loss.data)
            for k_, v in terms.items():
                sums[k_] += float(v.data)
            n_batches += 1
        rec = {k_: v / max(n_batches, 1) for k_, v in sums.items()}
        rec["epoch"] = epoch
        rec["seconds_per_iter"] = (time.perf_counter() - t0) / max(n_batches, 1)
        rec["occupancy"] = occupancy_ratio(model.hard_assignment(), model.n_super)
        info["epochs"].append(rec)
        log.info("epoch %d loss %.5f pred %.5f occ %.3f", epoch, rec["loss"], rec["pred"], rec["occupancy"])

    finetune_refiners(model, ds, windows, cfg, rng, info)
    return TrainResult(model, info)


def finetune_refiners(model: SkeletonForecaster, ds: TrajectoryDataset, windows: np.ndarray,
                      cfg: TrainConfig, rng: np.random.Generator, info: dict) -> None:
    """Refiner-only epochs with a fresh optimizer; upstream modules are frozen."""
    if not cfg.finetune_epochs:
        return
    opt = Adam(model.refiners.parameters(), lr=cfg.lr)
    with no_grad():
        p = model.assignment()
        hard = np.argmax(p.data, axis=0)
    # upstream is frozen, so latent trajectories are reused across epochs when they fit in memory
    per_window = model.n_super * cfg.horizon * cfg.latent_dim * 8
    cache: dict[int, np.ndarray] | None = {} if per_window * len(windows) <= FINETUNE_CACHE_BYTES else None

    def latent(batch):
        key = int(batch[0]) if cache is not None else None
        if cache is not None and key in cache and len(cache[key]) == len(batch):
            return cache[key]
        with no_grad():
            z = model.latent_trajectory(ds.batch(batch)[0], p, hard)[0].data
        if cache is not None:
            cache[key] = z
        return z

    for epoch in range(cfg.finetune_epochs):
        total, n_batches, t0 = 0.0, 0, time.perf_counter()
        order = windows if cache is not None else rng.permutation(windows)
        for batch in _batches(order, cfg.batch_size):
            hist, fut = ds.batch(batch)
            z = latent(batch)
            opt.zero_grad()
            loss = mse(model.lift(hist, Tensor(z), hard), fut)
            if not np.isfinite(loss.data):
                raise TrainingError(f"non-finite fine-tune loss in epoch {epoch}")
            loss.backward()
            opt.step()
            total += float(loss.data)
            n_batches += 1
        info["finetune"].append({"epoch": epoch, "pred": total / max(n_batches, 1),
                                 "seconds_per_iter": (time.perf_counter() - t0) / max(n_batches, 1)})


def _batches(items: np.ndarray, size: int):
    for i in range(0, len(items), size):
        yield items[i:i + size]


# -- evaluation ----------------------------------------------------------------------
def mae_per_step(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Mean absolute error per horizon step; arrays are (B, N, H, d)."""
    return np.abs(pred - truth).mean(axis=(0, 1, 3))


def evaluate(model: SkeletonForecaster, ds: TrajectoryDataset, split: str = "test",
             batch_size: int = 16) -> EvalReport:
    windows = ds.windows[split]
    if len(windows) == 0:
        raise ValueError(f"split {split!r} has no windows")
    total = np.zeros(ds.horizon)
    t0 = time.perf_counter()
    n_batches = 0
    for batch in _batches(windows, batch_size):
        hist, _ = ds.batch(batch)
        _, fut = ds.batch(batch, normalized=False)
        pred = ds.denormalize(model.predict(hist))
        total += mae_per_step(pred, fut) * len(batch)
        n_batches += 1
    elapsed = (time.perf_counter() - t0) / n_batches
    occ = occupancy_ratio(model.hard_assignment(), model.n_super)
    return EvalReport(total / len(windows), occ, elapsed, len(windows))


def persistence_baseline(ds: TrajectoryDataset, split: str = "test") -> EvalReport:
    """Hold the last observed frame constant over the horizon."""
    windows = ds.windows[split]
    hist, fut = ds.batch(windows, normalized=False)
    pred = np.repeat(hist[:, :, -1:], ds.horizon, axis=2)
    return EvalReport(mae_per_step(pred, fut), n_windows=len(windows))


# -- sweeps ------------------------------------------------------------------------------
SWEEP_PARAMS = {"gamma": float, "k": int}


def sweep(base: TrainConfig, param_name: str, values, graph: Graph, ds: TrajectoryDataset,
          split: str = "test") -> list[dict]:
    """Independent train/evaluate runs per value; failures are recorded, not raised."""
    if param_name not in SWEEP_PARAMS:
        raise ValueError(f"sweepable parameters: {sorted(SWEEP_PARAMS)}")
    rows = []
    for v in values:
        cfg = base.replace(**{param_name: SWEEP_PARAMS[param_name](v)})
        row = {"param": param_name, "value": v, "config": cfg.to_dict()}
        try:
            res = train(cfg, graph, ds)
            rep = evaluate(res.model, ds, split)
            row.update(report=rep, error=None, model=res.model)
        except Exception as exc:  # one failing run must not sink the sweep
            log.warning("sweep %s=%s failed: %s", param_name, v, exc)
            row.update(report=None, error=f"{type(exc).__name__}: {exc}", model=None)
        rows.append(row)
    return rows


# -- artifacts ---------------------------------------------------------------------------
def content_hash(graph: Graph, ds: TrajectoryDataset | None = None, extra: dict | None = None) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(graph.edges(), dtype="<i8").tobytes())
    if ds is not None:
        h.update(np.ascontiguousarray(ds.states, dtype="<f8").tobytes())
    if extra is not None:
        h.update(json.dumps(extra, sort_keys=True, default=str).encode())
    return h.hexdigest()


def write_metrics_csv(path, rows: list[tuple[str, EvalReport]]) -> None:
    lines = ["run_id,horizon_step,mae"]
    for run_id, rep in rows:
        lines += [f"{run_id},{t + 1},{m:.10g}" for t, m in enumerate(rep.mae_per_step)]
    Path(path).write_text("\n".join(lines) + "\n")


def save_model(out_dir, model: SkeletonForecaster, ds: TrajectoryDataset | None = None,
               extra: dict | None = None) -> None:
    from .graph import save_edge_list

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_params(out / "params.bin", model.state_arrays())
    save_edge_list(model.graph, out / "graph.edges")
    manifest = {
        "format": "netskel-model",
        "version": 1,
        "config": model.cfg.to_dict(),
        "state_dim": model.state_dim,
        "n_nodes": model.graph.node_count,
        "node_ids": model.graph.node_ids().tolist(),
        "fixed_hard": None if model.fixed_hard is None else model.fixed_hard.tolist(),
        "cluster_labels": model.clustering.labels.tolist(),
        "hard_assignment": model.hard_assignment().tolist(),
    }
    if ds is not None:
        manifest["normalization"] = {"mean": ds.mean.tolist(), "std": ds.std.tolist()}
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_json_default))


def load_model(model_dir) -> SkeletonForecaster:
    from .graph import load_edge_list

    d = Path(model_dir)
    manifest = json.loads((d / "manifest.json").read_text())
    if manifest.get("format") != "netskel-model":
        raise ValueError(f"{d}: not a saved model")
    cfg = TrainConfig(**manifest["config"])
    stored = load_edge_list(d / "graph.edges")  # internal indices; isolated nodes are absent
    n = manifest["n_nodes"]
    if stored.node_count > n or stored.labels.max() >= n:
        raise ValueError(f"{d}: graph file does not fit the manifest's {n} nodes")
    graph = Graph.from_edges(n, stored.labels[stored.edges()], labels=manifest.get("node_ids"))
    fixed = manifest.get("fixed_hard")
    model = SkeletonForecaster(graph, cfg, manifest["state_dim"],
                               fixed_hard=None if fixed is None else np.asarray(fixed))
    model.load_arrays(load_params(d / "params.bin"))
    return model


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o)}")


# -- exports -------------------------------------------------------------------------------
def export_embedding(path, model: SkeletonForecaster) -> None:
    """node_id, r, theta, x, y, assigned_super_node."""
    emb, hard = model.embedding, model.hard_assignment()
    labels = model.graph.node_ids()
    lines = ["node_id,r,theta,x,y,assigned_super_node"]
    for i in range(model.graph.node_count):
        x, y = emb.node_points[i]
        lines.append(f"{labels[i]},{emb.radius[i]:.12g},{emb.angle[i]:.12g},{x:.12g},{y:.12g},{hard[i]}")
    Path(path).write_text("\n".join(lines) + "\n")


def export_skeleton(out_dir, model: SkeletonForecaster) -> dict[str, Path]:
    """Node-to-super-node map plus the weighted super-edge list (upper triangle, self-loops kept)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    hard = model.hard_assignment()
    a_s = model.skeleton(hard)
    labels = model.graph.node_ids()
    assign = out / "skeleton_nodes.csv"
    assign.write_text("node_id,super_node_id\n" + "".join(f"{labels[i]},{s}\n" for i, s in enumerate(hard)))
    edges = out / "skeleton_edges.csv"
    rows, cols = np.nonzero(np.triu(a_s))
    edges.write_text("source,target,weight\n" + "".join(
        f"{r},{c},{a_s[r, c]:.12g}\n" for r, c in zip(rows, cols)))
    clusters = out / "clusters.csv"
    deg = model.graph.degrees
    clusters.write_text("node_id,degree,cluster_id\n" + "".join(
        f"{labels[i]},{deg[i]},{model.clustering.labels[i]}\n" for i in range(len(deg))))
    emb = out / "embedding.csv"
    export_embedding(emb, model)
    return {"nodes": assign, "edges": edges, "clusters": clusters, "embedding": emb}


def export_latent(path, model: SkeletonForecaster, ds: TrajectoryDataset, start: int) -> None:
    """Latent super-node trajectory (S × H × h) for one window, in the trajectory container."""
    from .dynamics import write_trajectory

    hist, _ = ds.batch([start])
    with no_grad():
        z = model.latent_trajectory(hist)[0].data[0]
    write_trajectory(path, z, model.cfg.ode_dt)
