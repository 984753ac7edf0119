"""Ground-truth network dynamics (Hindmarsh-Rose, FitzHugh-Nagumo, coupled Rössler),
explicit-Euler simulation and windowed trajectory datasets."""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .graph import Graph

KINDS = ("hr", "fhn", "cr")
STATE_DIM = {"hr": 3, "fhn": 2, "cr": 3}
DURATION = {"hr": 20.0, "fhn": 50.0, "cr": 50.0}
SIM_DT = 0.01
STD_FLOOR = 1e-8

HR_PARAMS = dict(a=1.0, b=3.0, c=1.0, u=5.0, s=4.0, r=0.005, x0=-1.6, eps=0.15,
                 v_syn=2.0, lam=10.0, omega_syn=1.0, i_ext=3.24)
FHN_PARAMS = dict(eps=1.0, a=0.28, b=0.5, c=-0.04)
CR_PARAMS = dict(eps=0.15, a=0.2, b=0.2, c=-6.0, w_mean=1.0, w_std=0.1)

# uniform initial-condition boxes, one (low, high) per state dimension
INIT_BOX = {
    "hr": [(-1.5, 1.5), (-10.0, 0.0), (2.0, 4.0)],
    "fhn": [(-1.0, 1.0), (-1.0, 1.0)],
    "cr": [(-1.0, 1.0)] * 3,
}

_ALIASES = {"hindmarshrose": "hr", "hindmarsh-rose": "hr", "fitzhughnagumo": "fhn",
            "fitzhugh-nagumo": "fhn", "coupledrossler": "cr", "coupled-rossler": "cr"}


class SimulationError(FloatingPointError):
    def __init__(self, msg: str, step: int | None = None):
        super().__init__(msg)
        self.step = step


@dataclass
class DynamicsSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    frequencies: np.ndarray | None = None

    @property
    def state_dim(self) -> int:
        return STATE_DIM[self.kind]

    def to_json(self) -> dict:
        out = {"kind": self.kind, "params": self.params, "seed": self.seed}
        if self.frequencies is not None:
            out["frequencies"] = self.frequencies.tolist()
        return out

    @classmethod
    def from_json(cls, d: dict) -> "DynamicsSpec":
        w = d.get("frequencies")
        return cls(d["kind"], dict(d["params"]), int(d["seed"]),
                   None if w is None else np.asarray(w, dtype=np.float64))


def make_spec(kind: str, n_nodes: int, seed: int = 0, **overrides) -> DynamicsSpec:
    """Default parameter record for `kind`; Rössler frequencies drawn from N(1, 0.1)."""
    kind = _ALIASES.get(kind.lower(), kind.lower())
    if kind not in KINDS:
        raise ValueError(f"unknown dynamics {kind!r}; expected one of {KINDS}")
    base = {"hr": HR_PARAMS, "fhn": FHN_PARAMS, "cr": CR_PARAMS}[kind]
    unknown = set(overrides) - set(base)
    if unknown:
        raise ValueError(f"unknown {kind} parameters: {sorted(unknown)}")
    params = {**base, **overrides}
    w = None
    if kind == "cr":
        rng = np.random.default_rng([seed, 1])
        w = rng.normal(params["w_mean"], params["w_std"], size=n_nodes)
    return DynamicsSpec(kind, params, seed, w)


def hr_mu(x, lam: float = HR_PARAMS["lam"], omega: float = HR_PARAMS["omega_syn"]):
    """Sigmoidal synaptic activation of the HR coupling."""
    return 1.0 / (1.0 + np.exp(-lam * (np.asarray(x, dtype=np.float64) - omega)))


def derivative(spec: DynamicsSpec, graph: Graph, state: np.ndarray, adj=None) -> np.ndarray:
    """Right-hand side of the governing equations for all nodes (N×d)."""
    state = np.asarray(state, dtype=np.float64)
    if state.shape != (graph.node_count, spec.state_dim):
        raise ValueError(f"state shape {state.shape} != ({graph.node_count}, {spec.state_dim})")
    if not np.all(np.isfinite(state)):
        raise SimulationError("non-finite state")
    a = graph.adjacency() if adj is None else adj
    p = spec.params
    out = np.empty_like(state)
    if spec.kind == "hr":
        x1, x2, x3 = state.T
        coupling = p["eps"] * (p["v_syn"] - x1) * (a @ hr_mu(x1, p["lam"], p["omega_syn"]))
        out[:, 0] = x2 - p["a"] * x1 ** 3 + p["b"] * x1 ** 2 - x3 + p["i_ext"] + coupling
        out[:, 1] = p["c"] - p["u"] * x1 ** 2 - x2
        out[:, 2] = p["r"] * (p["s"] * (x1 - p["x0"]) - x3)
    elif spec.kind == "fhn":
        x1, x2 = state.T
        k = graph.degrees.astype(np.float64)
        diff = np.where(k > 0, ((a @ x1) - k * x1) / np.where(k > 0, k, 1.0), 0.0)
        out[:, 0] = x1 - x1 ** 3 - x2 - p["eps"] * diff
        out[:, 1] = p["a"] + p["b"] * x1 + p["c"] * x2
    else:
        x1, x2, x3 = state.T
        w = spec.frequencies
        k = graph.degrees.astype(np.float64)
        out[:, 0] = -w * x2 - x3 + p["eps"] * ((a @ x1) - k * x1)
        out[:, 1] = w * x1 + p["a"] * x2
        out[:, 2] = p["b"] + x3 * (x1 + p["c"])
    return out


def euler(rhs: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, dt: float, steps: int) -> np.ndarray:
    """Explicit Euler; returns the (steps+1, *x0.shape) trajectory including x0."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = np.array(x0, dtype=np.float64)
    traj = np.empty((steps + 1,) + x.shape)
    traj[0] = x
    for t in range(steps):
        try:
            dx = rhs(x)
        except SimulationError as exc:
            raise SimulationError(f"simulation blew up at step {t}: {exc}", step=t) from None
        x = x + dt * dx
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"non-finite state after step {t + 1}", step=t + 1)
        traj[t + 1] = x
    return traj


def initial_state(spec: DynamicsSpec, n_nodes: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 2])
    box = np.asarray(INIT_BOX[spec.kind])
    return rng.uniform(box[:, 0], box[:, 1], size=(n_nodes, len(box)))


def simulate(spec: DynamicsSpec, graph: Graph, x0: np.ndarray, dt: float = SIM_DT,
             steps: int | None = None) -> np.ndarray:
    """Euler-integrate the network; returns the raw N×(steps+1)×d trajectory."""
    if steps is None:
        steps = int(round(DURATION[spec.kind] / dt))
    adj = graph.adjacency()
    traj = euler(lambda x: derivative(spec, graph, x, adj), x0, dt, steps)
    return np.ascontiguousarray(traj.transpose(1, 0, 2))


# -- datasets ---------------------------------------------------------------
@dataclass
class TrajectoryDataset:
    """Downsampled observations with time splits, train-split normalization and windows.

    `windows[split]` holds the start frame of every (lookback + horizon) window.
    Training windows lie entirely inside the train frames. The val/test splits
    are shorter than one window at the default sizes, so a val/test window is
    any window whose final frame falls in that split; test windows additionally
    never touch train frames.
    """

    states: np.ndarray  # N × T × d, physical units
    dt_obs: float
    bounds: dict  # split -> (start, stop) frame range
    mean: np.ndarray
    std: np.ndarray
    lookback: int = 12
    horizon: int = 120
    windows: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return self.states.shape[0]

    @property
    def n_obs(self) -> int:
        return self.states.shape[1]

    @property
    def state_dim(self) -> int:
        return self.states.shape[2]

    @property
    def window_len(self) -> int:
        return self.lookback + self.horizon

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def denormalize(self, x: np.ndarray) -> np.ndarray:
        return x * self.std + self.mean

    @property
    def normalized(self) -> np.ndarray:
        if "_norm" not in self.meta:
            self.meta["_norm"] = self.normalize(self.states)
        return self.meta["_norm"]

    def batch(self, starts, normalized: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """(history B×N×L×d, future B×N×H×d) for the given window starts."""
        src = self.normalized if normalized else self.states
        idx = np.asarray(starts)[:, None] + np.arange(self.window_len)[None, :]
        w = src[:, idx].transpose(1, 0, 2, 3)
        return w[:, :, :self.lookback], w[:, :, self.lookback:]

    def full_windows(self, starts, normalized: bool = True) -> np.ndarray:
        src = self.normalized if normalized else self.states
        idx = np.asarray(starts)[:, None] + np.arange(self.window_len)[None, :]
        return src[:, idx].transpose(1, 0, 2, 3)

    def sidecar(self) -> dict:
        return {
            "dt_obs": self.dt_obs,
            "bounds": {k: list(v) for k, v in self.bounds.items()},
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "lookback": self.lookback,
            "horizon": self.horizon,
            "windows": {k: [int(v[0]), int(v[-1]), len(v)] if len(v) else [0, -1, 0]
                        for k, v in self.windows.items()},
            **{k: v for k, v in self.meta.items() if not k.startswith("_")},
        }


def downsample(raw: np.ndarray, target_obs: int = 500) -> tuple[np.ndarray, int]:
    """Equal-stride subsample of axis 1 to exactly `target_obs` frames; returns (frames, stride)."""
    t_raw = raw.shape[1]
    if t_raw < target_obs:
        raise ValueError(f"raw trajectory has {t_raw} frames, need >= {target_obs}")
    stride = max(1, (t_raw - 1) // (target_obs - 1)) if target_obs > 1 else 1
    return raw[:, :stride * (target_obs - 1) + 1:stride], stride


def split_bounds(n_obs: int, ratios=(6, 2, 2)) -> dict:
    total = sum(ratios)
    n_train = n_obs * ratios[0] // total
    n_val = n_obs * ratios[1] // total
    return {"train": (0, n_train), "val": (n_train, n_train + n_val), "test": (n_train + n_val, n_obs)}


def window_starts(bounds: dict, window_len: int) -> dict:
    (tr0, tr1), (va0, va1), (te0, te1) = bounds["train"], bounds["val"], bounds["test"]
    if tr1 - tr0 < window_len:
        raise ValueError(f"train split has {tr1 - tr0} frames, shorter than window {window_len}")
    train = np.arange(tr0, tr1 - window_len + 1)
    # final frame s + window_len - 1 must fall in the split
    val = np.arange(max(0, va0 - window_len + 1), va1 - window_len + 1)
    test = np.arange(max(va0, te0 - window_len + 1), te1 - window_len + 1)
    if len(test) == 0:
        raise ValueError(f"held-out frames ({te1 - va0}) shorter than window {window_len}")
    return {"train": train, "val": val, "test": test}


def build_dataset(raw: np.ndarray, dt: float = SIM_DT, target_obs: int = 500, lookback: int = 12,
                  horizon: int = 120, ratios=(6, 2, 2), meta: dict | None = None) -> TrajectoryDataset:
    """Downsample, split 6:2:2 in time, z-normalize with train stats and enumerate windows."""
    frames, stride = downsample(np.asarray(raw, dtype=np.float64), target_obs)
    return dataset_from_frames(frames, dt * stride, lookback, horizon, ratios, meta)


def dataset_from_frames(frames: np.ndarray, dt_obs: float, lookback: int = 12, horizon: int = 120,
                        ratios=(6, 2, 2), meta: dict | None = None) -> TrajectoryDataset:
    bounds = split_bounds(frames.shape[1], ratios)
    windows = window_starts(bounds, lookback + horizon)
    tr = frames[:, bounds["train"][0]:bounds["train"][1]]
    mean = tr.mean(axis=(0, 1))
    std = np.maximum(tr.std(axis=(0, 1)), STD_FLOOR)
    return TrajectoryDataset(frames, dt_obs, bounds, mean, std, lookback, horizon, windows,
                             dict(meta or {}))


# -- trajectory container -------------------------------------------------------
TRAJ_MAGIC = b"DSKT"
TRAJ_VERSION = 1
_HEADER = struct.Struct("<4sIQQId")


def write_trajectory(path, states: np.ndarray, dt_obs: float) -> None:
    """Binary container: magic, u32 version, u64 N, u64 T, u32 d, f64 dt_obs, f64 LE data."""
    states = np.ascontiguousarray(states, dtype="<f8")
    n, t, d = states.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(TRAJ_MAGIC, TRAJ_VERSION, n, t, d, float(dt_obs)))
        fh.write(states.tobytes())


def read_trajectory(path) -> tuple[np.ndarray, float]:
    buf = Path(path).read_bytes()
    if len(buf) < _HEADER.size:
        raise ValueError(f"{path}: truncated trajectory file")
    magic, version, n, t, d, dt_obs = _HEADER.unpack_from(buf, 0)
    if magic != TRAJ_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != TRAJ_VERSION:
        raise ValueError(f"{path}: unsupported trajectory version {version}")
    count = n * t * d
    if len(buf) != _HEADER.size + 8 * count:
        raise ValueError(f"{path}: payload size does not match header")
    data = np.frombuffer(buf, dtype="<f8", count=count, offset=_HEADER.size)
    return data.reshape(n, t, d).astype(np.float64), dt_obs


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def save_dataset(path, ds: TrajectoryDataset) -> None:
    write_trajectory(path, ds.states, ds.dt_obs)
    sidecar_path(path).write_text(json.dumps(ds.sidecar(), indent=2))


def load_dataset(path, lookback: int | None = None, horizon: int | None = None) -> TrajectoryDataset:
    """Read a trajectory file; splits/normalization are recomputed and checked against the sidecar."""
    states, dt_obs = read_trajectory(path)
    side = {}
    sp_ = sidecar_path(path)
    if sp_.exists():
        side = json.loads(sp_.read_text())
    lb = lookback or side.get("lookback", 12)
    hz = horizon or side.get("horizon", 120)
    meta = {k: v for k, v in side.items()
            if k not in ("dt_obs", "bounds", "mean", "std", "lookback", "horizon", "windows")}
    ds = dataset_from_frames(states, dt_obs, lb, hz, meta=meta)
    if "mean" in side and not np.allclose(side["mean"], ds.mean, rtol=1e-12, atol=1e-12):
        raise ValueError(f"{path}: sidecar normalization stats disagree with the data")
    return ds


def spec_summary(spec: DynamicsSpec) -> dict:
    return {"kind": spec.kind, "params": dict(spec.params), "seed": spec.seed}


__all__ = [
    "DynamicsSpec", "SimulationError", "TrajectoryDataset", "build_dataset", "dataset_from_frames",
    "derivative", "downsample", "euler", "hr_mu", "initial_state", "load_dataset", "make_spec",
    "read_trajectory", "save_dataset", "simulate", "split_bounds", "window_starts",
    "write_trajectory",
]
