"""Assignment of nodes to super-nodes, auxiliary losses, state aggregation and
the coarse-grained (skeleton) adjacency."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .diffprog import MLP, Adam, Module, Tensor, gcn_forward
from .diffprog import tensor as T
from .hyperbolic import EmbeddingSet, clip_to_disk, log_map_origin, log_map_origin_t


def super_count(n: int, gamma: float) -> int:
    if not 0 < gamma <= 1:
        raise ValueError(f"reduction ratio must lie in (0, 1], got {gamma}")
    s = math.ceil(gamma * n - 1e-9)
    if gamma * n < 1 - 1e-9:
        raise ValueError(f"gamma={gamma} leaves no super-node for {n} nodes")
    return s


@dataclass
class AssignmentMatrix:
    soft: np.ndarray  # S × N, columns sum to 1

    @property
    def hard(self) -> np.ndarray:
        """Super-node index per original node; argmax ties go to the lowest index."""
        return np.argmax(self.soft, axis=0)

    @property
    def n_super(self) -> int:
        return self.soft.shape[0]

    @classmethod
    def from_hard(cls, hard: np.ndarray, n_super: int) -> "AssignmentMatrix":
        return cls(one_hot(hard, n_super))


def one_hot(hard: np.ndarray, n_super: int) -> np.ndarray:
    hard = np.asarray(hard, dtype=np.int64)
    p = np.zeros((n_super, len(hard)))
    p[hard, np.arange(len(hard))] = 1.0
    return p


def chunk_sizes(n: int, gamma: float) -> list[int]:
    """Chunks of round(1/γ) nodes with the last one taking the remainder; when that
    would leave the last chunk empty, sizes are evened out instead."""
    s = super_count(n, gamma)
    size = max(1, int(round(1.0 / gamma)))
    last = n - size * (s - 1)
    if last >= 1:
        return [size] * (s - 1) + [last]
    return [len(c) for c in np.array_split(np.arange(n), s)]


def physics_init(emb: EmbeddingSet, gamma: float) -> tuple[AssignmentMatrix, np.ndarray]:
    """Sort nodes by angle and cut the order into ⌈γN⌉ contiguous groups.

    Each super-node starts at the coordinate mean of its group.
    """
    n = emb.n_nodes
    sizes = chunk_sizes(n, gamma)
    order = np.lexsort((np.arange(n), emb.angle))
    hard = np.empty(n, dtype=np.int64)
    points = np.empty((len(sizes), 2))
    for i, chunk in enumerate(np.split(order, np.cumsum(sizes)[:-1])):
        hard[chunk] = i
        points[i] = emb.node_points[chunk].mean(axis=0)
    return AssignmentMatrix.from_hard(hard, len(sizes)), clip_to_disk(points)


def polar_features(v, eps: float = 1e-12) -> Tensor:
    """Tangent vectors (..., 2) -> (unit direction, norm) (..., 3).

    Near the origin the Cartesian tangent coordinates squeeze the angle into a
    tiny region; splitting direction from norm keeps angular resolution uniform.
    """
    v = T.as_tensor(v)
    n = T.sqrt(T.tsum(v * v, axis=-1, keepdims=True) + eps)
    return T.concat([v / n, n], axis=-1)


class AssignmentModel(Module):
    """P = softmax over super-nodes of MLP_s(log C_s) · MLP(log C)ᵀ."""

    def __init__(self, emb: EmbeddingSet, super_points: np.ndarray, rng: np.random.Generator,
                 hidden: int = 64, emb_dim: int = 16, depth: int = 2):
        self.node_tangent = log_map_origin(emb.node_points)  # frozen
        self.node_features = polar_features(self.node_tangent).data
        self.super_points = Tensor(np.array(super_points, dtype=np.float64), requires_grad=True)
        sizes = [3] + [hidden] * depth + [emb_dim]
        self.node_mlp = MLP(sizes, rng)
        self.super_mlp = MLP(sizes, rng)

    @property
    def n_super(self) -> int:
        return self.super_points.shape[0]

    def mlp_parameters(self) -> list[Tensor]:
        return self.node_mlp.parameters() + self.super_mlp.parameters()

    def logits(self) -> Tensor:
        c_node = self.node_mlp(self.node_features)
        c_super = self.super_mlp(polar_features(log_map_origin_t(self.super_points)))
        return c_super @ c_node.transpose()

    def __call__(self) -> Tensor:
        return compute_assignment(self)


def compute_assignment(model: AssignmentModel) -> Tensor:
    # normalized over super-nodes so each node's column is a distribution
    return T.softmax(model.logits(), axis=0)


def entropy_loss(p) -> Tensor:
    """Mean column entropy (nats)."""
    p = T.as_tensor(p)
    return -T.tsum(T.xlogx(p)) * (1.0 / p.shape[1])


def reconstruction_loss(p, adj) -> Tensor:
    """‖A − PᵀP‖_F."""
    p = T.as_tensor(p)
    a = adj.toarray() if sp.issparse(adj) else np.asarray(adj, dtype=np.float64)
    r = a - p.transpose() @ p
    return T.sqrt(T.tsum(r * r))


def pretrain_loss(p, p0: np.ndarray) -> Tensor:
    """Mean absolute deviation from the physics-informed assignment."""
    p = T.as_tensor(p)
    return T.mean(T.absolute(p - p0))


def aggregate_states(a_hat, x_window, theta1: Tensor, p, activation: str = "tanh") -> Tensor:
    """X_s = P σ(Â X Θ1); `x_window` is (..., N, L·d)."""
    h = gcn_forward(theta1, a_hat, x_window, activation)
    p = T.as_tensor(p)
    if p.shape[-1] != h.shape[-2]:
        raise ValueError(f"assignment has {p.shape[-1]} columns but {h.shape[-2]} nodes")
    return p @ h


def skeleton_adjacency(hard: np.ndarray, adj, n_super: int | None = None) -> np.ndarray:
    """A_s = P A Pᵀ with the 0/1 hard assignment; diagonal counts intra-group edges twice."""
    hard = np.asarray(hard, dtype=np.int64)
    s = int(hard.max()) + 1 if n_super is None else n_super
    p = sp.csr_matrix((np.ones(len(hard)), (hard, np.arange(len(hard)))), shape=(s, len(hard)))
    a = sp.csr_matrix(adj, dtype=np.float64)
    return (p @ a @ p.T).toarray()


def occupancy_ratio(hard: np.ndarray, n_super: int) -> float:
    return len(np.unique(hard)) / n_super


def pretrain_assignment(model: AssignmentModel, p0: np.ndarray, iters: int = 500, lr: float = 1e-3,
                        log: list | None = None) -> list[float]:
    """Fit the assignment MLPs to P_0 by Adam on the mean |P − P_0|; super points stay fixed."""
    opt = Adam(model.mlp_parameters(), lr=lr)
    history = [] if log is None else log
    for _ in range(iters):
        opt.zero_grad()
        loss = pretrain_loss(model(), p0)
        value = float(loss.data)
        if not np.isfinite(value):
            raise FloatingPointError("pretraining loss diverged")
        history.append(value)
        if value == 0.0:
            break
        loss.backward()
        opt.step()
    model.super_points.grad = None
    return history
