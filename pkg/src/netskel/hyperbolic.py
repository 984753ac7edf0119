"""Poincaré-disk geometry (curvature -1), topology embedding and gradient rescaling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .diffprog import tensor as T
from .diffprog.tensor import Tensor
from .graph import Graph

CLIP_RADIUS = 1.0 - 1e-7
R_MAX = 0.9
_EPS = 1e-15


def clip_to_disk(x: np.ndarray, radius: float = CLIP_RADIUS) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    scale = np.where(norm > radius, radius / np.maximum(norm, _EPS), 1.0)
    return x * scale


def mobius_add(x, y) -> np.ndarray:
    """x ⊕ y on the unit Poincaré disk; broadcasts over leading axes."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    xy = np.sum(x * y, axis=-1, keepdims=True)
    x2 = np.sum(x * x, axis=-1, keepdims=True)
    y2 = np.sum(y * y, axis=-1, keepdims=True)
    num = (1 + 2 * xy + y2) * x + (1 - x2) * y
    den = 1 + 2 * xy + x2 * y2
    return clip_to_disk(num / np.maximum(den, _EPS))


def distance(x, y) -> np.ndarray:
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    diff2 = np.sum((x - y) ** 2, axis=-1)
    x2 = np.sum(x * x, axis=-1)
    y2 = np.sum(y * y, axis=-1)
    arg = 1 + 2 * diff2 / ((1 - x2) * (1 - y2))
    return np.arccosh(np.maximum(arg, 1.0))


def log_map_origin(y) -> np.ndarray:
    """Tangent vector at the origin: artanh(|y|) y/|y| (0 maps to 0)."""
    y = np.asarray(y, dtype=np.float64)
    n = np.linalg.norm(y, axis=-1, keepdims=True)
    safe = np.maximum(n, _EPS)
    return np.where(n > 0, np.arctanh(np.minimum(n, CLIP_RADIUS)) * y / safe, 0.0)


def exp_map_origin(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.maximum(n, _EPS)
    return clip_to_disk(np.where(n > 0, np.tanh(n) * v / safe, 0.0))


def log_map_origin_t(y: Tensor, eps: float = 1e-12) -> Tensor:
    """Differentiable log map at the origin for (..., 2) tensors."""
    n = T.sqrt(T.tsum(y * y, axis=-1, keepdims=True) + eps)
    return T.artanh(n) * (y / n)


def conformal_scale(theta, squared_norm: bool = False) -> np.ndarray:
    """((1 - |θ|)/2)^2 per point, or ((1 - |θ|^2)/2)^2 when `squared_norm`."""
    n = np.linalg.norm(np.asarray(theta, dtype=np.float64), axis=-1, keepdims=True)
    base = 1 - n ** 2 if squared_norm else 1 - n
    return (base / 2.0) ** 2


def riemannian_scale(theta, euclid_grad, squared_norm: bool = False) -> np.ndarray:
    return conformal_scale(theta, squared_norm) * np.asarray(euclid_grad, dtype=np.float64)


# -- embedding ------------------------------------------------------------------
@dataclass
class EmbeddingSet:
    node_points: np.ndarray  # N × 2, frozen
    radius: np.ndarray
    angle: np.ndarray
    super_points: np.ndarray | None = None  # S × 2

    @property
    def n_nodes(self) -> int:
        return len(self.node_points)


def polar_to_disk(r: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)


def disk_to_polar(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    r = np.linalg.norm(x, axis=-1)
    theta = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2 * np.pi)
    return r, theta


def degree_radius(degrees: np.ndarray, r_max: float = R_MAX) -> np.ndarray:
    k = np.asarray(degrees, dtype=np.float64)
    kmax = k.max() if len(k) else 0.0
    if kmax <= 0:
        return np.full(len(k), r_max)
    return r_max * (1 - np.log(k + 1) / np.log(kmax + 1))


def fiedler_vector(adj: sp.spmatrix, iters: int = 5000, tol: float = 1e-10, seed: int = 0) -> np.ndarray:
    """Second eigenvector of the normalized Laplacian by deflated power iteration.

    Iterates on M = I + D^{-1/2} A D^{-1/2} (spectrum in [0, 2]); its top
    eigenvector D^{1/2}1 is projected out every step. Returned in the
    D^{-1/2}-rescaled (random-walk) form with a deterministic sign.
    """
    n = adj.shape[0]
    if n <= 2:
        return np.arange(n, dtype=np.float64)
    deg = np.asarray(adj.sum(axis=1)).ravel()
    dinv = np.where(deg > 0, deg ** -0.5, 0.0)
    norm_a = sp.diags(dinv) @ adj @ sp.diags(dinv)
    top = np.sqrt(deg)
    top = top / np.linalg.norm(top)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    for _ in range(iters):
        v -= top * (top @ v)
        w = v + norm_a @ v
        w -= top * (top @ w)
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        w /= nw
        done = np.linalg.norm(w - v) < tol
        v = w
        if done:
            break
    f = np.where(deg > 0, v * dinv, 0.0)
    lead = f[np.argmax(np.abs(f))]
    return f if lead >= 0 else -f


def angular_order(graph: Graph) -> np.ndarray:
    """Node order around the circle: components in contiguous arcs (largest first),
    each component ordered by its Fiedler vector, ties by node id."""
    adj = graph.adjacency()
    comps = sorted(graph.components(), key=lambda c: (-len(c), c[0]))
    order = []
    for comp in comps:
        sub = adj[comp][:, comp]
        f = fiedler_vector(sub)
        order.extend(comp[np.lexsort((comp, f))])
    return np.asarray(order, dtype=np.int64)


def embed_topology(graph: Graph, r_max: float = R_MAX) -> EmbeddingSet:
    """Place nodes on the disk: radius shrinks with log-degree, angle follows spectral order."""
    n = graph.node_count
    r = degree_radius(graph.degrees, r_max)
    rank = np.empty(n, dtype=np.int64)
    rank[angular_order(graph)] = np.arange(n)
    theta = 2 * np.pi * rank / n
    return EmbeddingSet(polar_to_disk(r, theta), r, theta)
