"""Lifting super-node trajectories back to nodes: degree clusters and per-cluster refiners."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .diffprog import MLP, Module, Tensor
from .diffprog import tensor as T
from .diffprog.layers import ACTIVATIONS, glorot, param
from .graph import Graph


@dataclass
class DegreeClustering:
    k: int
    labels: np.ndarray
    centers: np.ndarray  # in log(degree + 1) space, ascending

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)


def kmeans_1d(x: np.ndarray, k: int, seed: int, max_iter: int = 300) -> tuple[np.ndarray, np.ndarray]:
    """k-means++ seeding then Lloyd iterations to a fixed point; empty clusters
    are re-seeded at the point farthest from its center."""
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(seed)
    centers = [x[rng.integers(len(x))]]
    for _ in range(1, k):
        d2 = np.min((x[:, None] - np.asarray(centers)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total <= 0:
            centers.append(x[rng.integers(len(x))])
        else:
            centers.append(x[rng.choice(len(x), p=d2 / total)])
    centers = np.asarray(centers)
    labels = np.full(len(x), -1)
    for _ in range(max_iter):
        new = np.argmin((x[:, None] - centers[None, :]) ** 2, axis=1)
        for c in range(k):
            if not np.any(new == c):
                far = np.argmax((x - centers[new]) ** 2)
                centers[c] = x[far]
                new[far] = c
        if np.array_equal(new, labels):
            break
        labels = new
        centers = np.array([x[labels == c].mean() for c in range(k)])
    return labels, centers


def cluster_by_degree(graph: Graph, k: int = 10, seed: int = 0) -> DegreeClustering:
    if k < 1:
        raise ValueError("cluster count must be >= 1")
    feats = np.log(graph.degrees + 1.0)
    distinct = len(np.unique(feats))
    if k > distinct:
        warnings.warn(f"only {distinct} distinct degrees; lowering k from {k} to {distinct}")
        k = distinct
    labels, centers = kmeans_1d(feats, k, seed)
    order = np.argsort(centers, kind="stable")
    relabel = np.empty(k, dtype=np.int64)
    relabel[order] = np.arange(k)
    return DegreeClustering(k, relabel[labels], centers[order])


def expand(z, hard: np.ndarray) -> Tensor:
    """Copy each super-node trajectory to its members: (..., S, T, h) -> (..., N, T, h)."""
    z = T.as_tensor(z)
    idx = (Ellipsis, np.asarray(hard, dtype=np.int64), slice(None), slice(None))
    return T.take(z, idx)


class Refiner(Module):
    """X_c,T = (h0(history) || h1(latent)) Θ4 with identity output."""

    def __init__(self, history_dim: int, latent_dim: int, out_dim: int, hidden: int,
                 rng: np.random.Generator, out_activation: str = "identity"):
        self.h0 = MLP([history_dim, hidden, hidden], rng, out_activation="tanh")
        self.h1 = MLP([latent_dim, hidden, hidden], rng, out_activation="tanh")
        self.theta4 = param(glorot(rng, 2 * hidden, out_dim))
        self.out_activation = out_activation

    def __call__(self, history, latent) -> Tensor:
        return refine(history, latent, self)


def refine(history, latent, refiner: Refiner) -> Tensor:
    history, latent = T.as_tensor(history), T.as_tensor(latent)
    if history.shape[:-1] != latent.shape[:-1]:
        raise ValueError(f"history {history.shape} and latent {latent.shape} disagree on nodes")
    feats = T.concat([refiner.h0(history), refiner.h1(latent)], axis=-1)
    return ACTIVATIONS[refiner.out_activation](feats @ refiner.theta4)


class RefinerBank(Module):
    def __init__(self, clustering: DegreeClustering, history_dim: int, latent_dim: int,
                 out_dim: int, hidden: int, rng: np.random.Generator):
        self.clustering = clustering
        self.refiners = [Refiner(history_dim, latent_dim, out_dim, hidden, rng)
                         for _ in range(clustering.k)]

    def __call__(self, history, latent) -> Tensor:
        """history (..., N, Lx), latent (..., N, Lz) -> (..., N, out)."""
        history, latent = T.as_tensor(history), T.as_tensor(latent)
        members = [self.clustering.members(c) for c in range(self.clustering.k)]
        parts, order = [], []
        for c, idx in enumerate(members):
            if len(idx) == 0:
                continue
            sel = (Ellipsis, idx, slice(None))
            parts.append(self.refiners[c](T.take(history, sel), T.take(latent, sel)))
            order.append(idx)
        perm = np.concatenate(order)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        out = T.concat(parts, axis=-2)
        return T.take(out, (Ellipsis, inv, slice(None)))
