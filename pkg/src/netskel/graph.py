"""Undirected simple graphs: generators, edge-list I/O and topology statistics."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph


class GraphParseError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph stored as CSR neighbor lists.

    `labels[i]` is the source label of node i when the graph came from a file.
    """

    node_count: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray | None = field(default=None, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges, labels=None) -> "Graph":
        edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        edges = edges.reshape(-1, 2)
        if n < 1:
            raise ValueError("graph needs at least one node")
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ValueError("edge endpoint outside 0..n-1")
        edges = edges[edges[:, 0] != edges[:, 1]]
        lo, hi = np.minimum(edges[:, 0], edges[:, 1]), np.maximum(edges[:, 0], edges[:, 1])
        und = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(edges) else edges
        rows = np.concatenate([und[:, 0], und[:, 1]])
        cols = np.concatenate([und[:, 1], und[:, 0]])
        m = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        m.sort_indices()
        return cls(n, m.indptr.astype(np.int64), m.indices.astype(np.int64),
                   None if labels is None else np.asarray(labels))

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return int(len(self.indices) // 2)

    @property
    def avg_degree(self) -> float:
        return 2.0 * self.edge_count / self.node_count

    def node_ids(self) -> np.ndarray:
        """Source labels when known, else 0..N-1."""
        return np.arange(self.node_count) if self.labels is None else self.labels

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices))
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.node_count,) * 2)

    def dense(self) -> np.ndarray:
        return self.adjacency().toarray()

    def edges(self) -> np.ndarray:
        """Sorted (i<j) edge array of shape (E, 2)."""
        rows = np.repeat(np.arange(self.node_count), self.degrees)
        mask = rows < self.indices
        return np.stack([rows[mask], self.indices[mask]], axis=1)

    def components(self) -> list[np.ndarray]:
        n_comp, labels = csgraph.connected_components(self.adjacency(), directed=False)
        return [np.flatnonzero(labels == c) for c in range(n_comp)]

    def is_connected(self) -> bool:
        return len(self.components()) == 1


def generate_ba(n: int, m: int, seed: int) -> Graph:
    """Preferential attachment grown from a complete graph on m nodes."""
    if m < 1 or n <= m:
        raise ValueError(f"BA requires n > m >= 1 (got n={n}, m={m})")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(m) for j in range(i + 1, m)]
    # each node appears once per incident edge, so uniform picks are degree-proportional
    endpoints = np.empty(2 * (len(edges) + m * (n - m)), dtype=np.int64)
    filled = 0
    for e in edges:
        endpoints[filled:filled + 2] = e
        filled += 2
    for new in range(m, n):
        if filled:
            targets: set[int] = set()
            while len(targets) < m:
                targets.add(int(endpoints[rng.integers(filled)]))
        else:
            targets = {int(t) for t in rng.choice(new, size=m, replace=False)}
        for t in sorted(targets):
            edges.append((t, new))
            endpoints[filled:filled + 2] = (t, new)
            filled += 2
    return Graph.from_edges(n, edges)


def generate_ws(n: int, k: int, p: float, seed: int) -> Graph:
    """Ring lattice with k/2 neighbors per side, each edge rewired with probability p."""
    if k % 2:
        raise ValueError(f"WS ring degree k must be even (got {k})")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"rewire probability must be in [0, 1] (got {p})")
    if n <= k:
        raise ValueError(f"WS requires n > k (got n={n}, k={k})")
    rng = np.random.default_rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for j in range(1, k // 2 + 1):
            adj[i].add((i + j) % n)
            adj[(i + j) % n].add(i)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= p:
                continue
            if len(adj[u]) >= n - 1:
                continue
            w = int(rng.integers(n))
            while w == u or w in adj[u]:
                w = int(rng.integers(n))
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph.from_edges(n, edges)


def load_edge_list(path) -> Graph:
    """Read whitespace-separated integer pairs; '#'/'%' lines are comments.

    Extra columns (e.g. weights) are ignored. Labels are remapped to 0..N-1 in
    ascending label order; self-loops and duplicates are dropped.
    """
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s[0] in "#%":
                continue
            tok = s.split()
            if len(tok) < 2:
                raise GraphParseError(f"{path}, line {lineno}: expected two node labels, got {s!r}")
            try:
                pairs.append((int(tok[0]), int(tok[1])))
            except ValueError:
                raise GraphParseError(f"{path}, line {lineno}: non-integer node label in {s!r}") from None
    if not pairs:
        raise GraphParseError(f"{path}: no edges found")
    raw = np.asarray(pairs, dtype=np.int64)
    labels, remapped = np.unique(raw, return_inverse=True)
    return Graph.from_edges(len(labels), remapped.reshape(-1, 2), labels=labels)


def save_edge_list(graph: Graph, path) -> None:
    e = graph.edges()
    lines = [f"# nodes {graph.node_count} edges {graph.edge_count}"]
    lines += [f"{i} {j}" for i, j in e]
    Path(path).write_text("\n".join(lines) + "\n")


def local_clustering(graph: Graph) -> np.ndarray:
    a = graph.adjacency()
    tri = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0
    k = graph.degrees.astype(float)
    pairs = k * (k - 1) / 2.0
    return np.where(k >= 2, tri / np.where(pairs > 0, pairs, 1.0), 0.0)


def avg_clustering(graph: Graph) -> float:
    return float(local_clustering(graph).mean())


def betweenness(graph: Graph) -> np.ndarray:
    """Unnormalized shortest-path betweenness (Brandes accumulation, undirected)."""
    n = graph.node_count
    bc = np.zeros(n)
    indptr, indices = graph.indptr, graph.indices
    for s in range(n):
        sigma = np.zeros(n)
        dist = np.full(n, -1, dtype=np.int64)
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma[s], dist[s] = 1.0, 0
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in indices[indptr[v]:indptr[v + 1]]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(n)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    return bc / 2.0


def graph_stats(graph: Graph) -> dict:
    return {
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "avg_degree": graph.avg_degree,
        "avg_clustering": avg_clustering(graph),
        "components": len(graph.components()),
    }
