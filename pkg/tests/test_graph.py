import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netskel.graph import (Graph, GraphParseError, avg_clustering, betweenness, generate_ba, generate_ws,
                           graph_stats, load_edge_list, local_clustering, save_edge_list)


def bfs_connected(g: Graph) -> bool:
    seen, todo = {0}, deque([0])
    while todo:
        u = todo.popleft()
        for v in g.neighbors(u):
            if v not in seen:
                seen.add(int(v))
                todo.append(int(v))
    return len(seen) == g.node_count


def assert_simple_symmetric(g: Graph):
    a = g.dense()
    assert np.array_equal(a, a.T)
    assert np.all(np.diag(a) == 0)
    assert set(np.unique(a)) <= {0.0, 1.0}
    assert g.edge_count == g.degrees.sum() // 2
    pairs = [tuple(e) for e in g.edges()]
    assert len(pairs) == len(set(pairs))  # brute-force duplicate scan


def shortest_path_oracle(g: Graph) -> np.ndarray:
    """Betweenness by enumerating every shortest path between every pair."""
    n = g.node_count
    adj = {i: set(int(j) for j in g.neighbors(i)) for i in range(n)}
    score = np.zeros(n)
    for s, t in itertools.combinations(range(n), 2):
        paths, frontier, found = [], [[s]], False
        while frontier and not found:
            nxt = []
            for path in frontier:
                for v in adj[path[-1]]:
                    if v in path:
                        continue
                    if v == t:
                        paths.append(path + [v])
                        found = True
                    else:
                        nxt.append(path + [v])
            frontier = nxt
        for path in paths:
            for v in path[1:-1]:
                score[v] += 1.0 / len(paths)
    return score


def triangle_oracle(g: Graph) -> float:
    a = g.dense()
    vals = []
    for i in range(g.node_count):
        nb = np.flatnonzero(a[i])
        k = len(nb)
        if k < 2:
            vals.append(0.0)
            continue
        tri = sum(a[u, v] for u, v in itertools.combinations(nb, 2))
        vals.append(tri / (k * (k - 1) / 2))
    return float(np.mean(vals))


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.uniform() < p]
    return Graph.from_edges(n, edges)


# -- construction -----------------------------------------------------------------------
def test_from_edges_drops_loops_and_duplicates():
    g = Graph.from_edges(3, [(0, 1), (1, 0), (2, 2), (1, 2), (1, 2)])
    assert g.edge_count == 2
    assert_simple_symmetric(g)


def test_ba_small_tree():
    g = generate_ba(3, 1, seed=5)
    assert g.edge_count == 2 and bfs_connected(g)


def test_ba_edge_count_scale():
    g = generate_ba(5000, 3, seed=7)
    # the seed clique adds C(3,2) edges on top of 3·(n−3) = 14,991
    assert abs(g.edge_count - 14991) <= 3
    assert_simple_symmetric(g)


def test_ba_min_degree_and_connected():
    g = generate_ba(50, 2, seed=1)
    assert g.degrees.min() >= 2 and bfs_connected(g)


def test_ba_rejects_bad_sizes():
    with pytest.raises(ValueError):
        generate_ba(3, 3, seed=0)


def test_ws_ring_without_rewiring_is_cycle():
    g = generate_ws(10, 2, 0.0, seed=0)
    assert g.edge_count == 10 and np.all(g.degrees == 2) and bfs_connected(g)


def test_ws_large_ring_edge_count():
    g = generate_ws(5000, 4, 0.1, seed=1)
    assert g.edge_count == 10000 and g.avg_degree == 4.0


def test_ws_full_rewiring_stays_simple():
    g = generate_ws(20, 4, 1.0, seed=3)
    assert g.edge_count == 40
    assert_simple_symmetric(g)


@pytest.mark.parametrize("args", [(10, 3, 0.1), (10, 4, 1.5), (4, 4, 0.1)])
def test_ws_rejects_invalid(args):
    with pytest.raises(ValueError):
        generate_ws(*args, seed=0)


@settings(max_examples=20, deadline=None)
@given(st.integers(5, 60), st.integers(1, 4), st.integers(0, 10_000))
def test_ba_invariants(n, m, seed):
    if n <= m:
        return
    g = generate_ba(n, m, seed)
    assert_simple_symmetric(g)
    assert g.edge_count == m * (n - m) + m * (m - 1) // 2
    assert np.all(g.degrees[m:] >= m)
    assert np.array_equal(g.edges(), generate_ba(n, m, seed).edges())


@settings(max_examples=20, deadline=None)
@given(st.integers(7, 50), st.sampled_from([2, 4, 6]), st.floats(0, 1), st.integers(0, 10_000))
def test_ws_invariants(n, k, p, seed):
    if n <= k:
        return
    g = generate_ws(n, k, p, seed)
    assert_simple_symmetric(g)
    assert g.edge_count == n * k // 2
    assert np.array_equal(g.edges(), generate_ws(n, k, p, seed).edges())


# -- files ------------------------------------------------------------------------------
def test_load_path_graph(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("0 1\n1 2")
    g = load_edge_list(f)
    assert g.node_count == 3 and g.edge_count == 2


def test_load_dedups_and_remaps(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("# comment\n% other\n\n5 9\n9 5\n5 5\n")
    g = load_edge_list(f)
    assert g.node_count == 2 and g.edge_count == 1
    assert list(g.labels) == [5, 9]


def test_load_reports_line_number(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("0 1\n1 x\n")
    with pytest.raises(GraphParseError, match="line 2"):
        load_edge_list(f)


def test_load_rejects_empty(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("# only comments\n")
    with pytest.raises(GraphParseError):
        load_edge_list(f)


def test_powergrid_sized_file(tmp_path):
    # 8,271 edges over 5,300 nodes: a spanning path plus extra chords
    rng = np.random.default_rng(0)
    edges = {(i, i + 1) for i in range(5299)}
    while len(edges) < 8271:
        i, j = sorted(rng.integers(5300, size=2))
        if i != j:
            edges.add((int(i), int(j)))
    f = tmp_path / "pg.txt"
    f.write_text("\n".join(f"{i} {j}" for i, j in sorted(edges)))
    g = load_edge_list(f)
    assert g.node_count == 5300 and g.edge_count == 8271


def test_save_load_round_trip(tmp_path):
    g = generate_ba(40, 2, seed=3)
    save_edge_list(g, tmp_path / "g.edges")
    back = load_edge_list(tmp_path / "g.edges")
    assert np.array_equal(back.edges(), g.edges())
    text = (tmp_path / "g.edges").read_text().splitlines()
    pairs = [tuple(map(int, ln.split())) for ln in text if not ln.startswith("#")]
    assert pairs == sorted(pairs) and all(i < j for i, j in pairs)


# -- statistics ---------------------------------------------------------------------------
def test_clustering_triangle_and_star():
    assert avg_clustering(Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])) == 1.0
    assert avg_clustering(Graph.from_edges(5, [(0, i) for i in range(1, 5)])) == 0.0


def test_clustering_cycle_with_chord_matches_oracle():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
    assert avg_clustering(g) == pytest.approx(triangle_oracle(g), abs=1e-15)
    assert avg_clustering(g) == pytest.approx((2 / 3 + 1 + 2 / 3 + 1) / 4)


@pytest.mark.parametrize("seed", range(5))
def test_clustering_random_matches_oracle(seed):
    g = random_graph(12, 0.35, seed)
    assert avg_clustering(g) == pytest.approx(triangle_oracle(g), abs=1e-12)
    assert np.all((local_clustering(g) >= 0) & (local_clustering(g) <= 1))


def test_betweenness_path_and_complete():
    assert np.allclose(betweenness(Graph.from_edges(3, [(0, 1), (1, 2)])), [0, 1, 0])
    k4 = Graph.from_edges(4, list(itertools.combinations(range(4), 2)))
    assert np.allclose(betweenness(k4), 0)


@pytest.mark.parametrize("seed", range(6))
def test_betweenness_matches_path_enumeration(seed):
    g = random_graph(8, 0.4, seed)
    assert np.allclose(betweenness(g), shortest_path_oracle(g), atol=1e-12)


def test_stats_avg_degree_exact():
    g = generate_ba(30, 2, seed=0)
    st_ = graph_stats(g)
    assert st_["avg_degree"] == 2 * g.edge_count / g.node_count


def test_components_and_connectivity():
    g = Graph.from_edges(5, [(0, 1), (2, 3)])
    comps = g.components()
    assert sorted(len(c) for c in comps) == [1, 2, 2]
    assert not g.is_connected()
