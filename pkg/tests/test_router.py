"""Routing against brute-force path enumeration and hand-built ties."""

import math

import numpy as np
import pytest

from tensr.router import build_graph, most_reliable_paths


def sym(n, entries):
    p = np.zeros((n, n))
    for i, j, v in entries:
        p[i, j] = p[j, i] = v
    return p


def best_products(p, source):
    """Max path reliability source->every node over all simple paths."""
    n = p.shape[0]
    best = np.zeros(n)
    best[source] = 1.0

    def walk(v, visited, prod):
        for u in range(n):
            if not visited[u] and p[v, u] > 0.0:
                got = prod * p[v, u]
                if got > best[u]:
                    best[u] = got
                visited[u] = True
                walk(u, visited, got)
                visited[u] = False

    visited = np.zeros(n, dtype=bool)
    visited[source] = True
    walk(source, visited, 1.0)
    return best


def test_build_graph_weights():
    g = build_graph(sym(3, [(0, 1, 1.0), (1, 2, 0.5)]))
    assert g.weights[0, 1] == 0.0
    assert abs(g.weights[1, 2] - math.log(2.0)) < 1e-15
    assert math.isinf(g.weights[0, 2])


def test_build_graph_validation():
    with pytest.raises(ValueError):
        build_graph(np.full((2, 3), 0.5))
    with pytest.raises(ValueError):
        build_graph(sym(2, [(0, 1, 1.5)]))
    bad = sym(3, [(0, 1, 0.5)])
    bad[1, 0] = 0.7
    with pytest.raises(ValueError):
        build_graph(bad)


def test_single_edge():
    table = most_reliable_paths(build_graph(sym(2, [(0, 1, 0.7)])), 0)
    assert table.next_hop[1] == 1
    assert abs(table.reliability[1] - 0.7) < 1e-15
    assert table.hops[1] == 1
    assert table.next_hop[0] == 0 and table.reliability[0] == 1.0


def test_two_hops_beat_weak_direct():
    p = sym(3, [(0, 2, 0.5), (0, 1, 0.8), (1, 2, 0.8)])
    table = most_reliable_paths(build_graph(p), 0)
    assert table.next_hop[2] == 1
    assert abs(table.reliability[2] - 0.64) < 1e-12
    assert table.hops[2] == 2


def test_equal_product_tie_prefers_fewer_hops():
    p = sym(3, [(0, 2, 0.64), (0, 1, 0.8), (1, 2, 0.8)])
    table = most_reliable_paths(build_graph(p), 0)
    assert table.next_hop[2] == 2
    assert table.hops[2] == 1
    assert abs(table.reliability[2] - 0.64) < 1e-12


def test_equal_everything_tie_prefers_smaller_next_hop():
    # two symmetric two-hop routes 0-1-3 and 0-2-3
    p = sym(4, [(0, 1, 0.8), (1, 3, 0.8), (0, 2, 0.8), (2, 3, 0.8)])
    table = most_reliable_paths(build_graph(p), 0)
    assert table.next_hop[3] == 1


def test_unreachable_marked():
    p = sym(4, [(0, 1, 0.9)])
    table = most_reliable_paths(build_graph(p), 0)
    assert table.next_hop[2] == -1
    assert table.reliability[2] == 0.0
    assert table.hops[2] == -1


def test_zero_probability_edge_excluded():
    p = sym(3, [(0, 1, 0.0), (0, 2, 0.5), (2, 1, 0.5)])
    table = most_reliable_paths(build_graph(p), 0)
    assert table.next_hop[1] == 2
    assert abs(table.reliability[1] - 0.25) < 1e-12


def test_source_validation():
    g = build_graph(sym(2, [(0, 1, 0.5)]))
    with pytest.raises(ValueError):
        most_reliable_paths(g, 2)


def test_oracle_100_random_graphs():
    rng = np.random.default_rng(1234)
    levels = np.linspace(0.0, 1.0, 11)
    for trial in range(100):
        n = int(rng.integers(2, 9))
        p = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        vals = rng.choice(levels, size=len(iu[0]))
        p[iu] = vals
        p += p.T
        source = trial % n
        table = most_reliable_paths(build_graph(p), source)
        want = best_products(p, source)
        assert np.max(np.abs(table.reliability - want)) < 1e-12


def test_raising_probability_never_hurts():
    rng = np.random.default_rng(77)
    for _ in range(20):
        n = 6
        p = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        p[iu] = rng.uniform(0, 1, len(iu[0]))
        p += p.T
        before = most_reliable_paths(build_graph(p), 0).reliability
        i, j = rng.integers(0, n, 2)
        while i == j:
            j = int(rng.integers(0, n))
        p[i, j] = p[j, i] = min(1.0, p[i, j] + rng.uniform(0, 0.5))
        after = most_reliable_paths(build_graph(p), 0).reliability
        assert np.all(after >= before - 1e-12)


def test_log_sum_matches_log_product():
    rng = np.random.default_rng(5)
    for _ in range(50):
        probs = rng.uniform(0.05, 1.0, int(rng.integers(1, 9)))
        s = -np.sum(np.log(probs))
        direct = -math.log(np.prod(probs))
        assert abs(s - direct) < 1e-12


def test_next_hop_is_second_node_on_path():
    # walk the tree: following next hops from the source must reach each
    # destination in exactly `hops` steps with the table's reliability
    rng = np.random.default_rng(11)
    n = 7
    p = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    p[iu] = rng.uniform(0, 1, len(iu[0])) * (rng.random(len(iu[0])) < 0.6)
    p += p.T
    tables = {s: most_reliable_paths(build_graph(p), s) for s in range(n)}
    t0 = tables[0]
    for dest in range(1, n):
        if t0.next_hop[dest] < 0:
            continue
        at, steps, rel = 0, 0, 1.0
        while at != dest:
            nxt = tables[at].next_hop[dest]
            assert nxt >= 0
            rel *= p[at, nxt]
            at = int(nxt)
            steps += 1
            assert steps <= n
        # hop-by-hop forwarding with per-node tables reaches the target
        assert rel > 0.0
