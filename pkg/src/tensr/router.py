"""Most-reliable-path routing.

A path's reliability is the product of its link probabilities, so the
most reliable path minimises the sum of -log p over its links and plain
Dijkstra applies.  Ties (equal weight within a small band, to absorb
float noise in the log sums) are broken toward fewer hops, then toward
the smallest next-hop id, which keeps tables identical across nodes and
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Path weights closer than this are considered equal; genuine reliability
# differences in the simulator are orders of magnitude larger, so the band
# only merges float noise such as -log(a*b) vs -log(a)-log(b).
_TIE_BAND = 1e-12

_NO_HOPS = np.iinfo(np.int64).max


@dataclass(slots=True)
class ReliabilityGraph:
    """Symmetric link-weight matrix, weight = -log p; inf = no edge."""

    weights: np.ndarray


@dataclass(slots=True)
class RoutingTable:
    """Shortest-path tree from `source`: per destination the first hop to
    take, the end-to-end reliability, and the hop count.  Unreachable
    destinations carry next_hop -1, reliability 0, hops -1."""

    source: int
    next_hop: np.ndarray
    reliability: np.ndarray
    hops: np.ndarray


def build_graph(p_hat: np.ndarray) -> ReliabilityGraph:
    """Turn an all-pairs probability matrix into -log weights; zero
    probability excludes the edge, the diagonal is ignored."""
    p = np.asarray(p_hat, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("probability matrix must be square")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    if np.max(np.abs(p - p.T)) > 1e-9:
        raise ValueError("probability matrix must be symmetric")
    with np.errstate(divide="ignore"):
        w = -np.log(p)
    np.fill_diagonal(w, np.inf)
    return ReliabilityGraph(weights=w)


def _better(d_new: float, h_new: int, n_new: int,
            d_old: float, h_old: int, n_old: int) -> bool:
    """Lexicographic (weight-within-band, hop count, next-hop id)."""
    if d_new < d_old - _TIE_BAND:
        return True
    if d_new > d_old + _TIE_BAND:
        return False
    if h_new != h_old:
        return h_new < h_old
    return n_new < n_old


def most_reliable_paths(graph: ReliabilityGraph,
                        source: int) -> RoutingTable:
    """Dijkstra over the -log weights with deterministic tie-breaking.

    Dense scan per settle step: node counts here are a few dozen, where
    the O(n^2) form beats a heap and keeps the tie rules explicit. The
    loops run on plain lists (bit-identical float math, far less per-entry
    overhead than array scalar indexing) with _better's rule inlined.
    """
    w = graph.weights
    n = w.shape[0]
    if not 0 <= source < n:
        raise ValueError(f"source {source} out of range for {n} nodes")
    inf = float("inf")
    band = _TIE_BAND
    wl = w.tolist()
    dist = [inf] * n
    hops = [_NO_HOPS] * n
    next_hop = [-1] * n
    settled = [False] * n
    dist[source] = 0.0
    hops[source] = 0
    next_hop[source] = source

    for _ in range(n):
        best = -1
        bd = bh = bn = 0
        for v in range(n):
            if settled[v]:
                continue
            dv = dist[v]
            if dv == inf:
                continue
            if best >= 0:
                if dv < bd - band:
                    pass
                elif (dv > bd + band or hops[v] > bh
                      or (hops[v] == bh and next_hop[v] >= bn)):
                    continue
            best, bd, bh, bn = v, dv, hops[v], next_hop[v]
        if best < 0:
            break
        settled[best] = True
        row = wl[best]
        cand_hops = bh + 1
        fixed_nh = -1 if best == source else bn
        for v in range(n):
            if settled[v]:
                continue
            wv = row[v]
            if wv == inf:
                continue
            cand = bd + wv
            dv = dist[v]
            cand_nh = v if fixed_nh < 0 else fixed_nh
            if cand < dv - band:
                pass
            elif (cand > dv + band or cand_hops > hops[v]
                  or (cand_hops == hops[v] and cand_nh >= next_hop[v])):
                continue
            dist[v] = cand
            hops[v] = cand_hops
            next_hop[v] = cand_nh

    dist_arr = np.array(dist)
    finite = np.isfinite(dist_arr)
    reliability = np.where(finite, np.exp(-dist_arr), 0.0)
    hops_arr = np.where(finite, np.array(hops, dtype=np.int64), -1)
    return RoutingTable(source=source,
                        next_hop=np.array(next_hop, dtype=np.int64),
                        reliability=reliability, hops=hops_arr)
