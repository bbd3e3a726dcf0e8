"""Most-reliable paths on a small probability graph.

Link weights are adjacency probabilities; the router maximizes the
product along the path by running a shortest path under -log p."""

import numpy as np

from tensr.router import build_graph, most_reliable_paths


def sym(n, entries):
    p = np.zeros((n, n))
    for i, j, v in entries:
        p[i, j] = p[j, i] = v
    return p


# A 5-node graph with a weak direct link 0-4 and a strong relay chain.
p = sym(5, [(0, 4, 0.30),
            (0, 1, 0.90), (1, 2, 0.95), (2, 4, 0.90),
            (0, 3, 0.60), (3, 4, 0.60)])

table = most_reliable_paths(build_graph(p), source=0)
print("routes from node 0:")
print("  dest  next hop  hops  path reliability")
for dest in range(1, 5):
    print(f"  {dest:4d}  {table.next_hop[dest]:8d}  {table.hops[dest]:4d}  "
          f"{table.reliability[dest]:17.4f}")

# The direct 0-4 link survives at 0.30, the 3-hop relay at
# 0.90*0.95*0.90 = 0.77: the router picks the relay.
direct = p[0, 4]
print(f"\ndirect 0->4 reliability {direct:.2f}, "
      f"routed {table.reliability[4]:.4f} via node {table.next_hop[4]}")

# Walk the next-hop chain to print the full path.
tables = {s: most_reliable_paths(build_graph(p), s) for s in range(5)}
at, path = 0, [0]
while at != 4:
    at = int(tables[at].next_hop[4])
    path.append(at)
print(f"hop-by-hop path 0->4: {' -> '.join(map(str, path))}")

# Unreachable nodes are marked, not guessed.
p2 = sym(3, [(0, 1, 0.8)])
t2 = most_reliable_paths(build_graph(p2), 0)
print(f"\nisolated node: next_hop {t2.next_hop[2]}, "
      f"reliability {t2.reliability[2]}, hops {t2.hops[2]}")
