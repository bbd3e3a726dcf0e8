"""How a node guesses whether two OTHER nodes are in radio range.

One observer's view is loaded with progressively staler information and
the estimator walks down its ladder: own measurement, recent shared
measurement, position reports, social tie, flat prior."""

import numpy as np

from tensr.estimator import EstimatorParams, NodeView, estimate
from tensr.linkstate import MAT_A, MAT_D, MAT_R, LinkStateStore
from tensr.pli import PliRecord, PliTable

CASE_NAMES = {
    1: "own neighbor row",
    2: "recent shared measurement",
    3: "position reports",
    4: "social tie ratio",
    5: "flat prior",
}

n = 4
params = EstimatorParams.uniform(n, v_max=30.0, d_max=500.0, sigma_n=10.0)
now = 20.0


def show(label, view, i=0, j=1, t=now):
    got = estimate(view, i, j, t)
    print(f"  {label:45s} case {got.case_used} "
          f"({CASE_NAMES[got.case_used]}), p = {got.p_hat:.4f}")


def fresh_view(q):
    return NodeView(node_id=q, store=LinkStateStore(n), pli=PliTable(),
                    plans={}, params=params)


print("pair (0, 1) seen by observer 2, range 500 m, v_max 30 m/s\n")

# Nothing known at all: the flat prior.
view = fresh_view(q=2)
show("empty view", view)

# A week-old tie count: nodes 0 and 1 shared 8 of the last 10
# measurement intervals, so the ratio 0.8 stands in for adjacency.
view.store.set_entry(MAT_R, 0, 1, 8.0, now - 5.0)
show("+ tie count 8/10 from 5 s ago", view)

# Fresh position reports beat the tie: a Gaussian disk integral around
# the reported separation (here 450 m, just inside the 500 m range).
view.pli.put(PliRecord(0, np.array([0.0, 0.0]), now - 2.0))
view.pli.put(PliRecord(1, np.array([450.0, 0.0]), now - 2.0))
show("+ position reports 450 m apart", view)

# A recent distance measurement beats the reports as long as the pair
# cannot have crossed the range boundary since: distance 100 m leaves a
# 400 m margin, and at 2x30 m/s that is good for 6.67 s.
view.store.set_entry(MAT_A, 0, 1, 1.0, now - 1.0)
view.store.set_entry(MAT_D, 0, 1, 100.0, now - 1.0)
show("+ adjacency + distance 100 m, 1 s old", view)

# The same measurement 8 s old is past the 6.67 s budget: back to the
# position reports.
view.store.set_entry(MAT_D, 0, 1, 100.0, now - 8.0)
show("distance now 8 s old (budget 6.67 s)", view)

# The endpoints themselves never estimate: node 0 reads its own row.
view.node_id = 0
show("observer is endpoint 0", view)

# Far in the future everything is stale and the prior returns.
view.node_id = 2
show("same view 1000 s later", view, t=now + 1000.0)
