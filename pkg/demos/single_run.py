"""One full mission, both protocols, same seed.

The default scenario is 21 nodes in 7 groups following shared waypoint
plans for 600 s at 20 m/s, with every node abandoning its plan halfway
through. Six echo flows send one 1024-bit packet per second each. Both
protocols see the identical world because all randomness hangs off the
run seed, not the protocol."""

import time

from tensr.harness import run_scenario
from tensr.scenario import Scenario

scenario = Scenario()
print(f"{scenario.n_nodes} nodes, {scenario.duration:.0f} s at "
      f"{scenario.velocity:.0f} m/s, plans break at "
      f"t={scenario.deviation_time:.0f} s, {scenario.traffic.flows} "
      f"echo flows\n")

results = {}
for protocol in ("tensr", "baseline"):
    t0 = time.time()
    results[protocol] = run_scenario(scenario, protocol, seed=7)
    print(f"{protocol} finished in {time.time() - t0:.1f} s")

print(f"\n{'':24s}{'tensr':>12s}{'baseline':>12s}")
rows = [
    ("packets sent", "packets_sent", "{:d}"),
    ("packets delivered", "packets_delivered", "{:d}"),
    ("mean delay (s)", "mean_delay", "{:.4f}"),
    ("control bits", "control_bits", "{:d}"),
    ("data bits", "data_bits", "{:d}"),
    ("percent overhead", "percent_overhead", "{:.3f}"),
    ("measured partitioning", "anp", "{:.4f}"),
]
for label, attr, fmt in rows:
    a = fmt.format(getattr(results["tensr"], attr))
    b = fmt.format(getattr(results["baseline"], attr))
    print(f"{label:24s}{a:>12s}{b:>12s}")

st = results["tensr"].flows
print("\nper-flow delivery (tensr): "
      + ", ".join(f"{f.src}->{f.dst} {f.delivered}/{f.sent}"
                  for f in st.values()))
