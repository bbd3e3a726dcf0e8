"""The two headline trends, at toy size so the script stays minutes.

First: delivery vs node velocity for both protocols (the social router
holds up better as links churn faster). Second: the control-overhead
knob — shorter beacon intervals cost bits and buy delivery.

The real campaign uses 30 trials per cell (Scenario().trials); here we
run 2 and print standard errors so the gap can be judged against noise.
With multiple cores, pass jobs=N to run_campaign to spread trials."""

import dataclasses
import time

from tensr.harness import run_campaign, run_interval_sweep
from tensr.scenario import Scenario

base = Scenario()
trials = 2

t0 = time.time()
result = run_campaign(base, groupings=[(3, 7)],
                      velocities=(10.0, 20.0, 30.0), trials=trials)
print(f"campaign: {3 * 2 * trials} runs in {time.time() - t0:.0f} s\n")
print(result.summary_text())

csv_text = result.to_csv()
print(f"to_csv() -> {len(csv_text.splitlines())} lines "
      f"(trial rows plus one 'mean' row per cell)\n")

# The overhead knob, at 30 m/s where freshness matters most: scale
# every periodic message by a common factor and watch the operating
# point move. One trial per point keeps this quick.
t0 = time.time()
points = run_interval_sweep(dataclasses.replace(base, velocity=30.0),
                            trials=1)
print(f"interval sweep: {len(points)} operating points in "
      f"{time.time() - t0:.0f} s\n")
print("protocol  beacon every  delivered  control share")
for p in points:
    print(f"{p.protocol:8s}  {p.hello_interval:9.2f} s  "
          f"{p.delivered:9.0f}  {p.percent_overhead:13.3f}")
