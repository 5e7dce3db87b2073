# %% [markdown]
# # Inside the CONGEST clock
#
# Each hour works on one level h.  Even minutes cut the number of violating
# edges by a constant factor per iteration; odd minutes push flow through a
# DAG whose height drops every second.  The run manifest records both.

# %%
from collections import Counter

import numpy as np

from localdensity import CongestProtocol, generate, make_schedule, orientation_from_masses

g = generate("path:12")
sched = make_schedule(0.5, g.n, max_start=g.n - 1)
print(f"eta={sched.eta:.2e}  levels {sched.level_bottom}..{sched.level_top}  "
      f"{sched.minutes_per_hour} minutes per hour  {sched.total_rounds():,} rounds in total")

# %% [markdown]
# Start from the worst orientation: every edge points forward, so one end
# of the path carries everything.

# %%
start = orientation_from_masses(g, {(a, b): 1.0 for a, b, _ in g.edges})
p = CongestProtocol(g, 0.5, orientation=start)
o, trace = p.run()
print("final out-degrees:", np.round(o.out, 3))

# %%
hours = trace.meta["active_hours"]
flips = np.array([r["flips"] for r in hours])
print(f"{len(hours)} active hours out of {len(sched.hours)}; first five {[(r['hour'], r['flips']) for r in hours[:5]]}")
print(f"flips per active hour: median {np.median(flips):.0f}, max {flips.max()}")
for counts in p.decay_log[:5]:
    print("violating edges per even iteration:", counts)
heights = Counter(h for hs in p.height_log for h in hs)
print("odd-minute DAG heights seen:", dict(sorted(heights.items())))
print("checkpoints:", trace.meta["checks"])
