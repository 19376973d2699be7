# How the planned interval grows with network size.
import numpy as np

from discopace import fixtures, planner
from discopace import protocols as P

tbl = planner.interval_table([8, 12, 16], range(1, 11))
print(tbl.to_text())

# each extra client and service per router costs about the same number of slots
col = tbl.values[:, 0]
print("steps on 8 routers:", np.diff(col))
slope, icept = np.polyfit(np.arange(1, 11), col, 1)
print(f"fit: {slope:.2f} slots per unit, intercept {icept:.2f}")

# the planner against a brute-force search for the smallest safe interval
for name in fixtures.NAMES:
    net = fixtures.load(name)
    plan = planner.plan(net)
    best = P.min_zero_drop_interval(net, plan.queue_sizes)
    print(f"{name:18s} planned {plan.best_interval_s:.6f}  searched {best:.6f}  ratio {best / plan.best_interval_s:.2f}")
