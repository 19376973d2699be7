# Pacing service replies on a five-router chain.
import numpy as np

from discopace import fixtures, planner
from discopace import protocols as P

net = fixtures.load("scenario1_chain")
print(len(net.routers), "routers,", len(net.clients), "clients,", len(net.services), "services")

# round TSoM to 2 ms like the worked example
params = planner.MessageParams(128, 524288, 0.002)
plan = planner.plan(net, params)
print(plan.to_text(4))

# replies at the planned spacing
m = P.run_paced(net, plan, P.PacedDiscoveryConfig(plan.best_interval_s))
print("dropped", m.dropped, "in", round(m.discovery_time_s, 4), "s")

# squeeze the spacing and watch the drops come back
for k in range(0, 6):
    gap = plan.best_interval_s - k * 0.002
    d = P.run_paced(net, plan, P.PacedDiscoveryConfig(gap)).dropped
    print(f"{gap:.3f}s -> {d} dropped")

# with the rounding removed the margin is gone one slot below
exact = planner.plan(net)
below = exact.best_interval_s - exact.tsom_s
print("exact", exact.best_interval_s, "one slot less drops",
      P.run_paced(net, exact, P.PacedDiscoveryConfig(below)).dropped)

# two unrelated flows sharing the chain
back = [P.BackTraffic("S0_00", "C2_0", 20, 0.162), P.BackTraffic("S3_00", "C4_0", 20, 0.162)]
m = P.run_paced(net, plan, P.PacedDiscoveryConfig(0.162, back_traffic=back))
print("with back traffic:", m.dropped, "dropped,", round(m.discovery_time_s, 4), "s")

# where the bursts pile up
m = P.run_paced(net, plan, P.PacedDiscoveryConfig(plan.best_interval_s), record=True)
from discopace.simulator import peak_occupancy
peaks = peak_occupancy(m.trace)
routers = list(net.routers)
print(np.array([peaks.get(r, 0) for r in routers]), "peak vs planned", np.array([plan.queue_sizes[r] for r in routers]))
