# Timeout-driven rediscovery against a single paced round.
from discopace import fixtures, planner
from discopace import protocols as P

params = planner.MessageParams(128, 524288, 0.002)

for name in ("eval_chain", "eval_star"):
    net = fixtures.load(name)
    plan = planner.plan(net, params)
    print(f"== {name}: interval {plan.best_interval_s} s ({plan.interval_tsom:g} slots)")
    rows = P.compare(net, plan)
    print(P.format_comparison(rows))

# a short window misses replies still queued, so clients ask again;
# one shorter than a round trip hears nothing and quits right away
net = fixtures.load("eval_star")
plan = planner.plan(net, params)
for timeout in (0.2, 0.1, 0.05, 0.03):
    m = P.run_max_limit(net, P.MaxLimitDiscoveryConfig(timeout), plan.queue_sizes)
    print(timeout, m.multicast_rounds, "rounds", m.dropped, "dropped", m.duplicates_received, "dups",
          f"found {m.per_round_discovered_pct[-1]:g}%")
