"""Discovery traffic: the paced burst schedule, the maximum-limit baseline, and
a brute-force search for the smallest drop-free interval."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from . import planner
from .simulator import BACK, MULTICAST, QUERY, REPLY, SimTrace, Simulator
from .topology import Topology

DEFAULT_MESSAGE_BYTES = 128
# back-traffic starts "nearly" with the first burst
BACK_TRAFFIC_OFFSET_S = 1e-6
DEFAULT_ROUND_CAP = 64


class ProtocolError(RuntimeError):
    pass


class BackTraffic(NamedTuple):
    src: str
    dst: str
    count: int
    period_s: float


@dataclass
class PacedDiscoveryConfig:
    interval_s: float
    reply_bytes: int = DEFAULT_MESSAGE_BYTES
    query_bytes: int = DEFAULT_MESSAGE_BYTES
    back_traffic: list[BackTraffic] = field(default_factory=list)

    def __post_init__(self):
        if self.interval_s < 0:
            raise ValueError("interval must be non-negative")
        if any(b.count < 0 or b.period_s < 0 for b in self.back_traffic):
            raise ValueError("back-traffic counts and periods must be non-negative")


@dataclass
class MaxLimitDiscoveryConfig:
    timeout_s: float
    reply_bytes: int = DEFAULT_MESSAGE_BYTES
    query_bytes: int = DEFAULT_MESSAGE_BYTES
    round_cap: int = DEFAULT_ROUND_CAP

    def __post_init__(self):
        if not self.timeout_s > 0:
            raise ValueError("timeout must be positive")


@dataclass
class ScenarioMetrics:
    multicast_rounds: int
    dropped: int
    replies_sent: int
    duplicates_received: int
    discovery_time_s: float
    per_round_discovered_pct: list[float]
    multicast_time_s: float = 0.0
    trace: SimTrace | None = field(default=None, repr=False, compare=False)

    def as_dict(self) -> dict[str, object]:
        return {
            "multicast_rounds": self.multicast_rounds,
            "dropped": self.dropped,
            "replies_sent": self.replies_sent,
            "duplicates_received": self.duplicates_received,
            "discovery_time": self.discovery_time_s,
            "multicast_time": self.multicast_time_s,
            "per_round_discovered_pct": ";".join(_fmt(p) for p in self.per_round_discovered_pct),
        }

    def to_text(self, digits: int | None = None) -> str:
        out = []
        for k, v in self.as_dict().items():
            if isinstance(v, float):
                v = round(v, digits) if digits is not None else repr(v)
            out.append(f"{k}={v}")
        return "\n".join(out) + "\n"

    def to_csv(self, header: bool = True) -> str:
        d = self.as_dict()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(d.keys())
        w.writerow(repr(v) if isinstance(v, float) else v for v in d.values())
        return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(round(x, 6))


def _pct(part: int, whole: int) -> float:
    return 100.0 * part / whole if whole else 100.0


# -- paced discovery -----------------------------------------------------


def run_paced(
    t: Topology,
    plan: planner.Plan | dict[str, int],
    cfg: PacedDiscoveryConfig,
    record: bool = False,
) -> ScenarioMetrics:
    """Multicast once, then one synchronized reply burst per client.

    Every client multicasts a query at time zero. Once the last query has been
    delivered, all services answer the first client (ascending id) together,
    then the next client ``cfg.interval_s`` later, and so on. A service only
    answers clients whose query reached it.
    """
    sizes = plan.queue_sizes if isinstance(plan, planner.Plan) else plan
    heard: dict[str, set[str]] = {}
    known: dict[str, set[str]] = {}
    stats = {"dups": 0, "last_reply": 0.0, "last_query": 0.0}

    def on_deliver(sim, msg, node, now):
        if msg.kind == QUERY:
            heard.setdefault(node, set()).add(msg.src)
            stats["last_query"] = now
        elif msg.kind == REPLY:
            seen = known.setdefault(node, set())
            if msg.src in seen:
                stats["dups"] += 1
            seen.add(msg.src)
            stats["last_reply"] = now

    sim = Simulator(t, sizes, on_deliver=on_deliver, record=record)
    clients = [c.id for c in t.clients]
    services = [s.id for s in t.services]
    for c in clients:
        sim.inject(0.0, c, MULTICAST, cfg.query_bytes, QUERY)
    sim.run()
    start = stats["last_query"]

    replies = 0
    for i, c in enumerate(clients):
        when = start + i * cfg.interval_s
        for s in services:
            if c in heard.get(s, ()):
                sim.inject(when, s, c, cfg.reply_bytes, REPLY)
                replies += 1
    for flow in cfg.back_traffic:
        for j in range(flow.count):
            sim.inject(start + BACK_TRAFFIC_OFFSET_S + j * flow.period_s, flow.src, flow.dst, cfg.reply_bytes, BACK)
    trace = sim.run()

    found = sum(len(v) for v in known.values())
    return ScenarioMetrics(
        multicast_rounds=1,
        dropped=trace.dropped,
        replies_sent=replies,
        duplicates_received=stats["dups"],
        discovery_time_s=stats["last_reply"] if replies else start,
        per_round_discovered_pct=[_pct(found, len(clients) * len(services))],
        multicast_time_s=start,
        trace=trace,
    )


# -- maximum-limit baseline ----------------------------------------------


def run_max_limit(
    t: Topology,
    cfg: MaxLimitDiscoveryConfig,
    queue_sizes: dict[str, int],
    record: bool = False,
) -> ScenarioMetrics:
    """Repeated multicast discovery with a fixed listening window.

    Each query lists the services its client already knows; listed services
    stay silent, the rest reply at once. Every ``cfg.timeout_s`` all clients
    query again, until a window passes in which no client receives any reply.
    That final window is the confirmation round and is counted.
    """
    clients = [c.id for c in t.clients]
    services = [s.id for s in t.services]
    known = {c: set() for c in clients}
    state = {"rounds": 0, "heard": 0}
    pct: list[float] = []
    stats = {"dups": 0, "replies": 0}
    total = len(clients) * len(services)

    def on_deliver(sim, msg, node, now):
        if msg.kind == QUERY:
            if node not in msg.payload:
                sim.inject(now, node, msg.src, cfg.reply_bytes, REPLY)
                stats["replies"] += 1
        elif msg.kind == REPLY:
            state["heard"] += 1
            if msg.src in known[node]:
                stats["dups"] += 1
            else:
                known[node].add(msg.src)

    def tick(sim, now):
        if state["rounds"]:
            pct.append(_pct(sum(len(v) for v in known.values()), total))
            if state["heard"] == 0:
                return
        if state["rounds"] >= cfg.round_cap:
            raise ProtocolError(f"still discovering after {cfg.round_cap} rounds")
        state["rounds"] += 1
        state["heard"] = 0
        for c in clients:
            sim.inject(now, c, MULTICAST, cfg.query_bytes, QUERY, frozenset(known[c]))
        sim.at(now + cfg.timeout_s, tick)

    sim = Simulator(t, queue_sizes, on_deliver=on_deliver, record=record)
    sim.at(0.0, tick)
    trace = sim.run()
    n_rounds = state["rounds"]
    return ScenarioMetrics(
        multicast_rounds=n_rounds,
        dropped=trace.dropped,
        replies_sent=stats["replies"],
        duplicates_received=stats["dups"],
        discovery_time_s=round(n_rounds * cfg.timeout_s, 12),
        per_round_discovered_pct=pct,
        trace=trace,
    )


# -- oracle --------------------------------------------------------------


def _drops_at(t, sizes, interval, reply_bytes, back_traffic=()) -> int:
    cfg = PacedDiscoveryConfig(interval, reply_bytes, back_traffic=list(back_traffic))
    return run_paced(t, sizes, cfg).dropped


def drain_time(t: Topology, p: planner.MessageParams) -> float:
    """Time for every reply of one burst to cross the slowest link in series."""
    hops = max(len(t.routers), 1) + 1
    return (len(t.services) + hops) * planner.message_time(p) * 2


def min_zero_drop_interval(
    t: Topology,
    queue_sizes: dict[str, int],
    p: planner.MessageParams | None = None,
    back_traffic: list[BackTraffic] = (),
) -> float:
    """Smallest interval on a TSoM/4 grid for which paced discovery drops nothing.

    Brackets by doubling, then bisects on the grid, relying on drops being
    non-increasing in the interval. Returns ``math.inf`` when even a spacing
    that lets every burst drain completely still loses messages, since no
    interval can then help.
    """
    p = p or planner.MessageParams.from_topology(t)
    reply_bytes = p.message_bytes
    step = planner.message_time(p) / 4

    def ok(k: int) -> bool:
        return _drops_at(t, queue_sizes, k * step, reply_bytes, back_traffic) == 0

    if ok(0):
        return 0.0
    limit = math.ceil(drain_time(t, p) / step)
    hi = 1
    while not ok(hi):
        if hi >= limit:
            return math.inf
        hi = min(hi * 2, limit)
    lo = hi // 2  # known to drop (or zero, which dropped above)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return round(hi * step, 12)


# -- comparison table ----------------------------------------------------


def compare(
    t: Topology,
    plan: planner.Plan,
    timeouts: tuple[float, ...] = (0.15, 0.1, 0.05),
    reply_bytes: int = DEFAULT_MESSAGE_BYTES,
) -> list[tuple[str, ScenarioMetrics]]:
    rows = [("algorithm", run_paced(t, plan, PacedDiscoveryConfig(plan.best_interval_s, reply_bytes)))]
    for timeout in timeouts:
        m = run_max_limit(t, MaxLimitDiscoveryConfig(timeout, reply_bytes), plan.queue_sizes)
        rows.append((f"max-limit {timeout:g}s", m))
    return rows


def format_comparison(rows: list[tuple[str, ScenarioMetrics]], digits: int = 3) -> str:
    fields = [
        ("discovery messages", lambda m: str(m.multicast_rounds)),
        ("dropped messages", lambda m: str(m.dropped)),
        ("replies sent", lambda m: str(m.replies_sent)),
        ("duplicates received", lambda m: str(m.duplicates_received)),
        ("discovery time (s)", lambda m: f"{m.discovery_time_s:.{digits}f}"),
        ("discovered per round (%)", lambda m: " ".join(f"{p:g}" for p in (round(x, 1) for x in m.per_round_discovered_pct))),
    ]
    table = [[""] + [name for name, _ in rows]]
    for label, get in fields:
        table.append([label] + [get(m) for _, m in rows])
    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table) + "\n"
