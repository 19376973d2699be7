"""Sending-queue sizes and the best inter-burst interval for a topology.

All interval arithmetic is done in whole message times ("slots") and scaled by
the time to send one message (TSoM) at the end, so intervals computed with a
fixed rounding step are exact multiples of that step.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import simulator
from .topology import (
    CLIENT,
    SERVICE,
    Decentralized,
    EndNode,
    Link,
    Topology,
    TopologyError,
    build,
    leaf_routers,
    longest_client_service_path,
    split_parts,
)


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class MessageParams:
    """Message size and link rate; ``tsom_round`` is None for exact times or a step in seconds."""

    message_bytes: int
    bandwidth_bps: float
    tsom_round: float | None = None

    def __post_init__(self):
        if self.message_bytes <= 0:
            raise ValueError("message_bytes must be positive")
        if not self.bandwidth_bps > 0:
            raise ValueError("bandwidth_bps must be positive")
        if self.tsom_round is not None and not self.tsom_round > 0:
            raise ValueError("rounding step must be positive")

    @classmethod
    def from_topology(cls, t: Topology, tsom_round: float | None = None) -> "MessageParams":
        """Average service message size and average link bandwidth of ``t``."""
        sizes = [s.message_bytes for s in t.services] or [1]
        bws = [l.bandwidth_bps for l in t.links] or [1.0]
        return cls(round(float(np.mean(sizes))), float(np.mean(bws)), tsom_round)


def round_up(x: float, step: float | None) -> float:
    if step is None:
        return x
    # 1e-9 absorbs float noise so an exact multiple stays put
    return math.ceil(x / step - 1e-9) * step


def message_time(p: MessageParams) -> float:
    return round_up(p.message_bytes * 8 / p.bandwidth_bps, p.tsom_round)


def largest_message_time(t: Topology, p: MessageParams) -> float:
    """Longest single-message link time: the nominal TSoM or the worst service/link pair."""
    tj = message_time(p)
    if t.services and t.links:
        worst = max(s.message_bytes for s in t.services) * 8 / min(l.bandwidth_bps for l in t.links)
        tj = max(tj, round_up(worst, p.tsom_round))
    return tj


@dataclass
class Plan:
    configuration: str
    queue_sizes: dict[str, int]
    candidates: list[str]
    chosen: str
    overlap_space: int
    gap_slots: int
    best_interval_s: float
    tsom_s: float
    largest_message_s: float
    candidate_intervals: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)

    @property
    def interval_tsom(self) -> float:
        """Best interval in units of TSoM."""
        return round(self.best_interval_s / self.tsom_s, 9)

    def as_dict(self) -> dict[str, object]:
        d: dict[str, object] = {
            "configuration": self.configuration,
            "candidates": ",".join(self.candidates),
            "chosen": self.chosen,
            "overlap_space": self.overlap_space,
            "gap_slots": self.gap_slots,
            "tsom": self.tsom_s,
            "largest_message_time": self.largest_message_s,
            "best_interval": self.best_interval_s,
            "best_interval_tsom": self.interval_tsom,
        }
        for r in sorted(self.queue_sizes):
            d[f"queue[{r}]"] = self.queue_sizes[r]
        for r in sorted(self.candidate_intervals):
            d[f"candidate_interval[{r}]"] = self.candidate_intervals[r]
        for k in sorted(self.diagnostics):
            d[k] = self.diagnostics[k]
        return d

    def to_text(self, digits: int | None = None) -> str:
        lines = []
        for k, v in self.as_dict().items():
            if isinstance(v, float):
                v = round(v, digits) if digits is not None else repr(v)
            lines.append(f"{k}={v}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        d = self.as_dict()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(d.keys())
        w.writerow(repr(v) if isinstance(v, float) else v for v in d.values())
        return buf.getvalue()


# -- queue sizes ---------------------------------------------------------


def queue_sizes_decentralized(t: Topology) -> dict[str, int]:
    if t.is_centralized:
        raise PlanError("topology is centralized")
    sizes = {}
    for r in t.routers:
        c, s = t.n_clients(r), t.n_services(r)
        if c == 0 and s == 0:
            sizes[r] = 2
        elif c == 0:
            sizes[r] = s + 2
        else:
            sizes[r] = c + s + 1
    return sizes


def _root_queue_literal(t: Topology) -> int:
    n = len(t.services)
    largest = max(t.n_services(r) for r in t.routers)
    return max(1, n - largest - (largest - 1))


def queue_sizes_centralized(t: Topology) -> dict[str, int]:
    """Root and leaf sending-queue sizes for a star.

    The root must hold every burst crossing it toward a client router minus
    what it forwards while the biggest source router is still emitting. The
    burst excludes the receiving router's own services; when that router
    hosts the most services this is ``n - RLargeSn - (RLargeSn - 1)``.
    """
    if not t.is_centralized:
        raise PlanError("topology is decentralized")
    n = len(t.services)
    if n == 0:
        raise PlanError("centralized queue sizing needs at least one service")
    root = t.root
    leaves = [r for r in t.routers if r != root]
    receivers = [r for r in leaves if t.n_clients(r)] or leaves
    root_size = 1
    for r in receivers:
        crossing = n - t.n_services(r)
        biggest_source = max((t.n_services(x) for x in leaves if x != r), default=0)
        root_size = max(root_size, crossing - max(0, biggest_source - 1))
    sizes = {r: t.n_clients(r) + t.n_services(r) for r in leaves}
    sizes[root] = root_size
    return sizes


def queue_sizes(t: Topology) -> dict[str, int]:
    return queue_sizes_centralized(t) if t.is_centralized else queue_sizes_decentralized(t)


def burst_floor(t: Topology, p: MessageParams | None = None) -> dict[str, int]:
    """Most messages each router ever holds when nothing is dropped.

    Replays the discovery workload with unbounded queues: every client
    multicasts at once, then each client's reply burst runs on an otherwise
    idle network. Where branches merge, or many clients query together, this
    can exceed what the per-router rules provide.
    """
    p = p or MessageParams.from_topology(t)
    sim = simulator.Simulator(t, {r: 10**9 for r in t.routers}, record=False, arrivals_first=True)
    for c in t.clients:
        sim.inject(0.0, c.id, simulator.MULTICAST, p.message_bytes, simulator.QUERY)
    sim.run()
    for c in t.clients:
        for s in t.services:
            sim.inject(sim.now, s.id, c.id, s.message_bytes, simulator.REPLY)
        trace = sim.run()
    if not t.clients:
        trace = sim.run()
    peaks = simulator.peak_occupancy(trace)
    return {r: peaks.get(r, 0) for r in t.routers}


def _with_floor(t: Topology, rule: dict[str, int], p: MessageParams) -> tuple[dict[str, int], dict[str, float]]:
    floor = burst_floor(t, p)
    sizes = {r: max(rule[r], floor[r]) for r in rule}
    raised = {f"rule_queue[{r}]": rule[r] for r in sorted(rule) if sizes[r] > rule[r]}
    return sizes, raised


# -- candidate routers ---------------------------------------------------


def _client_routers(t: Topology) -> list[str]:
    return sorted({c.attached_to for c in t.clients})


def _nearest(t: Topology, router: str, pool: list[str]) -> list[str]:
    dist = t.router_distances(router)
    others = [r for r in pool if r != router]
    if not others:
        return []
    best = min(dist[r] for r in others)
    return [r for r in others if dist[r] == best]


def candidate_routers_decentralized(t: Topology) -> list[str]:
    """Routers whose local load bounds the network-wide interval.

    Ties are kept rather than broken, so the candidate set (and the interval
    derived from it) does not depend on how routers are named.
    """
    if t.is_centralized:
        raise PlanError("topology is centralized")
    holders = _client_routers(t)
    if not holders:
        raise PlanError("no clients to plan for")
    chosen: set[str] = set()

    # longest service-to-client path
    if t.services:
        _, _, longest = longest_client_service_path(t)
        service_routers = {s.attached_to for s in t.services}
        for r in holders:
            dist = t.router_distances(r)
            if max(dist[s] for s in service_routers) == longest:
                chosen.add(r)

    # most clients, then most services arriving from one side
    most = max(t.n_clients(r) for r in holders)
    busiest = [r for r in holders if t.n_clients(r) == most]
    side = {r: split_parts(t, r)[0] for r in busiest}
    chosen.update(r for r in busiest if side[r] == max(side.values()))

    # client routers closest to an end of the network
    ends = leaf_routers(t)
    to_end = {r: min(t.router_distances(r)[e] for e in ends) for r in holders}
    chosen.update(r for r in holders if to_end[r] == min(to_end.values()))

    # a lone client is compared against the next client router
    for r in sorted(chosen):
        if t.n_clients(r) == 1:
            chosen.update(_nearest(t, r, holders))
    return sorted(chosen)


def candidate_routers_centralized(t: Topology) -> list[str]:
    if not t.is_centralized:
        raise PlanError("topology is decentralized")
    holders = [r for r in _client_routers(t) if r != t.root]
    if not holders:
        raise PlanError("no clients to plan for")
    n = len(t.services)
    most = max(t.n_clients(r) for r in holders)
    busiest = [r for r in holders if t.n_clients(r) == most]
    received = {r: n - t.n_services(r) for r in busiest}
    chosen = {r for r in busiest if received[r] == max(received.values())}
    for r in sorted(chosen):
        if t.n_clients(r) == 1:
            pairs = [x for x in holders if t.n_clients(x) >= 2]
            chosen.update(_nearest(t, r, pairs) or _nearest(t, r, holders))
    return sorted(chosen)


def candidate_routers(t: Topology) -> list[str]:
    return candidate_routers_centralized(t) if t.is_centralized else candidate_routers_decentralized(t)


# -- overlap space and gaps ----------------------------------------------


def larger_side_neighbor(t: Topology, router: str) -> str | None:
    """Neighbor router lying in the component that carries the most services."""
    best = None
    for comp in t.components_without(router):
        load = sum(t.n_services(r) for r in comp)
        nb = min(r for r in t.router_neighbors(router) if r in comp)
        if best is None or load > best[0] or (load == best[0] and nb < best[1]):
            best = (load, nb)
    return best[1] if best else None


def overlap_space(t: Topology, chosen: str, sizes: dict[str, int] | None = None) -> int:
    """Queue slots at the busier neighbor that each client's burst may overlap into."""
    clients = t.n_clients(chosen)
    if clients == 0:
        raise PlanError(f"router {chosen} has no clients")
    nb = larger_side_neighbor(t, chosen)
    if nb is None:
        return 0
    # a neighbor that also merges another branch has no slack to lend
    if len(t.router_neighbors(nb)) > 2:
        return 0
    sizes = sizes if sizes is not None else queue_sizes(t)
    return max(0, (sizes[nb] - t.n_services(nb)) // clients)


def _unit_topology(t: Topology) -> Topology:
    """Same shape with every message taking exactly one time unit on every link."""
    nodes = [EndNode(n.id, n.kind, n.attached_to, 1 if n.kind == SERVICE else 0) for n in t.end_nodes]
    links = [Link(l.a, l.b, 8.0, 0.0) for l in t.links]
    return build(t.routers, nodes, links, t.configuration)


def gap_slots(t: Topology, chosen: str, p: MessageParams | None = None) -> int:
    """Idle message slots at ``chosen`` while one burst fills the pipeline.

    Every service sends one message at time zero toward a client of
    ``chosen`` on a network where each hop takes one slot and queues are
    unbounded. Slots are counted from the first (when directly attached
    services reach their routers) to the last slot in which a message arrives
    from a neighboring router; the gaps are the slots with no such arrival.
    ``p`` is accepted for interface symmetry: the dry run is unit-timed.
    """
    if chosen not in t.routers:
        raise PlanError(f"unknown router {chosen}")
    clients = t.attached(chosen, CLIENT)
    if not clients or not t.services:
        return 0
    unit = _unit_topology(t)
    big = {r: 10**9 for r in unit.routers}
    workload = [simulator.Injection(0.0, s.id, clients[0].id, 1) for s in unit.services]
    trace = simulator.run(unit, workload, big)
    slots = set()
    for e in trace.events:
        if e.kind == "begin_transmit":
            src, dst = e.location.split("->")
            if dst == chosen and unit.is_router(src):
                slots.add(round(e.time_s) + 1)
    if not slots:
        return 0
    return max(slots) - len(slots)


# -- best interval -------------------------------------------------------


def _evaluated(t: Topology, candidates: list[str]) -> list[str]:
    # the rules name the likely bottleneck, but every client router is checked
    return sorted(set(candidates) | {r for r in _client_routers(t) if r != t.root})


def _pick(intervals: dict[str, float]) -> str:
    top = max(intervals.values())
    return min(r for r, v in intervals.items() if v == top)


def _finish(x: float) -> float:
    return round(max(0.0, x), 12)


def best_interval_decentralized(t: Topology, p: MessageParams | None = None) -> Plan:
    if t.is_centralized:
        raise PlanError("topology is centralized")
    p = p or MessageParams.from_topology(t)
    rule = queue_sizes_decentralized(t)
    sizes, raised = _with_floor(t, rule, p)
    candidates = candidate_routers_decentralized(t)
    tsom = message_time(p)
    tj = largest_message_time(t, p)
    per, detail = {}, {}
    for r in _evaluated(t, candidates):
        large = split_parts(t, r)[0]
        gaps = gap_slots(t, r, p)
        # overlap comes from the rule sizes; any extra room is headroom only
        os_ = overlap_space(t, r, rule)
        per[r] = _finish((large + gaps - os_) * tsom - tj)
        detail[r] = (large, gaps, os_)
    chosen = _pick(per)
    large, gaps, os_ = detail[chosen]
    return Plan(
        configuration="decentralized",
        queue_sizes=sizes,
        candidates=candidates,
        chosen=chosen,
        overlap_space=os_,
        gap_slots=gaps,
        best_interval_s=per[chosen],
        tsom_s=tsom,
        largest_message_s=tj,
        candidate_intervals=per,
        diagnostics={"large": large, **raised},
    )


def best_interval_centralized(t: Topology, p: MessageParams | None = None) -> Plan:
    if not t.is_centralized:
        raise PlanError("topology is decentralized")
    p = p or MessageParams.from_topology(t)
    sizes, raised = _with_floor(t, queue_sizes_centralized(t), p)
    candidates = candidate_routers_centralized(t)
    tsom = message_time(p)
    tj = largest_message_time(t, p)
    n = len(t.services)
    per, gaps_of = {}, {}
    for r in _evaluated(t, candidates):
        gaps_of[r] = gap_slots(t, r, p)
        per[r] = _finish((n + gaps_of[r] - t.n_services(r)) * tsom - tj)
    chosen = _pick(per)
    largest_sources = max(t.n_services(r) for r in t.routers)
    return Plan(
        configuration="centralized",
        queue_sizes=sizes,
        candidates=candidates,
        chosen=chosen,
        # the receiver's own services play the overlap role in a star
        overlap_space=t.n_services(chosen),
        gap_slots=gaps_of[chosen],
        best_interval_s=per[chosen],
        tsom_s=tsom,
        largest_message_s=tj,
        candidate_intervals=per,
        diagnostics={
            "services_total": n,
            "receiver_services": t.n_services(chosen),
            "root_queue_literal": _root_queue_literal(t),
            "root_fill_time": round(tj + largest_sources * tsom, 12),
            **raised,
        },
    )


def plan(t: Topology, p: MessageParams | None = None) -> Plan:
    if not t.clients:
        raise PlanError("no clients to plan for")
    if t.is_centralized:
        return best_interval_centralized(t, p)
    return best_interval_decentralized(t, p)


# -- synthetic networks and the size/interval table ---------------------


def chain_topology(
    n_routers: int,
    clients_per_router: int,
    services_per_router: int,
    message_bytes: int = 128,
    bandwidth_bps: float = 512 * 1024,
    delay_s: float = 0.0,
) -> Topology:
    """Routers in a line, each with the same number of clients and services."""
    if n_routers < 1:
        raise TopologyError("need at least one router")
    width = len(str(n_routers - 1))
    routers = [f"R{i:0{width}d}" for i in range(n_routers)]
    nodes = []
    for i, r in enumerate(routers):
        nodes += [EndNode(f"C{i:0{width}d}_{j:02d}", CLIENT, r) for j in range(clients_per_router)]
        nodes += [EndNode(f"S{i:0{width}d}_{j:02d}", SERVICE, r, message_bytes) for j in range(services_per_router)]
    links = [Link(a, b, bandwidth_bps, delay_s) for a, b in zip(routers, routers[1:])]
    return build(routers, nodes, links, Decentralized(), bandwidth_bps, delay_s)


@dataclass
class IntervalTable:
    router_counts: list[int]
    per_router_nodes: list[int]
    values: np.ndarray  # rows: per_router_nodes, columns: router_counts, in TSoM

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["per_router"] + [f"routers_{n}" for n in self.router_counts] + ["network_size"])
        for k, row in zip(self.per_router_nodes, self.values):
            w.writerow([k] + [_num(v) for v in row] + [f"{2 * k} * router No."])
        return buf.getvalue()

    def to_text(self) -> str:
        head = ["clients&services"] + [f"{n} routers" for n in self.router_counts] + ["network size"]
        rows = [head]
        for k, row in zip(self.per_router_nodes, self.values):
            rows.append([f"{k} & {k}"] + [f"TSoM * {_num(v)}" for v in row] + [f"{2 * k} * router No."])
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def interval_table(
    router_counts: list[int], per_router_nodes: list[int], p: MessageParams | None = None
) -> IntervalTable:
    """Best interval, in TSoM, for chains with k clients and k services per router."""
    if any(n < 1 for n in router_counts) or any(k < 1 for k in per_router_nodes):
        raise PlanError("router counts and per-router node counts must be >= 1")
    values = np.zeros((len(per_router_nodes), len(router_counts)))
    for i, k in enumerate(per_router_nodes):
        for j, n in enumerate(router_counts):
            t = chain_topology(n, k, k)
            params = p or MessageParams.from_topology(t)
            result = plan(t, params)
            values[i, j] = round(result.best_interval_s / result.tsom_s, 9)
    return IntervalTable(list(router_counts), list(per_router_nodes), values)
