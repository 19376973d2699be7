"""Deterministic discrete-event simulator with drop-tail router queues.

Every directed link ``u->v`` is an output interface of ``u``: it transmits one
message at a time (serialization ``size * 8 / bandwidth`` followed by the
propagation delay) and buffers the rest in a FIFO. A router's sending queues
are its interfaces toward other routers; each holds at most
``queue_sizes[router]`` waiting messages, and the message being transmitted
does not take a slot. Ports facing end nodes are unbounded unless
``bound_access=True``.

Simultaneous events run in the order (time, location, message id), where the
location of an arrival is the receiving node and that of a transmission is
the interface ``u->v``. Identical inputs always produce identical traces.

With ``arrivals_first=True`` a finishing transmission first hands its
message on and only frees the link after every arrival sharing that instant
has been queued. Peaks then no longer depend on how nodes are named, which
is what a sizing dry run needs.
"""

from __future__ import annotations

import heapq
import itertools
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, NamedTuple

from .topology import CLIENT, SERVICE, Topology

MULTICAST = "*"

QUERY = "query"
REPLY = "reply"
BACK = "back"
DATA = "data"



class SimulationError(ValueError):
    pass


@dataclass
class Message:
    id: int
    src: str
    dst: str
    kind: str
    size_bytes: int
    created_s: float
    payload: Any = None


class Injection(NamedTuple):
    time_s: float
    src: str
    dst: str
    size_bytes: int
    kind: str = DATA
    payload: Any = None


class SimEvent(NamedTuple):
    time_s: float
    kind: str  # send | enqueue | begin_transmit | deliver | drop
    msg_id: int
    src: str
    dst: str
    location: str


@dataclass
class SimTrace:
    events: list[SimEvent]
    sent: int = 0
    replicated: int = 0
    absorbed: int = 0
    delivered: int = 0
    dropped: int = 0
    drops_by_location: Counter = field(default_factory=Counter)
    drops_by_router: Counter = field(default_factory=Counter)
    delivered_by_node: Counter = field(default_factory=Counter)
    interface_peaks: dict[str, int] = field(default_factory=dict)
    interface_capacity: dict[str, int | None] = field(default_factory=dict)
    interface_owner: dict[str, str] = field(default_factory=dict)
    end_time_s: float = 0.0

    def conserved(self) -> bool:
        return self.sent + self.replicated == self.delivered + self.dropped + self.absorbed

    def counters(self) -> dict[str, int]:
        return {
            "sent": self.sent,
            "replicated": self.replicated,
            "absorbed": self.absorbed,
            "delivered": self.delivered,
            "dropped": self.dropped,
        }

    def to_tsv(self) -> str:
        return "".join(
            f"{e.time_s!r}\t{e.kind}\t{e.msg_id}\t{e.src}\t{e.dst}\t{e.location}\n" for e in self.events
        )

    def summary(self) -> str:
        lines = [f"{k}={v}" for k, v in self.counters().items()]
        lines += [f"dropped[{loc}]={n}" for loc, n in sorted(self.drops_by_location.items())]
        return "\n".join(lines) + "\n"


class _Interface:
    __slots__ = ("name", "owner", "peer", "bandwidth", "delay", "capacity", "queue", "busy", "peak")

    def __init__(self, owner, peer, link, capacity):
        self.name = f"{owner}->{peer}"
        self.owner = owner
        self.peer = peer
        self.bandwidth = link.bandwidth_bps
        self.delay = link.delay_s
        self.capacity = capacity
        self.queue: deque[Message] = deque()
        self.busy = False
        self.peak = 0


class _Receiver:
    """Finite-rate end node: one message in processing plus a bounded FIFO."""

    __slots__ = ("rate", "capacity", "queue", "busy")

    def __init__(self, rate, capacity):
        self.rate = rate
        self.capacity = capacity
        self.queue: deque[Message] = deque()
        self.busy = False


DeliverHook = Callable[["Simulator", Message, str, float], None]


class Simulator:
    """Event loop over one topology.

    ``on_deliver(sim, message, node, time)`` is called whenever an end node
    accepts a message; it may inject further traffic. Timers registered with
    :meth:`at` run before network events sharing their timestamp.
    """

    def __init__(
        self,
        topology: Topology,
        queue_sizes: dict[str, int],
        node_processing: dict[str, tuple[float, int]] | None = None,
        on_deliver: DeliverHook | None = None,
        record: bool = True,
        bound_access: bool = False,
        arrivals_first: bool = False,
    ):
        missing = [r for r in topology.routers if r not in queue_sizes]
        if missing:
            raise SimulationError(f"queue_sizes missing routers {missing}")
        self.topology = topology
        self.on_deliver = on_deliver
        self.record = record
        self.arrivals_first = arrivals_first
        self.now = 0.0
        self._heap: list = []
        self._seq = itertools.count()
        self._ids = itertools.count()
        self._ifaces: dict[tuple[str, str], _Interface] = {}
        for link in topology.links:
            for u, v in ((link.a, link.b), (link.b, link.a)):
                bounded = topology.is_router(u) and (bound_access or topology.is_router(v))
                cap = queue_sizes[u] if bounded else None
                self._ifaces[u, v] = _Interface(u, v, link, cap)
        self._kind = {n.id: n.kind for n in topology.end_nodes}
        self._router_of = {n.id: n.attached_to for n in topology.end_nodes}
        self._receivers = {
            node: _Receiver(rate, cap) for node, (rate, cap) in (node_processing or {}).items()
        }
        self._next_hop = self._routing_table()
        self._service_side = self._service_branches()
        self.trace = SimTrace(events=[])
        for iface in self._ifaces.values():
            self.trace.interface_capacity[iface.name] = iface.capacity
            self.trace.interface_owner[iface.name] = iface.owner

    # -- static structure ---------------------------------------------------

    def _routing_table(self) -> dict[tuple[str, str], str]:
        """next_hop[(node, dst)] by breadth-first search from every destination."""
        table = {}
        t = self.topology
        for dst in t.node_ids():
            seen = {dst}
            frontier = deque([dst])
            while frontier:
                v = frontier.popleft()
                for u in sorted(t.neighbors(v)):
                    if u in seen:
                        continue
                    seen.add(u)
                    table[u, dst] = v
                    # end nodes never relay
                    if t.is_router(u):
                        frontier.append(u)
        return table

    def _service_branches(self) -> dict[tuple[str, str], bool]:
        """Whether any service lies beyond neighbor ``v`` as seen from router ``u``."""
        t = self.topology
        memo: dict[tuple[str, str], bool] = {}

        def beyond(u, v):
            key = (u, v)
            if key not in memo:
                if not t.is_router(v):
                    memo[key] = self._kind[v] == SERVICE
                else:
                    memo[key] = any(beyond(v, w) for w in t.neighbors(v) if w != u)
            return memo[key]

        for r in t.routers:
            for v in t.neighbors(r):
                beyond(r, v)
        return memo

    # -- scheduling ---------------------------------------------------------

    def _push(self, time, location, msg_id, action, *args, phase=1):
        if not self.arrivals_first:
            phase = 0
        heapq.heappush(self._heap, (time, phase, location, msg_id, next(self._seq), action, args))

    def inject(self, time_s: float, src: str, dst: str, size_bytes: int, kind: str = DATA, payload: Any = None):
        """Schedule ``src`` to emit a message at ``time_s``."""
        if not time_s >= 0 or time_s < self.now:
            raise SimulationError(f"injection time {time_s} is in the past or negative")
        if src not in self._kind:
            raise SimulationError(f"source {src} is not an end node")
        if dst != MULTICAST and dst not in self._kind:
            raise SimulationError(f"destination {dst} is not an end node")
        if dst == src:
            raise SimulationError("source and destination coincide")
        if size_bytes <= 0:
            raise SimulationError("message size must be positive")
        msg = Message(next(self._ids), src, dst, kind, int(size_bytes), time_s, payload)
        self._push(time_s, src, msg.id, self._do_inject, msg)
        return msg

    def at(self, time_s: float, callback: Callable[["Simulator", float], None]) -> None:
        if time_s < self.now:
            raise SimulationError("timer in the past")
        self._push(time_s, "", -1, self._fire, callback)

    def _fire(self, callback):
        callback(self, self.now)

    def _log(self, kind, msg, location):
        if self.record:
            self.trace.events.append(SimEvent(self.now, kind, msg.id, msg.src, msg.dst, location))

    # -- event handlers -----------------------------------------------------

    def _do_inject(self, msg):
        self.trace.sent += 1
        self._log("send", msg, msg.src)
        self._offer(self._ifaces[msg.src, self._router_of[msg.src]], msg)

    def _offer(self, iface: _Interface, msg: Message):
        if not iface.busy:
            self._begin(iface, msg)
        elif iface.capacity is None or len(iface.queue) < iface.capacity:
            iface.queue.append(msg)
            iface.peak = max(iface.peak, len(iface.queue))
            self._log("enqueue", msg, iface.name)
        else:
            self.trace.dropped += 1
            self.trace.drops_by_location[iface.name] += 1
            self.trace.drops_by_router[iface.owner] += 1
            self._log("drop", msg, iface.name)

    def _begin(self, iface: _Interface, msg: Message):
        iface.busy = True
        self._log("begin_transmit", msg, iface.name)
        done = self.now + msg.size_bytes * 8 / iface.bandwidth
        self._push(done, iface.name, msg.id, self._tx_done, iface, msg, phase=0)

    def _tx_done(self, iface: _Interface, msg: Message):
        self._push(self.now + iface.delay, iface.peer, msg.id, self._arrive, msg, iface.owner, iface.peer)
        if self.arrivals_first:
            self._push(self.now, iface.name, msg.id, self._link_free, iface, phase=2)
        else:
            self._link_free(iface)

    def _link_free(self, iface: _Interface):
        iface.busy = False
        if iface.queue:
            self._begin(iface, iface.queue.popleft())

    def _arrive(self, msg: Message, came_from: str, node: str):
        if node in self._kind:
            self._accept(msg, node)
            return
        if msg.dst != MULTICAST:
            nxt = self._next_hop.get((node, msg.dst))
            if nxt is None:
                raise SimulationError(f"no route from {node} to {msg.dst}")
            self._offer(self._ifaces[node, nxt], msg)
            return
        branches = [
            v for v in sorted(self.topology.neighbors(node)) if v != came_from and self._service_side[node, v]
        ]
        if not branches:
            self.trace.absorbed += 1
            return
        for i, v in enumerate(branches):
            copy = msg
            if i:
                copy = Message(next(self._ids), msg.src, msg.dst, msg.kind, msg.size_bytes, msg.created_s, msg.payload)
                self.trace.replicated += 1
            self._offer(self._ifaces[node, v], copy)

    def _accept(self, msg: Message, node: str):
        recv = self._receivers.get(node)
        if recv is not None:
            if recv.busy:
                if len(recv.queue) >= recv.capacity:
                    self.trace.dropped += 1
                    self.trace.drops_by_location[node] += 1
                    self._log("drop", msg, node)
                    return
                recv.queue.append(msg)
            else:
                recv.busy = True
                self._push(self.now + 1 / recv.rate, node, msg.id, self._proc_done, recv, node)
        self.trace.delivered += 1
        self.trace.delivered_by_node[node] += 1
        self._log("deliver", msg, node)
        if self.on_deliver is not None:
            self.on_deliver(self, msg, node, self.now)

    def _proc_done(self, recv: _Receiver, node: str):
        if recv.queue:
            msg = recv.queue.popleft()
            self._push(self.now + 1 / recv.rate, node, msg.id, self._proc_done, recv, node)
        else:
            recv.busy = False

    # -- driver -------------------------------------------------------------

    def run(self, until: float | None = None) -> SimTrace:
        """Process events until the heap is empty (or past ``until``)."""
        heap = self._heap
        while heap:
            if until is not None and heap[0][0] > until:
                break
            time, _, _, _, _, action, args = heapq.heappop(heap)
            self.now = time
            action(*args)
        self.trace.end_time_s = self.now
        for iface in self._ifaces.values():
            self.trace.interface_peaks[iface.name] = iface.peak
        return self.trace

    @property
    def idle(self) -> bool:
        return not self._heap


def run(
    topology: Topology,
    workload: Iterable[Injection | tuple],
    queue_sizes: dict[str, int],
    node_processing: dict[str, tuple[float, int]] | None = None,
    record: bool = True,
    bound_access: bool = False,
) -> SimTrace:
    """Simulate a fixed list of timed injections to quiescence."""
    sim = Simulator(topology, queue_sizes, node_processing=node_processing, record=record, bound_access=bound_access)
    for item in workload:
        try:
            inj = Injection(*item)
        except TypeError:
            raise SimulationError(f"malformed workload entry {item!r}") from None
        sim.inject(inj.time_s, inj.src, inj.dst, inj.size_bytes, inj.kind, inj.payload)
    return sim.run()


def peak_occupancy(trace: SimTrace, per_interface: bool = False) -> dict[str, int]:
    """Largest number of waiting messages observed, per router (or interface).

    Replays the event log when it was recorded; otherwise falls back to the
    peaks tracked during the run.
    """
    if trace.events or not trace.interface_peaks:
        occ: Counter = Counter()
        peaks = {name: 0 for name in trace.interface_owner}
        queued: dict[str, deque] = {}
        for e in trace.events:
            if e.kind == "enqueue":
                occ[e.location] += 1
                queued.setdefault(e.location, deque()).append(e.msg_id)
                peaks[e.location] = max(peaks.get(e.location, 0), occ[e.location])
            elif e.kind == "begin_transmit":
                q = queued.get(e.location)
                if q and q[0] == e.msg_id:
                    q.popleft()
                    occ[e.location] -= 1
    else:
        peaks = dict(trace.interface_peaks)
    if per_interface:
        return peaks
    by_router: dict[str, int] = {}
    for name, peak in peaks.items():
        owner = trace.interface_owner.get(name, name.split("->")[0])
        if trace.interface_capacity.get(name) is None:
            continue
        by_router[owner] = max(by_router.get(owner, 0), peak)
    return by_router
