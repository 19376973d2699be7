"""Network model, its line-based file format, and graph queries used by the planner.

File format, one declaration per line (``#`` starts a comment)::

    config decentralized | config centralized root <RouterId>
    router <RouterId>
    link <IdA> <IdB> <bandwidth_bps> <delay_s>
    client <NodeId> <RouterId>
    service <NodeId> <RouterId> <message_bytes>

End nodes without an explicit ``link`` line get an access link to their router
with the parameters of the first declared link (or :data:`DEFAULT_BANDWIDTH_BPS`
and zero delay when the file declares none).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

DEFAULT_BANDWIDTH_BPS = 512 * 1024
DEFAULT_DELAY_S = 0.0

CLIENT = "client"
SERVICE = "service"


class TopologyError(ValueError):
    """Raised for malformed topology files or violated topology invariants."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class EndNode:
    id: str
    kind: str
    attached_to: str
    message_bytes: int = 0


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    bandwidth_bps: float
    delay_s: float = 0.0

    def key(self) -> frozenset:
        return frozenset((self.a, self.b))

    def other(self, node: str) -> str:
        return self.b if node == self.a else self.a


@dataclass(frozen=True)
class Decentralized:
    pass


@dataclass(frozen=True)
class Centralized:
    root: str


@dataclass(frozen=True)
class Topology:
    routers: tuple[str, ...]
    end_nodes: tuple[EndNode, ...]
    links: tuple[Link, ...]
    configuration: Decentralized | Centralized
    _adj: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _router_set: frozenset = field(default=None, init=False, repr=False, compare=False, hash=False)
    _by_router: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        adj: dict[str, dict[str, Link]] = {n: {} for n in self.node_ids()}
        for link in self.links:
            adj.setdefault(link.a, {})[link.b] = link
            adj.setdefault(link.b, {})[link.a] = link
        by_router: dict[str, list[EndNode]] = {}
        for n in sorted(self.end_nodes, key=lambda n: n.id):
            by_router.setdefault(n.attached_to, []).append(n)
        object.__setattr__(self, "_adj", adj)
        object.__setattr__(self, "_router_set", frozenset(self.routers))
        object.__setattr__(self, "_by_router", by_router)

    # -- basic accessors -------------------------------------------------

    @property
    def is_centralized(self) -> bool:
        return isinstance(self.configuration, Centralized)

    @property
    def root(self) -> str | None:
        return self.configuration.root if self.is_centralized else None

    def node_ids(self) -> list[str]:
        return list(self.routers) + [n.id for n in self.end_nodes]

    def node(self, node_id: str) -> EndNode:
        for n in self.end_nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def is_router(self, node_id: str) -> bool:
        return node_id in self._router_set

    @property
    def clients(self) -> list[EndNode]:
        return sorted((n for n in self.end_nodes if n.kind == CLIENT), key=lambda n: n.id)

    @property
    def services(self) -> list[EndNode]:
        return sorted((n for n in self.end_nodes if n.kind == SERVICE), key=lambda n: n.id)

    def attached(self, router: str, kind: str | None = None) -> list[EndNode]:
        return [n for n in self._by_router.get(router, ()) if kind is None or n.kind == kind]

    def n_clients(self, router: str) -> int:
        return len(self.attached(router, CLIENT))

    def n_services(self, router: str) -> int:
        return len(self.attached(router, SERVICE))

    def neighbors(self, node_id: str) -> dict[str, Link]:
        return self._adj[node_id]

    def router_neighbors(self, router: str) -> list[str]:
        return sorted(n for n in self._adj[router] if n in self._router_set)

    def link_between(self, a: str, b: str) -> Link:
        return self._adj[a][b]

    # -- router graph queries -------------------------------------------

    def router_distances(self, source: str) -> dict[str, int]:
        """Hop counts from ``source`` to every router over router-router links."""
        dist = {source: 0}
        queue = deque([source])
        while queue:
            r = queue.popleft()
            for nb in self.router_neighbors(r):
                if nb not in dist:
                    dist[nb] = dist[r] + 1
                    queue.append(nb)
        return dist

    def components_without(self, router: str) -> list[set[str]]:
        """Connected router components left after deleting ``router``."""
        seen = {router}
        parts = []
        for start in self.router_neighbors(router):
            if start in seen:
                continue
            comp = {start}
            seen.add(start)
            queue = deque([start])
            while queue:
                r = queue.popleft()
                for nb in self.router_neighbors(r):
                    if nb not in seen:
                        seen.add(nb)
                        comp.add(nb)
                        queue.append(nb)
            parts.append(comp)
        return parts


def _is_acyclic(routers: Iterable[str], router_links: list[Link]) -> bool:
    """True when the router graph has no cycle (union-find)."""
    parent = {r: r for r in routers}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for link in router_links:
        ra, rb = find(link.a), find(link.b)
        if ra == rb:
            return False
        parent[ra] = rb
    return True


def validate(t: Topology) -> None:
    routers = set(t.routers)
    ids = t.node_ids()
    if len(ids) != len(set(ids)):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise TopologyError(f"duplicate id {dup[0]}")
    if not routers:
        raise TopologyError("topology has no routers")
    for n in t.end_nodes:
        if n.attached_to not in routers:
            raise TopologyError(f"{n.kind} {n.id} attached to unknown router {n.attached_to}")
        if n.kind == SERVICE and n.message_bytes <= 0:
            raise TopologyError(f"service {n.id} must have positive message_bytes")
    seen = set()
    all_ids = set(ids)
    for link in t.links:
        for end in (link.a, link.b):
            if end not in all_ids:
                raise TopologyError(f"link endpoint {end} is unknown")
        if link.a == link.b:
            raise TopologyError(f"self-loop on {link.a}")
        if link.key() in seen:
            raise TopologyError(f"duplicate link {link.a} {link.b}")
        seen.add(link.key())
        if not link.bandwidth_bps > 0:
            raise TopologyError(f"link {link.a} {link.b} must have positive bandwidth")
        if link.delay_s < 0:
            raise TopologyError(f"link {link.a} {link.b} has negative delay")
    for n in t.end_nodes:
        nbs = t.neighbors(n.id)
        if set(nbs) != {n.attached_to}:
            raise TopologyError(f"{n.kind} {n.id} must link only to its router {n.attached_to}")

    router_links = [l for l in t.links if l.a in routers and l.b in routers]
    start = next(iter(sorted(routers)))
    if len(t.router_distances(start)) != len(routers):
        raise TopologyError("router graph is not connected")

    if t.is_centralized:
        root = t.root
        if root not in routers:
            raise TopologyError(f"root {root} is not a declared router")
        if t.attached(root):
            raise TopologyError("root must have no end nodes")
        for r in routers - {root}:
            if t.router_neighbors(r) != [root]:
                raise TopologyError(f"router {r} must link to the root {root} only")
    elif not _is_acyclic(routers, router_links):
        raise TopologyError("decentralized router graph must be acyclic")


def build(
    routers: Iterable[str],
    end_nodes: Iterable[EndNode],
    links: Iterable[Link],
    configuration: Decentralized | Centralized,
    access_bandwidth_bps: float | None = None,
    access_delay_s: float | None = None,
) -> Topology:
    """Assemble and validate a topology, filling in missing access links."""
    routers = tuple(routers)
    end_nodes = tuple(end_nodes)
    links = list(links)
    if access_bandwidth_bps is None:
        access_bandwidth_bps = links[0].bandwidth_bps if links else DEFAULT_BANDWIDTH_BPS
    if access_delay_s is None:
        access_delay_s = links[0].delay_s if links else DEFAULT_DELAY_S
    linked = {l.a for l in links} | {l.b for l in links}
    for n in end_nodes:
        if n.id not in linked:
            links.append(Link(n.id, n.attached_to, access_bandwidth_bps, access_delay_s))
    t = Topology(routers, end_nodes, tuple(links), configuration)
    validate(t)
    return t


def _number(token: str, what: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise TopologyError(f"{what} must be a number, got {token!r}", line) from None
    return value


def parse_topology(text: str) -> Topology:
    """Parse the line-based topology format and validate the result."""
    configuration = None
    routers: list[str] = []
    end_nodes: list[EndNode] = []
    links: list[Link] = []
    declared: dict[str, int] = {}

    def declare(node_id, lineno):
        if node_id in declared:
            raise TopologyError(f"duplicate id {node_id} (first declared on line {declared[node_id]})", lineno)
        declared[node_id] = lineno

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kw = tok[0]
        if configuration is None and kw != "config":
            raise TopologyError("the first declaration must be 'config'", lineno)
        if kw == "config":
            if configuration is not None:
                raise TopologyError("config declared twice", lineno)
            if tok[1:] == ["decentralized"]:
                configuration = Decentralized()
            elif len(tok) == 4 and tok[1] == "centralized" and tok[2] == "root":
                configuration = Centralized(tok[3])
            else:
                raise TopologyError("expected 'config decentralized' or 'config centralized root <id>'", lineno)
        elif kw == "router":
            if len(tok) != 2:
                raise TopologyError("expected 'router <id>'", lineno)
            declare(tok[1], lineno)
            routers.append(tok[1])
        elif kw == "link":
            if len(tok) != 5:
                raise TopologyError("expected 'link <a> <b> <bandwidth_bps> <delay_s>'", lineno)
            bw = _number(tok[3], "bandwidth", lineno)
            delay = _number(tok[4], "delay", lineno)
            if bw <= 0:
                raise TopologyError("bandwidth must be positive", lineno)
            if delay < 0:
                raise TopologyError("delay must be non-negative", lineno)
            links.append(Link(tok[1], tok[2], bw, delay))
        elif kw == "client":
            if len(tok) != 3:
                raise TopologyError("expected 'client <id> <router>'", lineno)
            declare(tok[1], lineno)
            end_nodes.append(EndNode(tok[1], CLIENT, tok[2]))
        elif kw == "service":
            if len(tok) != 4:
                raise TopologyError("expected 'service <id> <router> <message_bytes>'", lineno)
            declare(tok[1], lineno)
            try:
                size = int(tok[3])
            except ValueError:
                raise TopologyError(f"message_bytes must be an integer, got {tok[3]!r}", lineno) from None
            if size <= 0:
                raise TopologyError("message_bytes must be positive", lineno)
            end_nodes.append(EndNode(tok[1], SERVICE, tok[2], size))
        else:
            raise TopologyError(f"unknown declaration {kw!r}", lineno)

    if configuration is None:
        raise TopologyError("empty topology: missing 'config' line")
    return build(routers, end_nodes, links, configuration)


def load_topology(path: str | Path) -> Topology:
    return parse_topology(Path(path).read_text())


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def serialize(t: Topology) -> str:
    out = []
    if t.is_centralized:
        out.append(f"config centralized root {t.root}")
    else:
        out.append("config decentralized")
    out += [f"router {r}" for r in t.routers]
    out += [f"link {l.a} {l.b} {_fmt(l.bandwidth_bps)} {_fmt(l.delay_s)}" for l in t.links]
    for n in t.end_nodes:
        if n.kind == CLIENT:
            out.append(f"client {n.id} {n.attached_to}")
        else:
            out.append(f"service {n.id} {n.attached_to} {n.message_bytes}")
    return "\n".join(out) + "\n"


# -- queries used by the planner ----------------------------------------


def longest_client_service_path(t: Topology) -> tuple[str, str, int]:
    """Client/service pair with the most router hops between them.

    Ties go to the lexicographically smallest ``(client, service)`` pair.
    """
    clients, services = t.clients, t.services
    if not clients or not services:
        raise TopologyError("need at least one client and one service")
    dist_from = {}
    best = None
    for c in clients:
        if c.attached_to not in dist_from:
            dist_from[c.attached_to] = t.router_distances(c.attached_to)
        dist = dist_from[c.attached_to]
        for s in services:
            hops = dist[s.attached_to]
            if best is None or hops > best[2]:
                best = (c.id, s.id, hops)
    return best


def split_parts(t: Topology, router: str) -> tuple[int, int]:
    """Services on each side of ``router`` in a decentralized tree.

    With more than two components, the largest (by service count) is the
    left part and the rest are summed into the right part. Services attached
    to ``router`` itself belong to neither.
    """
    if t.is_centralized:
        raise TopologyError("split_parts applies to decentralized topologies only")
    if router not in t.routers:
        raise TopologyError(f"unknown router {router}")
    counts = sorted(
        (sum(t.n_services(r) for r in comp) for comp in t.components_without(router)),
        reverse=True,
    )
    if not counts:
        return 0, 0
    return counts[0], sum(counts[1:])


def leaf_routers(t: Topology) -> list[str]:
    return [r for r in t.routers if len(t.router_neighbors(r)) <= 1]
