import random

import pytest

from discopace import topology as tp

BW = 512 * 1024


def random_tree(rng: random.Random, max_routers: int = 8, max_nodes: int = 6) -> tp.Topology:
    """A connected tree or star with at least one client and one service."""
    n = rng.randint(1, max_routers)
    routers = [f"R{i}" for i in range(n)]
    star = n >= 3 and rng.random() < 0.4
    if star:
        links = [tp.Link("R0", r, BW, 0.0) for r in routers[1:]]
        hosts = routers[1:]
    else:
        links = [tp.Link(routers[rng.randrange(i)], routers[i], BW, 0.0) for i in range(1, n)]
        hosts = routers
    nodes = []
    for r in hosts:
        for j in range(rng.randint(0, max_nodes)):
            kind = rng.choice((tp.CLIENT, tp.SERVICE))
            nodes.append(tp.EndNode(f"{r}n{j}", kind, r, 128 if kind == tp.SERVICE else 0))
    if not any(e.kind == tp.CLIENT for e in nodes):
        nodes.append(tp.EndNode("cx", tp.CLIENT, hosts[0]))
    if not any(e.kind == tp.SERVICE for e in nodes):
        nodes.append(tp.EndNode("sx", tp.SERVICE, hosts[-1], 128))
    cfg = tp.Centralized("R0") if star else tp.Decentralized()
    return tp.build(routers, nodes, links, cfg)


@pytest.fixture
def tiny():
    return tp.parse_topology(
        """
        config decentralized
        router R0
        router R1
        link R0 R1 524288 0
        client C R0
        service S R1 128
        """
    )
