import random
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discopace import fixtures
from discopace import topology as tp

from .conftest import random_tree


def bfs_hops(t, a, b):
    seen, todo = {a: 0}, deque([a])
    while todo:
        x = todo.popleft()
        for y in t.router_neighbors(x):
            if y not in seen:
                seen[y] = seen[x] + 1
                todo.append(y)
    return seen[b]


def test_minimal_file(tiny):
    assert tiny.routers == ("R0", "R1")
    assert len(tiny.end_nodes) == 2
    assert tiny.node("S").message_bytes == 128
    # access links are added with the declared link's parameters
    assert tiny.link_between("C", "R0").bandwidth_bps == 524288


def test_root_with_end_node_rejected():
    text = "config centralized root R6\nrouter R6\nrouter R0\nlink R6 R0 524288 0\nclient C R6\nservice S R0 128\n"
    with pytest.raises(tp.TopologyError, match="root must have no end nodes"):
        tp.parse_topology(text)


@pytest.mark.parametrize(
    "text, line",
    [
        ("router R0\n", 1),
        ("config decentralized\nrouter R0\nrouter R0\n", 3),
        ("config decentralized\nrouter R0\nlink R0 R1 10 0\n", None),
        ("config decentralized\nrouter R0\nservice S R0 big\n", 3),
        ("config decentralized\nrouter R0\nfrobnicate\n", 3),
        ("config decentralized\nrouter R0\nrouter R1\nlink R0 R1 -5 0\n", 4),
    ],
)
def test_syntax_errors_report_lines(text, line):
    with pytest.raises(tp.TopologyError) as err:
        tp.parse_topology(text)
    if line is not None:
        assert err.value.line == line


def test_cycle_rejected():
    text = "config decentralized\n" + "".join(f"router R{i}\n" for i in range(3))
    text += "link R0 R1 1 0\nlink R1 R2 1 0\nlink R2 R0 1 0\nclient C R0\nservice S R2 128\n"
    with pytest.raises(tp.TopologyError):
        tp.parse_topology(text)


def test_star_leaves_must_hang_off_root():
    text = "config centralized root R0\nrouter R0\nrouter R1\nrouter R2\n"
    text += "link R0 R1 1 0\nlink R1 R2 1 0\nclient C R1\nservice S R2 128\n"
    with pytest.raises(tp.TopologyError):
        tp.parse_topology(text)


def test_disconnected_rejected():
    text = "config decentralized\nrouter R0\nrouter R1\nclient C R0\nservice S R1 128\n"
    with pytest.raises(tp.TopologyError):
        tp.parse_topology(text)


def test_scenario_one_counts():
    four = fixtures.load("scenario1_chain4")
    assert (len(four.clients), len(four.services)) == (16, 80)
    five = fixtures.load("scenario1_chain")
    assert (len(five.clients), len(five.services)) == (20, 100)


def test_longest_path_cases(tiny):
    assert tiny.routers and tp.longest_client_service_path(tiny)[2] == 1
    same = tp.parse_topology("config decentralized\nrouter R0\nclient C R0\nservice S R0 128\n")
    assert tp.longest_client_service_path(same) == ("C", "S", 0)
    four = fixtures.load("scenario1_chain4")
    c, s, hops = tp.longest_client_service_path(four)
    assert hops == 3 == bfs_hops(four, four.node(c).attached_to, four.node(s).attached_to)
    star = tp.parse_topology(
        "config centralized root X\nrouter X\nrouter A\nrouter B\n"
        "link X A 1 0\nlink X B 1 0\nclient C A\nservice S B 128\n"
    )
    assert tp.longest_client_service_path(star)[2] == 2


def test_longest_path_needs_both_kinds():
    only = tp.parse_topology("config decentralized\nrouter R0\nclient C R0\n")
    with pytest.raises(tp.TopologyError):
        tp.longest_client_service_path(only)


def test_split_parts_on_chain():
    four = fixtures.load("scenario1_chain4")
    assert tp.split_parts(four, "R0") == (60, 0)
    assert tp.split_parts(four, "R1") == (40, 20)
    two = fixtures.load("scenario1_chain4")
    two = tp.build(("R0", "R1"), [n for n in two.end_nodes if n.attached_to in ("R0", "R1")],
                   [tp.Link("R0", "R1", 524288, 0)], tp.Decentralized())
    assert tp.split_parts(two, "R0") == (20, 0)
    with pytest.raises(tp.TopologyError):
        tp.split_parts(fixtures.load("scenario1_star"), "R0")


@pytest.mark.parametrize("name", fixtures.NAMES)
def test_fixture_round_trip(name):
    t = fixtures.load(name)
    assert tp.parse_topology(tp.serialize(t)) == t


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_and_split_sums(seed):
    t = random_tree(random.Random(seed))
    assert tp.parse_topology(tp.serialize(t)) == t
    if not t.is_centralized:
        for r in t.routers:
            left, right = tp.split_parts(t, r)
            assert left + right + t.n_services(r) == len(t.services)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_longest_path_ignores_router_names(seed):
    rng = random.Random(seed)
    t = random_tree(rng)
    names = list(t.routers)
    shuffled = names[:]
    rng.shuffle(shuffled)
    rename = {a: f"Z{b}" for a, b in zip(names, shuffled)}
    links = [
        tp.Link(rename.get(l.a, l.a), rename.get(l.b, l.b), l.bandwidth_bps, l.delay_s)
        for l in t.links
        if t.is_router(l.a) and t.is_router(l.b)
    ]
    nodes = [tp.EndNode(n.id, n.kind, rename[n.attached_to], n.message_bytes) for n in t.end_nodes]
    cfg = tp.Centralized(rename[t.root]) if t.is_centralized else tp.Decentralized()
    u = tp.build([rename[r] for r in names], nodes, links, cfg)
    assert tp.longest_client_service_path(u)[2] == tp.longest_client_service_path(t)[2]
