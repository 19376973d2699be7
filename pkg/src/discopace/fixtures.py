"""Bundled topologies reproducing the worked scenarios."""

from __future__ import annotations

from importlib import resources

from .topology import Topology, parse_topology

NAMES = ("scenario1_chain", "scenario1_chain4", "scenario1_star", "eval_chain", "eval_star")


def fixture_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return resources.files(__package__).joinpath("data", f"{name}.topo").read_text()


def load(name: str) -> Topology:
    return parse_topology(fixture_text(name))
