"""Burst pacing and queue sizing for service-discovery replies, with a drop-tail network simulator."""

from .planner import MessageParams, Plan, interval_table, message_time, plan
from .topology import Topology, load_topology, parse_topology, serialize

__all__ = [
    "MessageParams",
    "Plan",
    "Topology",
    "interval_table",
    "load_topology",
    "message_time",
    "parse_topology",
    "plan",
    "serialize",
]
