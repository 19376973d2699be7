"""Command-line entry point: ``discopace <subcommand> ...``.

Every subcommand takes a topology file path or the name of a bundled
fixture. Exit status is 0 on success, 2 on bad usage and 1 when the run
itself fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys

from . import fixtures, planner, protocols, queue_analysis
from .planner import MessageParams
from .protocols import BackTraffic
from .topology import Topology, TopologyError, load_topology


class _UsageError(Exception):
    pass


def _load(name: str) -> Topology:
    if os.path.exists(name):
        return load_topology(name)
    if name in fixtures.NAMES:
        return fixtures.load(name)
    raise FileNotFoundError(f"no such topology file or fixture: {name}")


def _params(t: Topology, args) -> MessageParams:
    base = MessageParams.from_topology(t)
    return MessageParams(
        args.message_bytes or base.message_bytes,
        args.bandwidth_bps or base.bandwidth_bps,
        args.tsom_round,
    )


def _fmt(v, digits):
    if isinstance(v, float):
        if digits is not None and math.isfinite(v):
            return str(round(v, digits))
        return repr(v)
    return str(v)


def _emit(pairs: dict, args) -> str:
    if args.output == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(pairs.keys())
        w.writerow(_fmt(v, None) for v in pairs.values())
        return buf.getvalue()
    return "".join(f"{k}={_fmt(v, args.round)}\n" for k, v in pairs.items())


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _back_traffic(text: str) -> BackTraffic:
    parts = text.split(":")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("back traffic is SRC:DST:COUNT:PERIOD")
    try:
        return BackTraffic(parts[0], parts[1], int(parts[2]), float(parts[3]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad back traffic {text!r}") from None


def _queues(t: Topology, args, plan: planner.Plan) -> dict[str, int]:
    if args.queue is not None:
        return {r: args.queue for r in t.routers}
    return plan.queue_sizes


def _check_nodes(t: Topology, flows: list[BackTraffic]) -> None:
    ids = set(t.node_ids())
    for f in flows:
        for node in (f.src, f.dst):
            if node not in ids:
                raise _UsageError(f"back traffic names unknown node {node}")


# -- subcommands ---------------------------------------------------------


def cmd_plan(args) -> str:
    t = _load(args.topology)
    p = planner.plan(t, _params(t, args))
    if args.output == "csv":
        return p.to_csv()
    return p.to_text(args.round)


def cmd_analyze(args) -> str:
    case = queue_analysis.QueueAnalysisCase(args.sent, args.incoming_rate, args.processing_rate, args.queue_size)
    try:
        safe = queue_analysis.safe_receive_time(case.sent_messages, case.queue_size, case.processing_rate)
    except queue_analysis.Unsatisfiable:
        safe = math.inf
    return _emit(
        {
            "receive_time": case.receive_time,
            "processed": queue_analysis.processed_count(case.receive_time, case.processing_rate),
            "will_drop": case.will_drop,
            "min_queue_size": case.min_queue_size,
            "safe_receive_time": safe,
        },
        args,
    )


def cmd_simulate(args) -> str:
    if args.protocol == "paced" and args.timeout is not None:
        raise _UsageError("--timeout applies to the maxlimit protocol")
    if args.protocol == "maxlimit":
        if args.interval is not None:
            raise _UsageError("--interval applies to the paced protocol")
        if args.timeout is None:
            raise _UsageError("maxlimit needs --timeout")
        if args.back_traffic:
            raise _UsageError("--back-traffic applies to the paced protocol")
    t = _load(args.topology)
    _check_nodes(t, args.back_traffic)
    p = _params(t, args)
    plan = planner.plan(t, p)
    sizes = _queues(t, args, plan)
    record = args.trace is not None
    if args.protocol == "paced":
        interval = plan.best_interval_s if args.interval is None else args.interval
        cfg = protocols.PacedDiscoveryConfig(interval, p.message_bytes, p.message_bytes, list(args.back_traffic))
        m = protocols.run_paced(t, sizes, cfg, record=record)
    else:
        cfg = protocols.MaxLimitDiscoveryConfig(args.timeout, p.message_bytes, p.message_bytes, args.round_cap)
        m = protocols.run_max_limit(t, cfg, sizes, record=record)
    if record:
        with open(args.trace, "w") as fh:
            fh.write(m.trace.to_tsv())
    if args.output == "csv":
        return m.to_csv()
    return m.to_text(args.round)


def cmd_oracle(args) -> str:
    t = _load(args.topology)
    _check_nodes(t, args.back_traffic)
    p = _params(t, args)
    plan = planner.plan(t, p)
    found = protocols.min_zero_drop_interval(t, _queues(t, args, plan), p, list(args.back_traffic))
    bi = plan.best_interval_s
    if bi > 0:
        ratio = found / bi
    else:
        ratio = 0.0 if found == 0 else math.inf
    return _emit({"oracle_interval": found, "best_interval": bi, "ratio": ratio}, args)


def cmd_table1(args) -> str:
    p = None
    if args.message_bytes or args.bandwidth_bps or args.tsom_round:
        p = MessageParams(args.message_bytes or 128, args.bandwidth_bps or 512 * 1024, args.tsom_round)
    table = planner.interval_table(args.routers, args.per_router, p)
    return table.to_csv() if args.output == "csv" else table.to_text()


def cmd_compare(args) -> str:
    t = _load(args.topology)
    p = _params(t, args)
    plan = planner.plan(t, p)
    rows = protocols.compare(t, plan, tuple(args.timeouts), p.message_bytes)
    if args.output == "text":
        return protocols.format_comparison(rows, 3 if args.round is None else args.round)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(rows[0][1].as_dict())
    w.writerow(["method"] + keys)
    for label, m in rows:
        w.writerow([label] + [_fmt(v, None) for v in m.as_dict().values()])
    return buf.getvalue()


# -- argument parsing ----------------------------------------------------


def _non_negative(text: str) -> float:
    v = float(text)
    if v < 0 or math.isnan(v):
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("text", "csv"), default="text")
    common.add_argument("--round", type=int, metavar="DIGITS", help="round displayed numbers")

    msg = argparse.ArgumentParser(add_help=False)
    msg.add_argument("--message-bytes", type=_positive_int)
    msg.add_argument("--bandwidth-bps", type=_positive)
    msg.add_argument("--tsom-round", type=_positive, metavar="STEP", help="round TSoM up to a multiple of STEP")

    topo = argparse.ArgumentParser(add_help=False)
    topo.add_argument("topology", help="topology file or bundled fixture name")

    queues = argparse.ArgumentParser(add_help=False)
    q = queues.add_mutually_exclusive_group()
    q.add_argument("--queue-from-plan", action="store_true", help="use planned queue sizes (default)")
    q.add_argument("--queue", type=int, metavar="N", help="same queue size on every router")

    parser = argparse.ArgumentParser(prog="discopace", description="Paced service-discovery planning and simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("plan", parents=[topo, msg, common], help="queue sizes and best interval")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("analyze", parents=[common], help="single-receiver drop analysis")
    sp.add_argument("--sent", type=int, required=True)
    sp.add_argument("--incoming-rate", type=_positive, required=True, help="messages per second")
    sp.add_argument("--processing-rate", type=_non_negative, required=True, help="messages per second")
    sp.add_argument("--queue-size", type=int, required=True)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("simulate", parents=[topo, msg, queues, common], help="run a discovery protocol")
    sp.add_argument("--protocol", choices=("paced", "maxlimit"), default="paced")
    sp.add_argument("--interval", type=_non_negative, help="paced burst spacing (default: planned)")
    sp.add_argument("--timeout", type=_positive, help="maxlimit listening window")
    sp.add_argument("--round-cap", type=_positive_int, default=protocols.DEFAULT_ROUND_CAP)
    sp.add_argument("--back-traffic", type=_back_traffic, action="append", default=[], metavar="SRC:DST:COUNT:PERIOD")
    sp.add_argument("--trace", metavar="PATH", help="write the event trace as TSV")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("oracle", parents=[topo, msg, queues, common], help="smallest drop-free interval by search")
    sp.add_argument("--back-traffic", type=_back_traffic, action="append", default=[], metavar="SRC:DST:COUNT:PERIOD")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("table1", parents=[msg, common], help="best interval for uniform chains")
    sp.add_argument("--routers", type=_int_list, default=[8, 12, 16], metavar="LIST")
    sp.add_argument("--per-router", type=_int_list, default=list(range(1, 11)), metavar="LIST")
    sp.set_defaults(func=cmd_table1)

    sp = sub.add_parser("compare", parents=[topo, msg, common], help="paced discovery against maximum-limit runs")
    sp.add_argument("--timeouts", type=_float_list, default=[0.15, 0.1, 0.05], metavar="LIST")
    sp.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "queue", None) is not None and args.queue < 0:
        parser.error("--queue must be non-negative")
    if args.command == "table1" and (min(args.routers) < 1 or min(args.per_router) < 1):
        parser.error("--routers and --per-router values must be at least 1")
    if args.command == "compare" and min(args.timeouts) <= 0:
        parser.error("timeouts must be positive")
    try:
        out = args.func(args)
    except _UsageError as exc:
        parser.error(str(exc))
    except (OSError, TopologyError, planner.PlanError, protocols.ProtocolError, ValueError, KeyError) as exc:
        print(f"discopace: error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
