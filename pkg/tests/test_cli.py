import csv
import io

import pytest

from discopace import fixtures
from discopace.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fields(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_plan_fixed_step(capsys):
    code, out, _ = run(capsys, "plan", "scenario1_chain", "--tsom-round", "0.002")
    assert code == 0
    assert fields(out)["best_interval"] == "0.158"


def test_plan_from_file(capsys, tmp_path):
    path = tmp_path / "net.topo"
    path.write_text(fixtures.fixture_text("scenario1_star"))
    code, out, _ = run(capsys, "plan", str(path), "--tsom-round", "0.002")
    assert code == 0 and fields(out)["best_interval"] == "0.162"


def test_plan_csv_round_trip(capsys):
    code, out, _ = run(capsys, "plan", "eval_star", "--tsom-round", "0.002", "--output", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["best_interval"]) == 0.042
    assert rows[0]["chosen"] == "R2"


def test_output_is_deterministic(capsys):
    args = ("simulate", "eval_star", "--protocol", "maxlimit", "--timeout", "0.1")
    assert run(capsys, *args) == run(capsys, *args)


def test_simulate_paced(capsys):
    code, out, _ = run(capsys, "simulate", "eval_chain", "--tsom-round", "0.002")
    f = fields(out)
    assert code == 0 and (f["dropped"], f["replies_sent"]) == ("0", "40")


def test_simulate_maxlimit(capsys):
    code, out, _ = run(capsys, "simulate", "eval_chain", "--protocol", "maxlimit", "--timeout", "0.05")
    f = fields(out)
    assert code == 0 and f["multicast_rounds"] == "6" and int(f["dropped"]) > 0


def test_simulate_back_traffic_and_trace(capsys, tmp_path):
    trace = tmp_path / "trace.tsv"
    code, out, _ = run(
        capsys, "simulate", "scenario1_chain", "--tsom-round", "0.002", "--interval", "0.162",
        "--back-traffic", "S0_00:C2_0:20:0.162", "--back-traffic", "S3_00:C4_0:20:0.162",
        "--trace", str(trace),
    )
    assert code == 0 and fields(out)["dropped"] == "0"
    first = trace.read_text().splitlines()[0].split("\t")
    assert len(first) == 6


def test_simulate_uniform_queue_drops(capsys):
    code, out, _ = run(capsys, "simulate", "eval_star", "--queue", "1")
    assert code == 0 and int(fields(out)["dropped"]) > 0


def test_analyze(capsys):
    code, out, _ = run(
        capsys, "analyze", "--sent", "10", "--incoming-rate", "10",
        "--processing-rate", "4.2", "--queue-size", "4",
    )
    f = fields(out)
    assert code == 0
    assert (f["receive_time"], f["will_drop"], f["min_queue_size"]) == ("1.0", "True", "5")


def test_analyze_unsatisfiable(capsys):
    code, out, _ = run(
        capsys, "analyze", "--sent", "10", "--incoming-rate", "10",
        "--processing-rate", "0", "--queue-size", "4",
    )
    assert code == 0 and fields(out)["safe_receive_time"] == "inf"


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "eval_star", "--tsom-round", "0.002")
    f = fields(out)
    assert code == 0
    assert float(f["oracle_interval"]) <= float(f["best_interval"]) == 0.042


def test_table1_defaults(capsys):
    code, out, _ = run(capsys, "table1", "--output", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 10
    assert [k for k in rows[0] if k.startswith("routers_")] == ["routers_8", "routers_12", "routers_16"]


def test_table1_custom_grid(capsys):
    code, out, _ = run(capsys, "table1", "--routers", "8", "--per-router", "1..3", "--output", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["per_router"] for r in rows] == ["1", "2", "3"]


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "eval_chain", "--timeouts", "0.15,0.05")
    assert code == 0
    assert "max-limit 0.15s" in out and "max-limit 0.05s" in out
    assert out.splitlines()[1].startswith("discovery messages")


@pytest.mark.parametrize(
    "argv",
    [
        ["table1", "--per-router", "0"],
        ["simulate", "eval_chain", "--timeout", "0.1"],
        ["simulate", "eval_chain", "--queue", "3", "--queue-from-plan"],
        ["plan"],
        ["frobnicate"],
        ["simulate", "eval_chain", "--back-traffic", "nonsense"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_runtime_errors_exit_one(capsys, tmp_path):
    code, _, err = run(capsys, "plan", str(tmp_path / "missing.topo"))
    assert code == 1 and err.startswith("discopace: error:")
    bad = tmp_path / "bad.topo"
    bad.write_text("router R0\n")
    code, _, err = run(capsys, "plan", str(bad))
    assert code == 1 and "error" in err
