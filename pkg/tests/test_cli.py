import json
import subprocess
import sys

import numpy as np
import pytest

from dynclear import cli
from dynclear.io import (InstanceFormatError, bundled_instances, instance_to_dict, load_schedule,
                         parse_instance, resolve_path)
from dynclear.lp import ITERATION_LIMIT, LpSolution
from dynclear.network import DynamicInstance, InvalidInstanceError, StaticInstance, loss


def run(*argv):
    return cli.main([str(a) for a in argv])


def write(tmp_path, doc, name="inst.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return p


def read_report(out):
    return json.loads((out / "report.json").read_text())


class TestParsing:
    def test_bundled(self):
        assert set(bundled_instances()) >= {"en5_nominal", "en5_shock", "en5_dynamic", "counterexample4"}

    def test_examples_prefix_resolves_to_bundled(self):
        assert resolve_path("examples/en5_shock.json").name == "en5_shock.json"

    def test_shock_is_static(self):
        inst = parse_instance("en5_shock")
        assert isinstance(inst, StaticInstance)
        assert inst.inflow.tolist() == [120, 20, 120, 200, 0] and inst.external_node == 4

    def test_chain_is_dynamic(self):
        inst = parse_instance("counterexample4")
        assert isinstance(inst, DynamicInstance) and inst.horizon == 2

    def test_round_trip(self, tmp_path):
        inst = parse_instance("en5_dynamic")
        again = parse_instance(write(tmp_path, instance_to_dict(inst)))
        assert instance_to_dict(again) == instance_to_dict(inst)

    def test_diagonal(self, tmp_path):
        doc = {"liabilities": [[1, 0], [0, 0]], "inflows": [0, 0]}
        with pytest.raises(InvalidInstanceError, match="diagonal must be zero"):
            parse_instance(write(tmp_path, doc))

    def test_json_error_has_position(self, tmp_path):
        with pytest.raises(InstanceFormatError, match=r":2:\d+"):
            parse_instance(write(tmp_path, '{"n": 2,\n "liabilities": [[0, 1] [0, 0]]}'))

    @pytest.mark.parametrize("doc,msg", [
        ({"inflows": [0, 0]}, "missing field 'liabilities'"),
        ({"liabilities": [[0, 1], [0]], "inflows": [0, 0]}, "liabilities"),
        ({"liabilities": [[0, 1], [0, 0]], "inflows": [0, 0, 0]}, "expected 2"),
        ({"n": 3, "liabilities": [[0, 1], [0, 0]], "inflows": [0, 0]}, "expected \\(3, 3\\)"),
        ({"liabilities": [[0, 1], [0, 0]], "inflows": [[0, 0], [1, 1]], "horizon": 3}, "horizon"),
    ])
    def test_format_errors(self, tmp_path, doc, msg):
        with pytest.raises(InstanceFormatError, match=msg):
            parse_instance(write(tmp_path, doc))

    @pytest.mark.parametrize("field,value", [("alpha", 0.5), ("eta", 1.0)])
    def test_parameter_errors(self, tmp_path, field, value):
        doc = {"liabilities": [[0, 1], [0, 0]], "inflows": [[1, 0]], field: value}
        with pytest.raises(InvalidInstanceError, match=field):
            parse_instance(write(tmp_path, doc))


class TestCommands:
    def test_static_prorata(self, tmp_path, capsys):
        assert run("clear", "static", "--mode", "prorata", "examples/en5_shock.json", "--out", tmp_path) == 0
        assert "total unpaid: 53.66" in capsys.readouterr().out
        rep = read_report(tmp_path)
        assert rep["default_set"] == [0, 1, 2, 3]
        assert (tmp_path / "report.txt").exists()

    def test_static_matrix(self, tmp_path):
        assert run("clear", "static", "en5_shock", "--out", tmp_path) == 0
        assert read_report(tmp_path)["total_unpaid"] == pytest.approx(20)

    def test_static_fda(self, tmp_path):
        assert run("clear", "static", "--mode", "prorata", "--method", "fda", "en5_shock",
                   "--out", tmp_path) == 0
        assert read_report(tmp_path)["total_unpaid"] == pytest.approx(53.66, abs=0.005)

    def test_fda_needs_prorata(self):
        with pytest.raises(SystemExit) as exc:
            run("clear", "static", "--method", "fda", "en5_shock")
        assert exc.value.code == 2

    def test_dynamic_matrix(self, tmp_path, capsys):
        code = run("clear", "dynamic", "--mode", "matrix", "--alpha", "1.01", "--horizon", "3",
                   "examples/en5_dynamic.json", "--out", tmp_path)
        assert code == 0
        assert "total unpaid at T: 10.51" in capsys.readouterr().out
        rep = read_report(tmp_path)
        assert rep["default_set"] == [2]
        assert rep["residual"][2][4] == pytest.approx(10.51, abs=0.005)

    @pytest.mark.parametrize("method", ["full", "sequential", "fda"])
    def test_dynamic_prorata(self, tmp_path, method):
        assert run("clear", "dynamic", "--mode", "prorata", "--method", method, "en5_dynamic",
                   "--out", tmp_path) == 0
        assert read_report(tmp_path)["total_unpaid"] == pytest.approx(21.07, abs=0.005)

    def test_horizon_padding(self, tmp_path):
        assert run("clear", "dynamic", "--horizon", "5", "en5_dynamic", "--out", tmp_path) == 0
        sched = json.loads((tmp_path / "schedule.json").read_text())
        assert sched["horizon"] == 5 and len(sched["payments"]) == 5

    def test_round_trip_validate(self, tmp_path, capsys):
        assert run("clear", "dynamic", "en5_dynamic", "--out", tmp_path / "a") == 0
        first = read_report(tmp_path / "a")
        assert run("validate", "en5_dynamic", "--schedule", tmp_path / "a" / "schedule.json",
                   "--out", tmp_path / "b") == 0
        second = read_report(tmp_path / "b")
        assert abs(second["loss"] - first["loss"]) <= 1e-9
        sched = load_schedule(tmp_path / "a" / "schedule.json", parse_instance("en5_dynamic"))
        assert abs(loss(sched) - first["loss"]) <= 1e-9

    def test_validate_reports_failure(self, tmp_path, capsys):
        doc = {"mode": "matrix", "payments": np.zeros((3, 5, 5)).tolist(), "alpha": 1.01}
        code = run("validate", "en5_dynamic", "--schedule", write(tmp_path, doc, "zero.json"))
        assert code == 4
        assert "priority     FAIL" in capsys.readouterr().out

    def test_analyze_graph(self, tmp_path):
        assert run("analyze-graph", "en5_shock", "--out", tmp_path) == 0
        rep = read_report(tmp_path)
        assert rep["unique_reachable_sink_node"] is True
        assert [c["nodes"] for c in rep["components"]] == [[0, 1, 2, 3], [4]]

    def test_compare(self, capsys):
        assert run("compare", "counterexample4") == 0
        out = capsys.readouterr().out
        assert "dynamic-matrix" in out and "sequential-matrix" in out

    def test_missing_file(self, capsys):
        assert run("clear", "static", "no/such/file.json") == 2
        assert "no such file" in capsys.readouterr().err

    def test_bad_instance(self, tmp_path, capsys):
        p = write(tmp_path, {"liabilities": [[1, 0], [0, 0]], "inflows": [0, 0]})
        assert run("clear", "static", p) == 2
        assert "diagonal must be zero" in capsys.readouterr().err

    def test_solver_failure(self, monkeypatch, capsys):
        from dynclear import lp
        monkeypatch.setattr(lp, "solve", lambda prog, options=None: LpSolution(ITERATION_LIMIT, None, np.nan, 0))
        assert run("clear", "static", "en5_shock") == 3
        assert "iteration_limit" in capsys.readouterr().err

    def test_deterministic_bytes(self, tmp_path):
        for d in ("x", "y"):
            assert run("clear", "dynamic", "en5_dynamic", "--no-timestamp", "--out", tmp_path / d) == 0
        for name in ("report.json", "report.txt", "schedule.json"):
            assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
        assert "created" not in read_report(tmp_path / "x")

    def test_timestamp_by_default(self, tmp_path):
        run("clear", "static", "en5_nominal", "--out", tmp_path)
        assert "created" in read_report(tmp_path)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dynclear", "clear", "static", "en5_nominal"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "total unpaid: 0.00" in res.stdout
