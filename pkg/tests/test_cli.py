"""Command-line front end: dispatch, CSV contracts, exit codes,
idempotence."""
import json
import math

import numpy as np
import pytest

import ltipc.cli as cli
from ltipc.cli import RunManifest, _parse_values, main
from ltipc.errors import ConvergenceError
from ltipc.report import BOUND_COLUMNS


@pytest.fixture()
def memoryless_instance(tmp_path):
    doc = {"impulse": [1.0], "lambda0": 2.0, "amax": 10.0, "alpha": 3.0,
           "grid_points": 4, "tail_eps": 1e-10}
    path = tmp_path / "memoryless.json"
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture()
def isi_instance(tmp_path):
    doc = {"impulse": [0.7, 0.3], "lambda0": 2.0, "amax": 10.0, "alpha": 3.0,
           "grid_points": 3, "tail_eps": 1e-10}
    path = tmp_path / "isi.json"
    path.write_text(json.dumps(doc))
    return str(path)


def read_report(path):
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# ltipc-")
    header = lines[1].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[2:]]
    return header, rows


class TestParseValues:
    def test_comma_list(self):
        assert _parse_values("1,2.5,4") == (1.0, 2.5, 4.0)

    def test_range(self):
        assert _parse_values("1..4") == (1.0, 2.0, 3.0, 4.0)

    def test_range_with_step(self):
        assert _parse_values("0..1..0.5") == (0.0, 0.5, 1.0)

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            _parse_values("5..1")


class TestCapacityCommand:
    def test_one_row_nats_and_bits(self, memoryless_instance, tmp_path):
        out = str(tmp_path / "cap.csv")
        rc = main(["capacity", "--instance", memoryless_instance, "--out", out,
                   "--tol", "1e-8"])
        assert rc == 0
        header, rows = read_report(out)
        assert header == list(BOUND_COLUMNS)
        assert len(rows) == 1
        row = rows[0]
        assert row["bound_name"] == "capacity"
        nats, bits = float(row["value_nats"]), float(row["value_bits"])
        assert abs(bits - nats / math.log(2)) < 1e-12
        assert 0 < nats < math.log(4)


class TestBoundsCommand:
    def test_four_rows_ordered(self, isi_instance, tmp_path):
        """r in {1, 2}: lower(2) >= lower(1), upper(2) <= upper(1)."""
        out = str(tmp_path / "bounds.csv")
        rc = main(["bounds", "--instance", isi_instance, "--out", out,
                   "--r", "1", "--r", "2", "--tol", "1e-8"])
        assert rc == 0
        _, rows = read_report(out)
        assert len(rows) == 4
        by = {(r["bound_name"], r["r"]): float(r["value_nats"]) for r in rows}
        lo1 = by[("grid lower bound", "1")]
        lo2 = by[("grid lower bound", "2")]
        up1 = by[("grid upper bound of the discretized problem", "1")]
        up2 = by[("grid upper bound of the discretized problem", "2")]
        assert lo2 >= lo1 - 1e-6
        assert up2 <= up1 + 1e-6
        assert lo1 <= up1 + 1e-12 and lo2 <= up2 + 1e-12

    def test_idempotent_modulo_wallclock(self, isi_instance, tmp_path):
        out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        argv = ["bounds", "--instance", isi_instance, "--r", "1", "--tol", "1e-8"]
        assert main(argv + ["--out", out1]) == 0
        assert main(argv + ["--out", out2]) == 0

        def strip_wallclock(path):
            lines = open(path).read().splitlines()
            return [",".join(ln.split(",")[:-1]) for ln in lines]

        assert strip_wallclock(out1) == strip_wallclock(out2)


class TestSymklCommand:
    def test_closed_form_row_for_memoryless(self, memoryless_instance, tmp_path):
        out = str(tmp_path / "symkl.csv")
        assert main(["symkl", "--instance", memoryless_instance, "--out", out]) == 0
        _, rows = read_report(out)
        names = {r["bound_name"] for r in rows}
        assert names == {"sym-kl upper bound", "sym-kl closed form"}
        vals = {r["bound_name"]: float(r["value_nats"]) for r in rows}
        assert abs(vals["sym-kl upper bound"] - vals["sym-kl closed form"]) < 1e-6


class TestSweepCommand:
    def test_alpha_sweep_shape(self, isi_instance, tmp_path):
        """Upper bound column grows with alpha and saturates at the peak."""
        out = str(tmp_path / "sweep.csv")
        rc = main(["sweep", "--instance", isi_instance, "--out", out,
                   "--axis", "alpha", "--values", "1,2,4,8,10", "--tol", "1e-7"])
        assert rc == 0
        lines = open(out).read().splitlines()
        header = lines[1].split(",")
        assert header[0] == "alpha"
        assert {"lower_r1", "upper_r1", "stationary_lower",
                "stationary_upper"} <= set(header)
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
        upper = data[:, header.index("upper_r1")]
        assert np.all(np.diff(upper) >= -1e-6)
        assert upper[-1] - upper[-2] < 1e-4  # saturating near the peak
        lower = data[:, header.index("lower_r1")]
        assert np.all(lower <= upper + 1e-12)

    def test_requires_axis_and_values(self, isi_instance, tmp_path):
        out = str(tmp_path / "x.csv")
        assert main(["sweep", "--instance", isi_instance, "--out", out]) == 1


class TestSimulateCommand:
    def test_writes_two_deterministic_tables(self, isi_instance, tmp_path):
        pre1 = str(tmp_path / "t1")
        pre2 = str(tmp_path / "t2")
        argv = ["simulate", "--instance", isi_instance, "--seed", "9",
                "--values", "1,5,0,10"]
        assert main(argv + ["--out", pre1]) == 0
        assert main(argv + ["--out", pre2]) == 0
        for suffix in (".inputs.csv", ".outputs.csv"):
            a = open(pre1 + suffix).read()
            b = open(pre2 + suffix).read()
            assert a == b
        out_lines = open(pre1 + ".outputs.csv").read().splitlines()
        assert out_lines[1] == "trial,slot,rx_id,y"
        in_lines = open(pre1 + ".inputs.csv").read().splitlines()
        assert in_lines[1] == "trial,slot,tx_id,x"

    def test_seed_changes_outputs(self, isi_instance, tmp_path):
        p1, p2 = str(tmp_path / "s1"), str(tmp_path / "s2")
        main(["simulate", "--instance", isi_instance, "--out", p1, "--seed", "1"])
        main(["simulate", "--instance", isi_instance, "--out", p2, "--seed", "2"])
        assert open(p1 + ".outputs.csv").read() != open(p2 + ".outputs.csv").read()


class TestDegradeCheckCommand:
    def test_feasible_pair(self, tmp_path):
        doc = {"impulse": [1.0, 0.0], "lambda0": 2.0, "amax": 10.0,
               "alpha": 3.0, "grid_points": 3}
        inst = tmp_path / "base.json"
        inst.write_text(json.dumps(doc))
        out = str(tmp_path / "deg.csv")
        rc = main(["degrade-check", "--instance", str(inst), "--out", out,
                   "--values", "0.5,0.5", "--tol", "1e-8"])
        assert rc == 0
        _, rows = read_report(out)
        ordering = [r for r in rows if r["bound_name"] == "ordering"]
        assert len(ordering) == 1
        assert float(ordering[0]["value_nats"]) >= -1e-6
        assert len(rows) == 5  # ordering + two sandwich pairs

    def test_not_applicable_pair(self, isi_instance, tmp_path):
        out = str(tmp_path / "deg.csv")
        rc = main(["degrade-check", "--instance", isi_instance, "--out", out,
                   "--values", "0.5,0.5"])
        assert rc == 0
        _, rows = read_report(out)
        assert len(rows) == 1
        assert math.isnan(float(rows[0]["value_nats"]))


class TestErrorPaths:
    def test_unknown_command(self, capsys):
        assert main(["zap", "--instance", "x", "--out", "y"]) == 1
        assert "LTIPC-ERROR invalid-input:" in capsys.readouterr().err

    def test_missing_instance(self, tmp_path, capsys):
        rc = main(["capacity", "--instance", str(tmp_path / "nope.json"),
                   "--out", str(tmp_path / "o.csv")])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.count("\n") == 1 and err.startswith("LTIPC-ERROR invalid-input:")

    def test_invalid_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{]")
        rc = main(["capacity", "--instance", str(bad),
                   "--out", str(tmp_path / "o.csv")])
        assert rc == 1
        assert "LTIPC-ERROR invalid-input:" in capsys.readouterr().err

    def test_unknown_field_rejected(self, tmp_path):
        bad = tmp_path / "extra.json"
        bad.write_text(json.dumps({"impulse": [1.0], "lambda0": 1.0,
                                   "amax": 2.0, "alpha": 1.0, "bogus": 1}))
        assert main(["capacity", "--instance", str(bad),
                     "--out", str(tmp_path / "o.csv")]) == 1

    def test_nonconvergence_exit_code(self, memoryless_instance, tmp_path,
                                      monkeypatch, capsys):
        def explode(*args, **kwargs):
            raise ConvergenceError("stuck", gap=1.0, iterations=3)

        monkeypatch.setattr(cli, "block_sandwich_bounds", explode)
        rc = main(["capacity", "--instance", memoryless_instance,
                   "--out", str(tmp_path / "o.csv")])
        assert rc == 2
        assert "LTIPC-ERROR non-convergence:" in capsys.readouterr().err


class TestRunManifest:
    def test_rejects_unknown_command(self, memoryless_instance):
        with pytest.raises(ValueError):
            RunManifest(command="fix-it", instance=memoryless_instance, out="x")

    def test_rejects_missing_file(self):
        with pytest.raises(ValueError):
            RunManifest(command="capacity", instance="/does/not/exist", out="x")


class TestThreadCap:
    def test_env_variable_respected(self, monkeypatch):
        monkeypatch.setenv("LTIPC_THREADS", "4")
        assert cli.thread_cap() == 4
        monkeypatch.setenv("LTIPC_THREADS", "junk")
        assert cli.thread_cap() == 1

    def test_parallel_sweep_matches_serial(self, isi_instance, tmp_path,
                                           monkeypatch):
        out_serial = str(tmp_path / "serial.csv")
        out_par = str(tmp_path / "par.csv")
        argv = ["sweep", "--instance", isi_instance, "--axis", "alpha",
                "--values", "2,6", "--tol", "1e-7"]
        monkeypatch.setenv("LTIPC_THREADS", "1")
        assert main(argv + ["--out", out_serial]) == 0
        monkeypatch.setenv("LTIPC_THREADS", "2")
        assert main(argv + ["--out", out_par]) == 0
        assert open(out_serial).read() == open(out_par).read()
