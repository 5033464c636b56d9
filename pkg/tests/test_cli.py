"""Command-line interface: formats, reproducibility, exit codes."""

import csv
import io
import json

import pytest

from ruin2d.cli import run


def run_cli(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def params_to_argv(command, params):
    argv = command.split()
    for key, val in params.items():
        if val is None:
            continue
        argv += [f"--{key}", repr(val) if not isinstance(val, str) else val]
    return argv


class TestSingleCommands:
    def test_brm1_reference_value(self, capsys):
        rec = run_json(capsys, "brm1", "--c", "1", "--sigma", "1",
                       "--u", "1", "--T", "1")
        assert rec["value"] == pytest.approx(0.0904178, abs=5e-8)
        assert rec["command"] == "brm1"

    def test_bounds_orthant(self, capsys):
        rec = run_json(capsys, "brm2", "bounds", "--c1", "0", "--c2", "0",
                       "--rho", "0", "--u", "0", "--v", "0")
        assert rec["bounds"] == [0.25, 1.0]
        assert rec["value"] == 0.25

    def test_ruintime_cdf_origin(self, capsys):
        rec = run_json(capsys, "brm2", "ruintime-cdf", "--a", "1",
                       "--rho", "0", "--x", "0")
        assert rec["value"] == 0.0

    def test_levy_brownian_case1(self, capsys):
        rec = run_json(capsys, "levy", "--model", "brownian", "--c1", "1",
                       "--c2", "0", "--x", "1", "--y", "0.5", "--T", "1")
        assert rec["value"] == pytest.approx(0.0904178, abs=1e-6)

    def test_defaults_are_materialized(self, capsys):
        rec = run_json(capsys, "brm2", "bounds", "--c1", "0", "--c2", "0",
                       "--rho", "0", "--u", "1")
        assert rec["params"]["a"] == 1  # default echoed
        assert rec["params"]["v"] is None

    def test_record_key_order(self, capsys):
        _, out, _ = run_cli(capsys, "brm1", "--c", "1", "--sigma", "1",
                            "--u", "1", "--T", "1")
        keys = list(json.loads(out).keys())
        assert keys == ["command", "params", "value", "stderr", "ci",
                        "bounds", "method", "seed", "tool_version",
                        "elapsed_ms"]


class TestFormats:
    def test_seventeen_digit_reals_round_trip(self, capsys):
        rec = run_json(capsys, "brm1", "--c", "0.3", "--sigma", "1.7",
                       "--u", "0.9", "--T", "2.3")
        _, out, _ = run_cli(capsys, "brm1", "--c", "0.3", "--sigma", "1.7",
                            "--u", "0.9", "--T", "2.3")
        # the serialized literal must parse back to the identical float
        assert json.loads(out)["value"] == rec["value"]

    def test_csv_and_json_agree(self, capsys):
        code, js, _ = run_cli(capsys, "brm1", "--c", "1", "--sigma", "1",
                              "--u", "1", "--T", "1")
        assert code == 0
        code, cs, _ = run_cli(capsys, "brm1", "--c", "1", "--sigma", "1",
                              "--u", "1", "--T", "1", "--format", "csv")
        assert code == 0
        rec = json.loads(js)
        rows = list(csv.DictReader(io.StringIO(cs)))
        assert len(rows) == 1
        assert float(rows[0]["value"]) == rec["value"]

    def test_out_file_duplicates_stdout(self, capsys, tmp_path):
        target = tmp_path / "result.json"
        _, out, _ = run_cli(capsys, "brm1", "--c", "1", "--sigma", "1",
                            "--u", "1", "--T", "1", "--out", str(target))
        assert target.read_text() == out


class TestReproducibility:
    def test_mc_record_replays_bit_exactly(self, capsys):
        args = ("mc", "psi1d", "--c", "1", "--sigma", "1", "--u", "1",
                "--T", "1", "--paths", "5000", "--steps", "64",
                "--seed", "123")
        first = run_json(capsys, *args)
        replay = run_json(capsys, *params_to_argv("mc psi1d",
                                                  first["params"]))
        assert replay["value"] == first["value"]
        assert replay["stderr"] == first["stderr"]

    def test_worker_count_does_not_change_values(self, capsys):
        base = ("mc", "psi2d", "--c1", "0", "--c2", "0", "--rho", "0",
                "--u", "1", "--paths", "20000", "--steps", "64",
                "--seed", "7", "--tilt", "none")
        a = run_json(capsys, *base, "--workers", "1")
        b = run_json(capsys, *base, "--workers", "4")
        assert a["value"] == b["value"]
        assert a["stderr"] == b["stderr"]


class TestExitCodes:
    def test_unknown_command_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "frobnicate")
        assert code == 64
        assert "usage" in err

    def test_missing_required_flag(self, capsys):
        code, _, _ = run_cli(capsys, "brm1", "--c", "1")
        assert code == 64

    def test_invalid_input(self, capsys):
        code, _, err = run_cli(capsys, "brm1", "--c", "1", "--sigma", "-1",
                               "--u", "1", "--T", "1")
        assert code == 1
        assert "InvalidInput" in err

    def test_degenerate_sampling(self, capsys):
        code, _, err = run_cli(capsys, "mc", "ruintime", "--c1", "0",
                               "--c2", "0", "--rho", "0", "--u", "8",
                               "--paths", "500", "--steps", "64",
                               "--seed", "0", "--tilt", "none")
        assert code == 2
        assert "DegenerateIS" in err


class TestSweep:
    def test_single_point_matches_single_run(self, capsys):
        rec = run_json(capsys, "brm1", "--c", "1", "--sigma", "1",
                       "--u", "1", "--T", "1")
        code, out, _ = run_cli(capsys, "sweep", "brm1", "--c", "1",
                               "--sigma", "1", "--u", "1", "--T", "1")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 1
        assert float(rows[0]["value"]) == rec["value"]
        assert rows[0]["error"] == ""

    def test_asym_sweep_monotone(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "brm2", "asym", "--c1", "0",
                               "--c2", "0", "--rho", "0.5", "--a", "0",
                               "--u", "3,4,5")
        assert code == 0
        vals = [float(r["value"])
                for r in csv.DictReader(io.StringIO(out))]
        assert vals == sorted(vals, reverse=True)

    def test_failing_rows_recorded_not_fatal(self, capsys):
        # u=0 is fine for bounds, negative sigma is not fine for brm1
        code, out, _ = run_cli(capsys, "sweep", "brm1", "--c", "1",
                               "--sigma", "1,-1", "--u", "1", "--T", "1")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 2
        assert rows[0]["error"] == ""
        assert "InvalidInput" in rows[1]["error"]

    def test_constant_horizon_sweep_nondecreasing(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "constant", "--a", "1",
                               "--rho", "0", "--T", "0.5,1,2",
                               "--paths", "1024", "--steps", "512",
                               "--seed", "4")
        assert code == 0
        vals = [float(r["value"])
                for r in csv.DictReader(io.StringIO(out))]
        assert vals == sorted(vals)
