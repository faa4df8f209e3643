import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qhardy import cli
from qhardy.verify import VerificationReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


class TestConstants:
    def test_example_row(self, capsys):
        code, d, _ = run_json(capsys, "constants", "--case", "T3.1-upper", "--q", "0.5",
                              "--p", "2", "--alpha", "0")
        assert code == 0
        (row,) = d["results"]
        assert row["constant"] == pytest.approx(2.91421356, abs=1e-8)
        assert row["classical"] == 4.0 and row["ordering"] == "q-smaller"

    def test_defaults_cover_all_cases(self, capsys):
        code, d, _ = run_json(capsys, "constants")
        assert code == 0
        ids = {r["theorem_id"] for r in d["results"]}
        assert ids == set(cli.CASE_IDS)
        assert d["skipped"] and all("reason" in s for s in d["skipped"])

    def test_sorted(self, capsys):
        _, d, _ = run_json(capsys, "constants")
        keys = [(cli.CASE_IDS.index(r["theorem_id"]), r["q"], r["p"], r["alpha"])
                for r in d["results"]]
        assert keys == sorted(keys)

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "constants", "--case", "T4.1", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and rows
        assert {"theorem_id", "q", "p", "alpha", "constant", "classical"} <= set(rows[0])


class TestConfigErrors:
    @pytest.mark.parametrize("argv", [
        ["constants", "--q", "1.5"],
        ["constants", "--case", "T9.9"],
        ["verify", "--steps", "0"],
        ["discrete", "--form", "9.99"],
        ["constants", "--format", "xml"],
        ["nonsense"],
        ["verify", "--eps-tail", "-1"],
    ])
    def test_exit_2(self, capsys, argv):
        with pytest.raises(SystemExit) as exc:
            raise SystemExit(cli.main(argv))
        assert exc.value.code == 2

    def test_message(self, capsys):
        code, _, err = run(capsys, "constants", "--q", "1.5")
        assert code == 2 and "q must lie in (0,1), got 1.5" in err

    def test_bad_config_file(self, capsys, tmp_path):
        p = tmp_path / "c.json"
        p.write_text('{"colour": 3}')
        assert run(capsys, "constants", "--config", str(p))[0] == 2
        p.write_text("not json")
        assert run(capsys, "constants", "--config", str(p))[0] == 2


class TestConfigFile:
    def test_flags_override_file(self, capsys, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"case": "T3.2", "q": [0.3, 0.5], "p": 2, "alpha": 0}))
        _, d, _ = run_json(capsys, "constants", "--config", str(p), "--q", "0.8")
        assert [(r["theorem_id"], r["q"]) for r in d["results"]] == [("T3.2", 0.8)]

    def test_out_path(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        code, stdout, _ = run(capsys, "constants", "--case", "T4.1", "--out", str(out))
        assert code == 0 and stdout == ""
        assert json.loads(out.read_text())["results"]


class TestVerify:
    def test_small_grid(self, capsys):
        code, d, err = run_json(capsys, "verify", "--case", "T3.1-upper", "--case", "T3.2",
                                "--q", "0.5", "--p", "2", "--alpha", "0")
        assert code == 0
        assert set(d) == {"run", "results", "skipped", "errors"}
        r = d["results"][0]
        for key in ("theorem_id", "q", "p", "alpha", "seed", "lhs", "rhs", "constant",
                    "ratio", "satisfied", "margin", "error_budget", "strict"):
            assert key in r
        assert all(r["satisfied"] for r in d["results"])
        assert "passed" in err

    def test_window_skip(self, capsys):
        code, d, _ = run_json(capsys, "verify", "--case", "T3.2", "--p", "2", "--alpha", "0.6",
                              "--q", "0.5")
        assert code == 0 and d["results"] == []
        (s,) = d["skipped"]
        assert s["theorem_id"] == "T3.2" and s["alpha"] == 0.6 and s["reason"]

    def test_in_window_example(self, capsys):
        _, d, _ = run_json(capsys, "verify", "--case", "T3.2", "--p", "2", "--alpha", "0.4",
                           "--q", "0.5")
        assert d["results"] and not d["skipped"]

    def test_nonconvergence_exit_3(self, capsys):
        code, d, _ = run_json(capsys, "verify", "--case", "T3.1-upper", "--q", "0.8",
                              "--p", "2", "--alpha", "0", "--k-max", "40")
        assert code == 3
        assert not any(r["converged"] for r in d["results"])

    def test_violation_exit_1(self, capsys, monkeypatch):
        def fake(case, seed, params):
            return [VerificationReport(case, 2.0, 1.0, 1.0, 2.0, False, -1.0, 0.0, "fake")]
        monkeypatch.setattr(cli, "verify_corpus", fake)
        code, _, _ = run(capsys, "verify", "--case", "T3.2", "--q", "0.5", "--p", "2",
                         "--alpha", "0")
        assert code == 1

    def test_deterministic_and_threaded(self, capsys, monkeypatch):
        argv = ["verify", "--seed", "42", "--case", "T4.1", "--case", "T3.1-neg"]
        monkeypatch.setenv("QHARDY_NUM_THREADS", "1")
        a = run(capsys, *argv)[1]
        b = run(capsys, *argv)[1]
        monkeypatch.setenv("QHARDY_NUM_THREADS", "4")
        c = run(capsys, *argv)[1]
        assert a == b == c
        assert json.loads(a)["run"]["wall_time"] is None

    def test_wall_time_opt_in(self, capsys):
        _, d, _ = run_json(capsys, "verify", "--case", "T3.2", "--q", "0.5", "--p", "2",
                           "--alpha", "0", "--wall-time")
        assert isinstance(d["run"]["wall_time"], float)

    def test_seed_changes_corpus(self, capsys):
        argv = ["verify", "--case", "T3.1-upper", "--q", "0.5", "--p", "2", "--alpha", "0"]
        a = run(capsys, *argv, "--seed", "1")[1]
        b = run(capsys, *argv, "--seed", "2")[1]
        assert a != b


class TestSweep:
    def test_rl_example(self, capsys):
        code, out, _ = run(capsys, "sweep", "--case", "T4.1", "--p", "2", "--alpha", "0.5",
                           "--q", "0.5")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 10
        assert float(rows[-1]["relative_gap"]) < 0.01
        assert [int(r["step"]) for r in rows] == list(range(10))

    def test_single_step(self, capsys):
        code, out, _ = run(capsys, "sweep", "--case", "T3.1-upper", "--p", "2", "--alpha", "0",
                           "--q", "0.5", "--steps", "1")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 1
        assert float(rows[0]["relative_gap"]) > 0.01

    def test_two_parameter_columns(self, capsys):
        _, out, _ = run(capsys, "sweep", "--case", "T3.1-neg", "--p", "-2", "--alpha", "-2",
                        "--q", "0.5", "--steps", "4")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert all(r["family"] == "power-two" for r in rows)
        assert all(float(r["beta2"]) == 10 and float(r["beta2_alt"]) == 20 for r in rows)
        assert all(r["ratio_beta2_alt"] for r in rows)

    def test_json(self, capsys):
        _, d, _ = run_json(capsys, "sweep", "--case", "T3.2", "--p", "2", "--alpha", "0",
                           "--q", "0.5", "--steps", "3", "--format", "json")
        (s,) = d["results"]
        assert len(s["ratios"]) == 3 and s["relative_gap"] == pytest.approx(
            (s["constant"] - s["sup_ratio"]) / s["constant"])


class TestDiscrete:
    def test_copson_form(self, capsys):
        code, d, _ = run_json(capsys, "discrete", "--form", "3.24", "--q", "0.5", "--p", "2",
                              "--lambda", "1", "--format", "json")
        assert code == 0 and d["results"]
        assert all(r["ratio"] <= r["constant"] for r in d["results"])

    def test_epsilon_sweep(self, capsys):
        code, d, _ = run_json(capsys, "discrete", "--form", "3.24", "--q", "0.5", "--p", "2",
                              "--lambda", "1", "--epsilon-sweep", "--steps", "12",
                              "--format", "json")
        ratios = [r["ratio"] for r in d["results"]]
        assert code == 0 and ratios[-1] >= 0.99 * 4

    def test_boundary_skip(self, capsys):
        code, d, _ = run_json(capsys, "discrete", "--form", "3.22", "--alpha", "0.5", "--p", "2",
                              "--format", "json")
        assert code == 0 and d["results"] == [] and d["skipped"]

    def test_classical_form(self, capsys):
        code, d, _ = run_json(capsys, "discrete", "--form", "weights-3.21", "--alpha", "0.25",
                              "--p", "2", "--n", "2000", "--format", "json")
        assert code == 0
        assert all(r["lhs"] < r["rhs"] for r in d["results"])

    def test_negative_p_skipped_or_reported(self, capsys):
        code, d, _ = run_json(capsys, "discrete", "--form", "3.23", "--p", "-2",
                              "--q", "0.5", "--lambda", "1", "--format", "json")
        assert d["results"] == []
        assert d["skipped"] or d["errors"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qhardy", "constants", "--case", "T4.1",
                           "--q", "0.5", "--p", "2", "--alpha", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    (row,) = json.loads(proc.stdout)["results"]
    assert math.isclose(row["constant"], (1 + math.sqrt(0.5)) ** 2, rel_tol=1e-12)
