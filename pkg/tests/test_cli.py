import csv
import json
import math
import shutil
import subprocess
import sys

import pytest

from radiance.cli import ALPHA, HBAR, compute, load_config_file, main
from radiance.kinematics import FieldConfig, ParticleParams, PhaseWindow, Polarization
from radiance.spectrum_circular import resonance, schott_rate

TWO_PI = "6.283185307179586"


def fields_of(out):
    d = {}
    for line in out.strip().splitlines():
        key, _, val = line.partition(" ")
        d[key] = val
    return d


class TestSingleRuns:
    def test_schott_stdout(self, capsys):
        assert main(["schott", "--xi", "0.01"]) == 0
        got = fields_of(capsys.readouterr().out)
        assert float(got["total"]) == schott_rate(0.01).total
        assert got["total"] == "6.6673333333333351e-05"
        assert got["converged"] == "true"

    def test_classical_limit_mode(self, capsys):
        assert main(["classical-limit", "--polarization", "circular",
                     "--xi", "0.5", "--pminus", "1.0"]) == 0
        circ = float(fields_of(capsys.readouterr().out)["total"])
        assert circ == pytest.approx(1.0 / 6.0, rel=1e-11)
        assert main(["classical-limit", "--polarization", "linear",
                     "--xi", "0.5", "--pminus", "1.0"]) == 0
        lin = float(fields_of(capsys.readouterr().out)["total"])
        assert lin == pytest.approx(11.0 / 128.0, rel=1e-11)

    def test_nikishov_ritus_conventions(self, capsys):
        assert main(["nikishov-ritus", "--xi", "0.5"]) == 0
        integrated = float(fields_of(capsys.readouterr().out)["total"])
        assert main(["nikishov-ritus", "--xi", "0.5",
                     "--convention", "solid-angle-average"]) == 0
        averaged = float(fields_of(capsys.readouterr().out)["total"])
        assert integrated / averaged == pytest.approx(4.0 * math.pi, rel=1e-13)

    def test_physical_units_factors(self, capsys):
        w = 2.355e15
        assert main(["schott", "--xi", "0.5", "--units", "physical",
                     "--omega-w", "%r" % w]) == 0
        got = fields_of(capsys.readouterr().out)
        assert float(got["energy_J_per_internal"]) == ALPHA * HBAR * w
        assert float(got["power_W_per_internal_rate"]) == ALPHA * HBAR * w * w
        assert float(got["time_s_per_internal"]) == 1.0 / w


class TestCsvOutput:
    def test_spectrum_schema(self, tmp_path, capsys):
        out = tmp_path / "spec.csv"
        assert main(["circular", "--xi", "0.5", "--pminus", "1.0",
                     "--dphi", TWO_PI, "--out", str(out)]) == 0
        stdout_total = float(fields_of(capsys.readouterr().out)["total"])
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["n", "omega", "theta", "dW", "dW_err"]
        assert rows[-1][:3] == ["total", "", ""]
        assert float(rows[-1][3]) == stdout_total
        body = rows[1:-1]
        ns = [int(r[0]) for r in body]
        assert ns == sorted(ns)
        assert math.fsum(float(r[3]) for r in body) == pytest.approx(stdout_total, rel=1e-10)
        assert math.fsum(float(r[4]) for r in body) == pytest.approx(float(rows[-1][4]), rel=1e-10)

    def test_resonance_tags(self, tmp_path):
        out = tmp_path / "spec.csv"
        dphi = 2.0 * math.pi
        assert main(["circular", "--xi", "0.5", "--pminus", "1.0",
                     "--dphi", "%r" % dphi, "--out", str(out)]) == 0
        f = FieldConfig(polarization=Polarization.CIRCULAR, xi=0.5, handedness=1)
        p = ParticleParams(p_minus=1.0)
        w = PhaseWindow(0.0, dphi)
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))[1:-1]
        for r in rows:
            n = int(r[0])
            if n < 1:
                assert float(r[1]) == 0.0 and float(r[2]) == 0.0
            else:
                om, _ = resonance(p, f, 0.5 * math.pi, n, w)
                assert float(r[1]) == om
                assert float(r[2]) == 0.5 * math.pi


class TestJsonOutput:
    def test_round_trip_reproduces_total(self, tmp_path, capsys):
        out = tmp_path / "run.json"
        assert main(["circular", "--xi", "0.5", "--pminus", "1.0", "--dphi", TWO_PI,
                     "--format", "json", "--out", str(out)]) == 0
        stdout_total = float(fields_of(capsys.readouterr().out)["total"])
        data = json.loads(out.read_text())
        assert data["result"]["total"] == stdout_total
        assert data["result"]["converged"] is True
        assert data["xi"] == 0.5 and data["mode"] == "circular"
        # the emitted file is itself a valid config for the same run
        cfg = load_config_file(str(out))
        assert compute(cfg).total == stdout_total

    def test_config_file_with_cli_override(self, tmp_path, capsys):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({"mode": "schott", "xi": 0.01}))
        assert main(["--config", str(cfgfile)]) == 0
        assert float(fields_of(capsys.readouterr().out)["total"]) == schott_rate(0.01).total
        assert main(["--config", str(cfgfile), "--xi", "0.5"]) == 0
        assert float(fields_of(capsys.readouterr().out)["total"]) == schott_rate(0.5).total


class TestUsageErrors:
    def test_missing_required_flag(self, capsys):
        assert main(["circular", "--xi", "0.5"]) == 1
        assert "--pminus" in capsys.readouterr().err

    def test_inapplicable_flag(self, capsys):
        assert main(["schott", "--xi", "0.5", "--dphi", "6.0"]) == 1
        assert "dphi" in capsys.readouterr().err

    def test_sweep_flag_outside_sweep(self, capsys):
        assert main(["schott", "--xi", "0.5", "--steps", "3"]) == 1
        assert "steps" in capsys.readouterr().err

    def test_units_need_omega_w(self, capsys):
        assert main(["schott", "--xi", "0.5", "--units", "physical"]) == 1
        assert "omega_w" in capsys.readouterr().err
        assert main(["schott", "--xi", "0.5", "--omega-w", "1e15"]) == 1
        assert "units" in capsys.readouterr().err

    def test_unknown_mode(self, capsys):
        assert main(["warble"]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_unknown_config_key(self, tmp_path, capsys):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({"mode": "schott", "xi": 0.5, "bogus": 1}))
        assert main(["--config", str(cfgfile)]) == 1
        assert "bogus" in capsys.readouterr().err

    def test_no_mode_anywhere(self, capsys):
        assert main([]) == 1
        assert "mode" in capsys.readouterr().err

    def test_rest_frame_rejects_pminus(self, capsys):
        assert main(["rest-frame-circular", "--xi", "0.5", "--dphi", TWO_PI,
                     "--pminus", "2.0"]) == 1
        assert "pminus" in capsys.readouterr().err


class TestConvergenceReporting:
    def test_unreachable_tolerance_exits_2_with_artifact(self, tmp_path, capsys):
        out = tmp_path / "run.json"
        code = main(["circular", "--xi", "0.5", "--pminus", "1.0", "--dphi", TWO_PI,
                     "--rel-tol", "1e-15", "--abs-tol", "1e-300",
                     "--format", "json", "--out", str(out)])
        assert code == 2
        assert fields_of(capsys.readouterr().out)["converged"] == "false"
        data = json.loads(out.read_text())
        assert data["result"]["converged"] is False
        assert math.isfinite(data["result"]["total"])


class TestSweep:
    def sweep_args(self, out, steps=5, threads=None):
        args = ["sweep", "--param", "xi", "--from", "0.1", "--to", "0.9",
                "--steps", str(steps), "--inner", "schott", "--out", str(out)]
        if threads is not None:
            args += ["--threads", str(threads)]
        return args

    def test_values_and_monotonicity(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        assert main(self.sweep_args(out)) == 0
        assert "computed 5 skipped 0" in capsys.readouterr().out
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["xi", "total", "total_err", "converged"]
        assert len(rows) == 6
        totals = []
        for r in rows[1:]:
            assert float(r[1]) == schott_rate(float(r[0])).total
            assert r[3] == "true"
            totals.append(float(r[1]))
        assert totals == sorted(totals)

    def test_resume_skips_completed_points(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        assert main(self.sweep_args(out)) == 0
        first = out.read_bytes()
        capsys.readouterr()
        assert main(self.sweep_args(out)) == 0
        assert "computed 0 skipped 5" in capsys.readouterr().out
        assert out.read_bytes() == first

    def test_manifest_guards_against_mismatched_config(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        assert main(self.sweep_args(out)) == 0
        capsys.readouterr()
        assert main(self.sweep_args(out, steps=7)) == 1
        assert "manifest" in capsys.readouterr().err

    def test_single_step_matches_single_run(self, tmp_path):
        out = tmp_path / "one.csv"
        assert main(["sweep", "--param", "xi", "--from", "0.5", "--to", "0.5",
                     "--steps", "1", "--inner", "schott", "--out", str(out)]) == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 2
        assert float(rows[1][1]) == schott_rate(0.5).total
        assert float(rows[1][1]) == pytest.approx(5.0 / 24.0, rel=1e-12)

    def test_thread_count_does_not_change_results(self, tmp_path, monkeypatch):
        blobs = []
        for threads in (1, 4, 8):
            out = tmp_path / f"t{threads}.csv"
            args = ["sweep", "--param", "xi", "--from", "0.1", "--to", "0.9",
                    "--steps", "6", "--inner", "circular",
                    "--pminus", "1.0", "--dphi", TWO_PI, "--out", str(out)]
            monkeypatch.setenv("RADIANCE_THREADS", str(threads))
            assert main(args) == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1] == blobs[2]

    def test_nonconverged_point_exits_2(self, tmp_path):
        out = tmp_path / "hard.csv"
        code = main(["sweep", "--param", "xi", "--from", "0.5", "--to", "0.5",
                     "--steps", "1", "--inner", "circular", "--pminus", "1.0",
                     "--dphi", TWO_PI, "--rel-tol", "1e-15", "--abs-tol", "1e-300",
                     "--out", str(out)])
        assert code == 2
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[1][3] == "false"


class TestOracleCompare:
    def test_series_vs_direct_agreement(self, tmp_path):
        out = tmp_path / "cmp.json"
        code = main(["oracle-compare", "--polarization", "circular", "--xi", "0.5",
                     "--pminus", "1.0", "--dphi", TWO_PI, "--out", str(out)])
        assert code == 0
        data = json.loads(out.read_text())
        (pt,) = data["points"]
        assert pt["series_converged"] and pt["direct_converged"]
        assert pt["rel_error"] < 1e-6
        assert pt["series_total"] == pytest.approx(pt["direct_minkowski"], rel=1e-6)

    def test_stdout_json_when_no_out(self, capsys):
        code = main(["oracle-compare", "--polarization", "circular", "--xi", "0.5",
                     "--pminus", "1.0", "--dphi", TWO_PI])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert "points" in data and len(data["points"]) == 1


class TestInstalledEntryPoint:
    def test_console_script(self):
        exe = shutil.which("radiance")
        assert exe, "console script 'radiance' is not on PATH"
        proc = subprocess.run([exe, "schott", "--xi", "0.5"],
                              capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0
        assert "total" in proc.stdout

    def test_module_invocation(self):
        proc = subprocess.run([sys.executable, "-m", "radiance.cli", "schott", "--xi", "0.5"],
                              capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0
        assert fields_of(proc.stdout)["converged"] == "true"
