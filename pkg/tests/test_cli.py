"""Command-line subcommands, exit statuses, reports and manifests."""
from __future__ import annotations

import json
import subprocess
import sys

import numpy as np

from ssns import cli
from ssns.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main
from ssns.fields import read_snapshot
from ssns.report import REPORT_SCHEMA, CheckResult, RunManifest, emit_report


def _cfg(tmp_path, text="n = 16\nnu = 0.2\ndt = 0.005\nt_end = 0.05\nsample_every = 2\ninit = random\n"):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return str(p)


def _report(out):
    return json.loads((out / "report.json").read_text())


class TestSimulate:
    def test_zero_horizon_one_row(self, tmp_path):
        out = tmp_path / "o"
        assert main(["simulate", "--config", _cfg(tmp_path, "n = 16\nt_end = 0\n"), "--out", str(out), "--quiet"]) == EXIT_OK
        rows = (out / "trajectory.csv").read_text().splitlines()
        assert len(rows) == 2
        snap = read_snapshot(out / "snapshots" / "velocity_00000.ssns")
        assert snap.time == 0.0 and snap.values.shape == (3, 16, 16, 16)

    def test_outputs_and_manifest(self, tmp_path):
        out = tmp_path / "o"
        assert main(["simulate", "--config", _cfg(tmp_path), "--out", str(out), "--quiet", "--snapshots", "all"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["passed"] is True and manifest["config"]["n"] == 16
        assert "trajectory.csv" in manifest["outputs"]
        assert len(list((out / "snapshots").iterdir())) == 6
        assert _report(out)["schema"] == REPORT_SCHEMA

    def test_seed_override(self, tmp_path):
        out = tmp_path / "o"
        main(["simulate", "--config", _cfg(tmp_path), "--out", str(out), "--quiet", "--seed", "42"])
        assert json.loads((out / "manifest.json").read_text())["seed"] == 42

    def test_cfl_abort_exit_two(self, tmp_path, capsys):
        out = tmp_path / "o"
        cfg = _cfg(tmp_path, "n = 16\ndt = 1.0\nt_end = 1.0\ninit = random\n")
        assert main(["simulate", "--config", cfg, "--out", str(out), "--quiet"]) == EXIT_VIOLATION
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["passed"] is False and "CFL" in manifest["error"]
        assert "CFL" in capsys.readouterr().err


class TestUsageErrors:
    def test_unknown_key_named(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["simulate", "--config", _cfg(tmp_path, "n = 16\nreynolds = 100\n"), "--out", str(out)]) == EXIT_USAGE
        assert "'reynolds'" in capsys.readouterr().err
        # manifest still written
        assert "reynolds" in json.loads((out / "manifest.json").read_text())["error"]

    def test_missing_config(self, tmp_path):
        assert main(["certify", "--out", str(tmp_path / "o")]) == EXIT_USAGE

    def test_bad_arguments(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE
        assert main(["simulate", "--seed", "abc"]) == EXIT_USAGE

    def test_help(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "verify-lorentz" in capsys.readouterr().out


class TestCertify:
    def test_zero_field_passes(self, tmp_path):
        out = tmp_path / "o"
        cfg = _cfg(tmp_path, "n = 16\ninit = zero\ndt = 0.01\nt_end = 0.05\nsample_every = 1\n")
        assert main(["certify", "--config", cfg, "--out", str(out), "--quiet"]) == EXIT_OK
        rep = _report(out)
        assert rep["passed"] and rep["samples"] == 6

    def test_random_run(self, tmp_path):
        out = tmp_path / "o"
        assert main(["certify", "--config", _cfg(tmp_path), "--out", str(out), "--quiet"]) == EXIT_OK
        certs = sorted((out / "certificates").iterdir())
        # per variant: two (p, q) pairs × (3 strong + 2 level-set + 2 weak)
        assert len(certs) == 3 * 2 * 7
        names = [c["name"] for c in _report(out)["checks"]]
        for needle in ("velocity sum-space", "strain-eigenvalue level-set", "vorticity weak-Lq",
                       "energy balance", "determinant", "endpoint", "weak-convergence"):
            assert any(needle in n for n in names), needle
        text = (out / "report.txt").read_text()
        assert text.rstrip().endswith("overall: PASS") and "min margin" in text
        header = certs[0].read_text().splitlines()[0]
        assert header == ",".join(cli.CERTIFICATE_COLUMNS)


class TestVerifyLorentz:
    def test_passes(self, tmp_path):
        out = tmp_path / "o"
        assert main(["verify-lorentz", "--out", str(out), "--quiet"]) == EXIT_OK
        splits = list((out / "splits").iterdir())
        assert len(splits) >= 20
        header = splits[0].read_text().splitlines()[0]
        assert header == "t,R,g_norm_qprime,h_norm_inf,int_g,int_h,int_f"

    def test_fault_injection_names_failing_bound(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["verify-lorentz", "--out", str(out), "--fault-factor", "0.5"]) == EXIT_VIOLATION
        text = capsys.readouterr().out
        line = next(l for l in text.splitlines() if l.startswith("first violation:"))
        assert "above-cutoff bound at t = " in line and ", margin -" in line
        rep = _report(out)
        assert not rep["passed"]
        failing = [c for c in rep["checks"] if not c["passed"]]
        assert failing and failing[0]["violation_margin"] < 0

    def test_fault_factor_hidden_from_help(self, capsys):
        main(["verify-lorentz", "--help"])
        assert "--fault-factor" not in capsys.readouterr().out


class TestSelftest:
    def test_passes(self, tmp_path):
        assert main(["selftest", "--out", str(tmp_path / "o"), "--quiet"]) == EXIT_OK

    def test_schema_drift_fails(self, tmp_path, monkeypatch):
        schema = cli.load_schema()
        schema["files"]["trajectory.csv"]["columns"].pop()
        monkeypatch.setattr(cli, "load_schema", lambda: schema)
        out = tmp_path / "o"
        assert main(["selftest", "--out", str(out), "--quiet"]) == EXIT_VIOLATION
        check = next(c for c in _report(out)["checks"] if c["name"] == "CSV schema matches writers")
        assert not check["passed"] and "trajectory.csv" in check["detail"]

    def test_schema_documents_every_column(self):
        for c in cli.load_schema()["files"]["trajectory.csv"]["columns"]:
            assert c["description"]


class TestReport:
    def test_no_samples(self):
        text, doc = emit_report(RunManifest("certify"), [], samples=0)
        assert "no samples" in text and doc["samples"] == 0

    def test_first_violation_localized(self):
        checks = [
            CheckResult("bound A", True, 0.5, 10),
            CheckResult("bound B", False, -0.25, 10, violation_time=0.3, violation_margin=-0.25),
        ]
        text, doc = emit_report(RunManifest("certify"), checks, samples=10)
        assert "first violation: bound B at t = 0.3, margin -0.25" in text
        assert text.rstrip().endswith("overall: FAIL") and doc["passed"] is False

    def test_nonfinite_margins_serialisable(self):
        _, doc = emit_report(RunManifest("x"), [CheckResult("c", False, -np.inf, 1)])
        json.dumps(doc, allow_nan=False)


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "ssns", "verify-lorentz", "--out", str(tmp_path / "o"), "--quiet"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
