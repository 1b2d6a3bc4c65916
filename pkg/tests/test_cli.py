"""CLI surface: subcommands, artifacts, determinism, error exits."""

import json
from pathlib import Path

import pytest

from elwave.cli import main
from elwave.config import parse_config, preset_paper_desk


def run_cli(*argv):
    return main(list(argv))


class TestDumpPreset:
    def test_round_trips(self, capsys):
        assert run_cli("--dump-preset") == 0
        out = capsys.readouterr().out
        assert parse_config(out) == preset_paper_desk()


class TestEigenCheck:
    def test_pass_and_artifacts(self, tmp_path):
        out = tmp_path / "ec"
        assert run_cli("eigen-check", "--out", str(out)) == 0
        doc = json.loads((out / "eigen_check.json").read_text())
        assert doc["verdict"] == "PASS"
        assert doc["checks"]["duality_literal"]["pass"]
        assert (out / "manifest.json").exists()


class TestMakeData:
    def test_artifacts_and_determinism(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli("make-data", "--out", str(out1)) == 0
        assert run_cli("make-data", "--out", str(out2)) == 0
        for name in ("data_phi0.elwv", "data_field.csv",
                     "data_summary.json", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        doc = json.loads((out1 / "data_summary.json").read_text())
        assert doc["w0"] == pytest.approx(0.129687, rel=1e-4)

    def test_literal_mode_flag(self, tmp_path):
        out = tmp_path / "lit"
        assert run_cli("make-data", "--out", str(out), "--set",
                       "mode = paper-literal") == 0
        doc = json.loads((out / "data_summary.json").read_text())
        assert doc["mode"] == "paper-literal"


class TestInvalidConfig:
    def test_nonzero_exit_no_artifacts(self, tmp_path, capsys):
        cfgfile = tmp_path / "bad.cfg"
        cfgfile.write_text("data.alpha = 0.6\n")
        out = tmp_path / "nothing"
        rc = run_cli("make-data", "--config", str(cfgfile), "--out", str(out))
        assert rc == 2
        assert not out.exists()
        err = capsys.readouterr().err
        assert "alpha" in err


class TestEvolveCommand:
    def test_short_run_with_stop(self, tmp_path):
        out = tmp_path / "ev"
        rc = run_cli("evolve", "--out", str(out), "--t-max", "0.2",
                     "--ppe", "24", "--keep-snapshots", "4")
        assert rc == 0
        doc = json.loads((out / "run_manifest.json").read_text())
        assert doc["stop_reason"] == "t_max"
        snaps = sorted(Path(out).glob("snap_*.elwv"))
        assert len(snaps) >= 4

    def test_m_stop_reported(self, tmp_path):
        out = tmp_path / "evs"
        rc = run_cli("evolve", "--out", str(out), "--t-max", "3.0",
                     "--ppe", "24", "--m-stop-factor", "0.23",
                     "--keep-snapshots", "2")
        assert rc == 0
        doc = json.loads((out / "run_manifest.json").read_text())
        assert doc["stop_reason"] == "m_stop"
        assert doc["t_end"] < 3.0


class TestReport:
    def test_aggregates_verdicts(self, tmp_path, capsys):
        out = tmp_path / "tree"
        out.mkdir()
        (out / "eigen_check.json").write_text(
            json.dumps({"verdict": "PASS"}))
        (out / "other.json").write_text(json.dumps({"slope": -0.1,
                                                    "converged": True}))
        assert run_cli("report", "--out", str(out)) == 0
        doc = json.loads((out / "report.json").read_text())
        assert doc["verdicts"]["eigen_check.json"]["status"] == "PASS"
        (out / "bad.json").write_text(json.dumps({"shock":
                                                  {"detected": False,
                                                   "no_shock_reason": "x"}}))
        assert run_cli("report", "--out", str(out)) == 1
