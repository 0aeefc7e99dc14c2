import json
from pathlib import Path

import pytest

import main
import verify_certificate
from SFW import __version__
from SFW.Scenario import load_scenarios, run_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

CLEAN = [
    {"id": "audit-s3-principal", "command": "audit-filter",
     "inputs": {"group": {"kind": "symmetric", "n": 3}, "family": ["full"], "generated": True}},
    {"id": "limit-w", "command": "limit-filter", "inputs": {"lambda": "w"}},
]

PAIRS = {"id": "pairs-w1", "command": "pairs-demo",
         "inputs": {"kappa": "w1", "witness": [{"beta": "0", "H": None}, {"beta": "2", "H": None}]},
         "budgets": {"depth": 1, "prefix": 2}}


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
    return path


def report(out):
    return json.loads((out / "report.json").read_text(encoding="utf-8"))


class TestRunner:
    def test_clean_run(self, tmp_path):
        out = tmp_path / "out"
        assert main.run(["--scenario", str(write(tmp_path, "s.json", CLEAN)), "--out", str(out)]) == 0
        doc = report(out)
        assert doc["passed"]
        assert [s["id"] for s in doc["scenarios"]] == ["audit-s3-principal", "limit-w"]
        assert (out / "report.txt").read_text(encoding="utf-8").rstrip().endswith("2/2 scenarios passed")

    def test_non_normal_family(self, tmp_path):
        out = tmp_path / "out"
        assert main.run(["--scenario", str(SCENARIOS / "audit_nonnormal_s3.json"), "--out", str(out)]) == 1
        (scenario,) = report(out)["scenarios"]
        assert scenario["failing_invariant"] == "normality"
        assert scenario["exit_code"] == 1

    def test_malformed_json(self, tmp_path):
        path = write(tmp_path, "bad.json", '{"id": "x", "command": ')
        assert main.run(["--scenario", str(path), "--out", str(tmp_path / "out")]) == 2

    def test_unknown_command(self, tmp_path):
        path = write(tmp_path, "bad.json", {"id": "x", "command": "force-everything"})
        assert main.run(["--scenario", str(path), "--out", str(tmp_path / "out")]) == 2

    def test_duplicate_ids(self, tmp_path):
        path = write(tmp_path, "dup.json", [CLEAN[0], CLEAN[0]])
        assert main.run(["--scenario", str(path), "--out", str(tmp_path / "out")]) == 2

    def test_input_error_inside_a_scenario(self, tmp_path):
        path = write(tmp_path, "s.json", {"id": "succ", "command": "limit-filter", "inputs": {"lambda": "w + 1"}})
        out = tmp_path / "out"
        assert main.run(["--scenario", str(path), "--out", str(out)]) == 2
        assert "NotALimit" in report(out)["scenarios"][0]["error"]

    def test_reports_are_deterministic(self, tmp_path):
        path = write(tmp_path, "s.json", CLEAN + [PAIRS])
        for name in ("one", "two"):
            assert main.run(["--scenario", str(path), "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "one" / "report.json").read_bytes() == (tmp_path / "two" / "report.json").read_bytes()
        assert (tmp_path / "one" / "certificates" / "pairs-w1.json").read_bytes() == \
            (tmp_path / "two" / "certificates" / "pairs-w1.json").read_bytes()

    def test_depth_override(self, tmp_path):
        out = tmp_path / "out"
        path = write(tmp_path, "s.json", PAIRS)
        assert main.run(["--scenario", str(path), "--out", str(out), "--depth", "2"]) == 0
        assert report(out)["scenarios"][0]["report"]["state"]["depth"] == 2

    def test_why_paths(self, tmp_path):
        scenario = {"id": "hs-why", "command": "hs-check",
                    "inputs": {"kappa": "w1", "names": ["a0"]}, "budgets": {"depth": 1, "prefix": 1}}
        out = tmp_path / "out"
        assert main.run(["--scenario", str(write(tmp_path, "s.json", scenario)), "--out", str(out), "--why"]) == 1
        text = (out / "report.txt").read_text(encoding="utf-8")
        assert "why:" in text
        assert "in filter: False" in text

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main.run(["--version"])
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out

    @pytest.mark.slow
    def test_smoke_suite(self, tmp_path):
        out = tmp_path / "out"
        assert main.run(["--scenario", str(SCENARIOS / "smoke.json"), "--out", str(out)]) == 0
        assert (out / "certificates" / "fs-contrast-w.json").exists()


class TestVerifier:
    @pytest.fixture
    def certificate(self, tmp_path):
        out = tmp_path / "out"
        assert main.run(["--scenario", str(write(tmp_path, "s.json", PAIRS)), "--out", str(out)]) == 0
        return out / "certificates" / "pairs-w1.json"

    def test_accepts(self, certificate):
        assert verify_certificate.run([str(certificate)]) == 0

    def test_rejects_tampering(self, tmp_path, certificate, capsys):
        doc = json.loads(certificate.read_text(encoding="utf-8"))
        doc["chosen_alpha"] = "1"
        assert verify_certificate.run([str(write(tmp_path, "bad.json", doc))]) == 1
        assert "rejected" in capsys.readouterr().out

    def test_not_a_certificate(self, tmp_path):
        assert verify_certificate.run([str(write(tmp_path, "x.json", {"kind": "poem"}))]) == 2


class TestRunScenario:
    def test_limit_filter(self):
        (scenario,) = load_scenarios(CLEAN[1])
        result = run_scenario(scenario)
        assert result.passed
        assert result.code == 0
        assert result.failing_invariant is None

    def test_budget_override(self):
        (scenario,) = load_scenarios(PAIRS)
        result = run_scenario(scenario, {"depth": 2, "prefix": None})
        assert result.passed
        assert result.outcome.report["state"]["depth"] == 2

    def test_input_error(self):
        (scenario,) = load_scenarios({"id": "succ", "command": "limit-filter", "inputs": {"lambda": "w + 1"}})
        result = run_scenario(scenario)
        assert result.code == 2
        assert result.error.startswith("NotALimit")
