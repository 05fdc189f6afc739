import json
import math

from pytest import approx, raises

from koranyi.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestClassify:
    def test_nonexistence_tuple(self, capsys):
        code, out, _ = run(capsys, "classify", "--lambda", "0", "--a", "-2", "--p", "2")
        assert code == 0
        doc = json.loads(out)
        assert doc["verdict"] == "NonexistenceAllF"
        assert doc["margin"] == approx(0.0)

    def test_critical_flag_reports_open_case(self, capsys):
        code, out, _ = run(capsys, "classify", "--lambda-critical", "--a", "0", "--p", "3")
        assert code == 0
        doc = json.loads(out)
        assert doc["verdict"] == "OpenCritical"
        assert doc["threshold"] == {"kind": "second", "value": approx(3.0)}
        assert doc["params"]["lambda"] == approx(-1.0)

    def test_inadmissible_lambda(self, capsys):
        code, _, err = run(capsys, "classify", "--lambda", "-5")
        assert code == 2
        assert "Hardy threshold" in err

    def test_writes_artifact(self, capsys, tmp_path):
        code, _, _ = run(capsys, "classify", "--a", "2", "--out", str(tmp_path))
        assert code == 0
        doc = json.loads((tmp_path / "classify.json").read_text())
        assert doc["verdict"] == "ExistenceWitness"
        assert doc["config"]["a"] == 2.0


class TestConfigHandling:
    def test_file_then_flags_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"a": -2.0}')
        code, out, _ = run(capsys, "classify", "--config", str(cfg))
        assert json.loads(out)["verdict"] == "NonexistenceAllF"
        code, out, _ = run(capsys, "classify", "--config", str(cfg), "--a", "2")
        assert json.loads(out)["verdict"] == "ExistenceWitness"

    def test_unknown_key_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"alpha": 1}')
        code, _, err = run(capsys, "classify", "--config", str(cfg))
        assert code == 2
        assert "alpha" in err

    def test_malformed_json_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{not json")
        code, _, err = run(capsys, "classify", "--config", str(cfg))
        assert code == 2
        assert "not valid JSON" in err

    def test_missing_file_rejected(self, capsys, tmp_path):
        code, _, err = run(capsys, "classify", "--config", str(tmp_path / "nope.json"))
        assert code == 2
        assert "cannot read config" in err


class TestWitnessCommand:
    def test_power_witness_passes(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"grid": 60}')
        code, out, _ = run(capsys, "witness", "--lambda", "3", "--config", str(cfg),
                           "--out", str(tmp_path))
        assert code == 0
        assert "[PASS] witness-identity" in out
        assert "[PASS] witness-slack" in out
        doc = json.loads((tmp_path / "witness.json").read_text())
        assert doc["witness"]["kind"] == "subcritical"
        assert doc["summary"]["failed"] == 0

    def test_critical_witness_passes(self, capsys):
        code, out, _ = run(capsys, "witness", "--lambda-critical", "--a", "2", "--p", "2")
        assert code == 0
        assert '"kind": "critical"' in out

    def test_zero_tolerance_fails_honestly(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"tol": 0.0, "grid": 40}')
        code, out, _ = run(capsys, "witness", "--lambda", "3", "--config", str(cfg))
        assert code == 1
        assert "[FAIL] witness-identity" in out

    def test_tau_outside_window(self, capsys):
        code, _, err = run(capsys, "witness", "--lambda", "3", "--tau", "5")
        assert code == 2
        assert "window" in err

    def test_nonexistence_regime_refused(self, capsys):
        code, _, err = run(capsys, "witness", "--lambda", "0", "--a", "-2")
        assert code == 2
        assert "no admissible decay exponent" in err


class TestScalingCommand:
    def test_time_law(self, capsys, tmp_path):
        code, out, _ = run(capsys, "scaling", "--law", "time",
                           "--scales", "10", "31.6", "100", "316", "1000",
                           "--out", str(tmp_path))
        assert code == 0
        doc = json.loads((tmp_path / "scaling.json").read_text())
        assert doc["fit"]["slope"] == approx(-1.0, abs=0.05)
        csv_text = (tmp_path / "scaling-time.csv").read_text().splitlines()
        assert csv_text[0].startswith("# ")
        assert csv_text[1] == "T,value"
        assert len(csv_text) == 7

    def test_unknown_law_is_parse_error(self, capsys):
        with raises(SystemExit) as exc:
            main(["scaling", "--law", "cubic"])
        assert exc.value.code == 2

    def test_logdecay_requires_critical_zero_margin(self, capsys):
        code, _, err = run(capsys, "scaling", "--law", "logdecay", "--lambda", "0")
        assert code == 2
        assert "critical coupling" in err

    def test_domination(self, capsys):
        code, out, _ = run(capsys, "scaling", "--law", "domination",
                           "--scales", "10", "31.6", "100", "316")
        assert code == 0
        assert "[PASS] domination-gap" in out
        assert "[PASS] domination-monotone" in out


class TestIntegrateCommand:
    def test_default_monomial(self, capsys):
        code, out, _ = run(capsys, "integrate")
        assert code == 0
        assert "[PASS] monomial-quadrature" in out

    def test_log_case_on_annulus(self, capsys):
        code, out, _ = run(capsys, "integrate", "--s", "-4", "--r-inner", "0.5")
        assert code == 0

    def test_nonintegrable_power_refused(self, capsys):
        code, _, err = run(capsys, "integrate", "--s", "-4.5")
        assert code == 2
        assert "not integrable" in err


class TestSimulateCommand:
    def test_zero_data(self, capsys, tmp_path):
        code, out, _ = run(capsys, "simulate", "--ic", "zero", "--boundary-value", "0",
                           "--t-end", "0.02", "--n-cells", "32", "--rho-min", "0.01",
                           "--out", str(tmp_path))
        assert code == 0
        doc = json.loads((tmp_path / "simulate.json").read_text())
        assert doc["status"] == "completed"
        assert doc["sup_final"] == 0.0
        lines = (tmp_path / "simulate-history.csv").read_text().splitlines()
        assert lines[0].startswith("# ")
        assert lines[1] == "t,sup_norm"
        assert (tmp_path / "simulate.svg").exists()

    def test_blow_up_still_exits_zero(self, capsys):
        code, out, _ = run(capsys, "simulate", "--a", "-2", "--t-end", "0.25",
                           "--n-cells", "64")
        assert code == 0
        assert "blown_up" in out

    def test_linear_flag(self, capsys):
        code, out, _ = run(capsys, "simulate", "--linear", "--a", "-2",
                           "--t-end", "0.02", "--n-cells", "32", "--rho-min", "0.01")
        assert code == 0
        assert "completed" in out


class TestPhaseSweepCommand:
    ARGS = ("phase-sweep", "--lambda-list", "0", "--a-list", "-2", "2",
            "--p-list", "2", "--t-end", "0.02", "--n-cells", "32",
            "--rho-min", "0.01", "--threads", "2")

    def test_csv_is_byte_deterministic(self, capsys, tmp_path):
        d1, d2 = tmp_path / "one", tmp_path / "two"
        assert run(capsys, *self.ARGS, "--out", str(d1))[0] == 0
        assert run(capsys, *self.ARGS, "--out", str(d2))[0] == 0
        assert (d1 / "phase-sweep.csv").read_bytes() == (d2 / "phase-sweep.csv").read_bytes()
        assert (d1 / "phase-sweep.svg").exists()

    def test_stdout_csv_when_no_out(self, capsys):
        code, out, _ = run(capsys, *self.ARGS)
        assert code == 0
        lines = out.splitlines()
        assert "lambda,a,p,k,status,blow_up_time,classifier_verdict,grid,dt_policy" in lines

    def test_inadmissible_cell_is_a_row_not_an_abort(self, capsys):
        code, out, _ = run(capsys, "phase-sweep", "--lambda-list", "-9",
                           "--a-list", "2", "--p-list", "2",
                           "--t-end", "0.02", "--n-cells", "32", "--rho-min", "0.01")
        assert code == 0
        assert "error:" in out

    def test_empty_list_is_parse_error(self, capsys):
        with raises(SystemExit) as exc:
            main(["phase-sweep", "--lambda-list"])
        assert exc.value.code == 2


class TestVerifyIdentities:
    SMALL = {
        "n_triples": 200, "n_points": 200, "n_div_points": 10,
        "mc_samples": 20000, "harmonic_points": 80, "flux_nodes": 60,
    }

    def test_all_suites_pass(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(self.SMALL))
        code, out, _ = run(capsys, "verify-identities", "--config", str(cfg),
                           "--out", str(tmp_path))
        assert code == 0
        assert out.count("[PASS]") == 9
        assert "verify-identities: 9/9 checks passed" in out
        doc = json.loads((tmp_path / "verify-identities.json").read_text())
        assert doc["summary"] == {"total": 9, "passed": 9, "failed": 0}
        assert {c["name"] for c in doc["checks"]} >= {
            "group-associativity", "gauge-gradient", "quadrature-vs-mc",
            "boundary-flux",
        }

    def test_zeroed_tolerances_fail(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(self.SMALL))
        code, out, _ = run(capsys, "verify-identities", "--config", str(cfg),
                           "--tol-scale", "0")
        assert code == 1
        assert "[FAIL]" in out


class TestReportCommand:
    def test_aggregates_suites(self, capsys, tmp_path):
        run(capsys, "integrate", "--out", str(tmp_path))
        cfg = tmp_path / "c.json"
        cfg.write_text('{"grid": 40}')
        run(capsys, "witness", "--lambda", "3", "--config", str(cfg),
            "--out", str(tmp_path))
        code, out, _ = run(capsys, "report", "--inputs",
                           str(tmp_path / "integrate.json"),
                           str(tmp_path / "witness.json"),
                           "--out", str(tmp_path))
        assert code == 0
        assert "report: 3/3 checks passed overall" in out
        doc = json.loads((tmp_path / "report.json").read_text())
        assert [s["suite"] for s in doc["suites"]] == ["integrate", "witness"]

    def test_failed_suite_propagates(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"tol": 0.0, "grid": 40}')
        run(capsys, "witness", "--lambda", "3", "--config", str(cfg),
            "--out", str(tmp_path))
        code, out, _ = run(capsys, "report", "--inputs", str(tmp_path / "witness.json"))
        assert code == 1

    def test_non_suite_input_rejected(self, capsys, tmp_path):
        stray = tmp_path / "stray.json"
        stray.write_text('{"hello": 1}')
        code, _, err = run(capsys, "report", "--inputs", str(stray))
        assert code == 2
        assert "does not look like a suite report" in err

    def test_no_inputs_rejected(self, capsys):
        code, _, err = run(capsys, "report")
        assert code == 2
        assert "at least one input" in err
