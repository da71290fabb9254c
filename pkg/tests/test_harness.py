import json
import textwrap

import numpy as np
import pytest

from hamsim.errors import SpecError
from hamsim.harness import (
    Report,
    check,
    cost,
    emit,
    load_spec,
    parse_spec,
    render,
    simulate,
    sweep,
    validate,
)
from hamsim.suites import UnknownSuiteError, available_suites, resolve_suites, run_suite

MINIMAL = """
[experiment]
scenario = pauli2
t = 1.0
algorithm = trotter
"""


def _spec(body: str):
    return parse_spec(textwrap.dedent(body))


class TestLoadSpec:
    def test_minimal_defaults(self):
        spec = _spec(MINIMAL)
        assert spec.shots == 100_000
        assert spec.seed == 0
        assert spec.initial_state == "zero"
        np.testing.assert_allclose(np.diag(spec.initial_rho()).real, [1, 0, 0, 0])
        assert spec.order == 1 and spec.mitigation == "none"
        assert spec.observable_label() == "ZI"

    def test_unknown_field_names_field_and_line(self):
        with pytest.raises(SpecError) as err:
            _spec(MINIMAL + "temperature = 3\n")
        assert err.value.field == "temperature"
        assert err.value.line == 6
        assert "temperature" in str(err.value)

    def test_unknown_section(self):
        with pytest.raises(SpecError) as err:
            _spec(MINIMAL + "[hardware]\nqpu = x\n")
        assert err.value.field == "hardware"

    def test_odd_order_rejected(self):
        with pytest.raises(SpecError) as err:
            _spec(MINIMAL + "order = 3\n")
        assert err.value.field == "order"

    @pytest.mark.parametrize(
        "extra, field",
        [
            ("steps = 0\n", "steps"),
            ("shots = -4\n", "shots"),
            ("observable = ZZZ\n", "observable"),
            ("initial_state = 2+\n", "initial_state"),
            ("[noise]\ngamma = 0.7\n", "gamma"),
            ("[noise]\nfamily = amplitude\n", "family"),
            ("[mitigation]\nmode = zne\n", "mode"),
            ("[sweep]\naxis = r\nvalues = 1 2\n", "axis"),
            ("[sweep]\naxis = d\n", "axis"),
        ],
    )
    def test_semantic_errors(self, extra, field):
        with pytest.raises(SpecError) as err:
            _spec(MINIMAL + extra)
        assert err.value.field == field

    def test_missing_hamiltonian(self):
        with pytest.raises(SpecError):
            _spec("[experiment]\nt = 1\nalgorithm = trotter\n")

    def test_both_scenario_and_file(self):
        with pytest.raises(SpecError):
            _spec(MINIMAL + "hamiltonian = h.ham\n")

    def test_sni_with_rlcu_rejected(self):
        body = MINIMAL.replace("trotter", "rlcu") + "[noise]\ngamma = 0.01\n[mitigation]\nmode = sni\n"
        with pytest.raises(SpecError):
            _spec(body)

    def test_hamiltonian_file_relative_to_spec(self, tmp_path):
        (tmp_path / "h.ham").write_text("0.5 XX\n-0.25 ZI\n")
        spec_path = tmp_path / "run.ini"
        spec_path.write_text("[experiment]\nhamiltonian = h.ham\nt = 0.3\nalgorithm = rlcu\nrepetitions = 2\n")
        spec = load_spec(spec_path)
        assert spec.hamiltonian().beta == pytest.approx(0.75)

    def test_hash_is_stable_and_sensitive(self):
        a, b = _spec(MINIMAL), _spec(MINIMAL)
        assert a.spec_hash() == b.spec_hash()
        assert a.replace(seed=1).spec_hash() != a.spec_hash()

    def test_cost_only_spec(self):
        spec = _spec("[experiment]\nt = 1\nalgorithm = trotter\norder = 2\n[noise]\ngamma = 0.001\n"
                     "[cost]\nalpha_k = 2\nterms = 4\n")
        rep = cost(spec)
        assert rep.records[0]["epsilon_b"] > 0


class TestReports:
    def _three_rows(self):
        return Report("demo", records=[{"a": 1, "b": 0.5}, {"a": 2, "b": None}, {"a": 3, "c": "x y"}])

    def test_csv_line_count(self):
        text = render(self._three_rows(), "csv")
        lines = text.splitlines()
        assert len(lines) == 4
        assert lines[0] == "a,b,c"

    def test_json_round_trip(self):
        rep = self._three_rows()
        rep.checks.append(check("bound", 0.1, "<=", 0.2))
        again = Report.from_json(rep.to_json())
        assert again.to_json() == rep.to_json()
        assert json.loads(rep.to_json())["checks"][0]["margin"] == pytest.approx(0.1)

    def test_plotdata_header(self):
        text = render(self._three_rows(), "plotdata")
        assert text.startswith("# a b c\n")
        assert text.splitlines()[2] == "2 nan nan"
        assert text.splitlines()[3] == "3 nan x_y"

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render(self._three_rows(), "xlsx")

    def test_empty_report(self):
        with pytest.raises(ValueError):
            render(Report("empty"), "csv")

    def test_emit_is_byte_stable(self, tmp_path):
        rep = self._three_rows()
        p1 = emit(rep, "csv", tmp_path / "a")
        p2 = emit(rep, "csv", tmp_path / "b")
        assert p1.read_bytes() == p2.read_bytes()

    def test_emit_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError):
            emit(self._three_rows(), "csv", blocker / "sub")

    def test_margins_and_required(self):
        c = check("x", 3.0, "<=", 2.0)
        assert not c.passed and c.margin == -1.0
        rep = Report("r", checks=[c, check("y", 1.0, "<=", 0.5, required=False)])
        assert not rep.passed
        assert rep.failures == [c]
        assert Report("r", checks=[check("y", 1.0, "<=", 0.5, required=False)]).passed


class TestCommands:
    def test_simulate_pec(self):
        spec = _spec(MINIMAL + "steps = 2\nshots = 20000\n[noise]\ngamma = 0.01\n[mitigation]\nmode = pec\n")
        rep = simulate(spec)
        rec = rep.records[0]
        assert abs(rec["mean"] - rec["trotter_ideal"]) <= 4 * rec["stderr"] + 1e-12
        assert rep.provenance["seed"] == 0
        assert rep.provenance["spec_hash"] == spec.spec_hash()

    def test_simulate_rlcu(self):
        spec = _spec(MINIMAL.replace("trotter", "rlcu") + "repetitions = 2\nshots = 20000\n")
        rep = simulate(spec)
        assert rep.passed

    def test_depth_sweep_rows(self):
        values = " ".join(str(d) for d in range(1, 65))
        spec = _spec(MINIMAL + f"[noise]\ngamma = 0.005\n[sweep]\naxis = d\nvalues = {values}\n")
        rep = sweep(spec)
        assert len(rep.records) == 64
        assert {"bias", "bound_total"} <= set(rep.records[0])
        assert len(render(rep, "csv").splitlines()) == 65
        assert rep.passed

    def test_epsilon_sweep_shows_regime_change(self):
        spec = _spec(MINIMAL + "[noise]\ngamma = 0.005\n[mitigation]\nmode = pec\n[sweep]\naxis = epsilon\n"
                     "values = 1e-4 1e-3 1e-2 1e-1\n")
        regimes = [r["regime"] for r in sweep(spec).records]
        assert regimes[0] == "below_critical" and regimes[-1] == "above_critical"

    def test_segment_sweep_sandwich(self):
        spec = _spec(MINIMAL + "steps = 50\n[noise]\ngamma = 0.005\n[mitigation]\nmode = sni\n"
                     "[sweep]\naxis = s\nvalues = 2 4 8\n")
        rep = sweep(spec)
        assert [r["s"] for r in rep.records] == [2, 4, 8]
        assert rep.passed

    def test_sweep_without_axis(self):
        with pytest.raises(SpecError):
            sweep(_spec(MINIMAL))


class TestSuites:
    def test_registry(self):
        assert "pec-exact" in available_suites()
        assert resolve_suites("sni, cost-scaling") == ("sni", "cost-scaling")
        assert "trotter-bias" in resolve_suites("all")

    @pytest.mark.parametrize("text", ["", "  ", "nonsense"])
    def test_bad_suite_ids_list_available(self, text):
        with pytest.raises(UnknownSuiteError) as err:
            resolve_suites(text)
        assert "pec-exact" in str(err.value)

    def test_validate_rejects_empty(self):
        with pytest.raises(UnknownSuiteError):
            validate(suites="")

    def test_trotter_bias_suite_passes(self):
        rep = run_suite("trotter-bias")
        assert rep.passed
        assert all(c.passed for c in rep.checks)

    def test_checks_record_both_sides(self):
        rep = run_suite("cost-scaling")
        for c in rep.checks:
            assert np.isfinite(c.value) and np.isfinite(c.bound)
            assert c.passed == check(c.name, c.value, c.relation, c.bound).passed
