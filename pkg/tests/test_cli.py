import csv
import io
import json
import subprocess
import sys
from importlib import resources

import pytest

from wpcn import analytic, cli
from wpcn.errors import ConfigError, NumericFailure
from wpcn.model import SystemParams

CONFIGS = resources.files("wpcn") / "configs"


def spec_of(doc):
    return cli.load_config(io.StringIO(json.dumps(doc)))


def csv_text(rows):
    buf = io.StringIO(newline="")
    cli.write_csv(rows, buf)
    return buf.getvalue()


def parse(text):
    return list(csv.DictReader(io.StringIO(text, newline="")))


class TestLoadConfig:
    def test_minimal_defaults(self):
        spec = spec_of({"axis": "tau", "values": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]})
        assert spec.base == SystemParams(n_antennas=2, tx_power_dbm=30.0, efficiency=0.5,
                                         noise_power_dbm=-80.0, rate=2.0, tau=0.5, omega=1e-5)
        assert spec.modes == analytic.MODES and spec.estimators == ("exact",)
        assert spec.mc.trials == 100_000 and spec.mc.seed == 0

    def test_link_budget(self):
        spec = spec_of({"axis": "tau", "values": [0.5],
                        "base": {"link": {"distance_m": 10, "path_loss_exponent": 3}}})
        assert spec.base.omega == pytest.approx(1e-6)

    def test_path(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"axis": "n_antennas", "values": [1, 2]}), encoding="utf-8")
        assert cli.load_config(path).values == (1, 2)
        assert cli.load_config(str(path)).axis == "n_antennas"

    @pytest.mark.parametrize("doc, message", [
        ({"axis": "tau", "values": []}, "values non-empty"),
        ({"axis": "tau", "values": [0.5], "base": {"tau": 1.5}}, r"tau ∈ \[0,1\]"),
        ({"axis": "tau", "values": [0.5, 1.5]}, r"tau ∈ \[0,1\]"),
        ({"axis": "tau", "values": [0.5, 0.4]}, "strictly increasing"),
        ({"axis": "tau", "values": [0.5], "colour": 1}, "colour"),
        ({"axis": "tau", "values": [0.5], "base": {"power": 1}}, "base.power"),
        ({"axis": "tau", "values": [0.5], "base": {"link": {"height": 1}}}, "base.link.height"),
        ({"axis": "tau", "values": [0.5], "mc": {"trails": 1}}, "mc.trails"),
        ({"axis": "tau", "values": [0.5], "mc": {"trials": 0}}, "trials"),
        ({"axis": "rate", "values": [1]}, "axis"),
        ({"values": [1]}, "axis"),
        ({"axis": "tau"}, "values"),
        ({"axis": "tau", "values": [0.5], "modes": ["bursty"]}, "modes"),
        ({"axis": "tau", "values": [0.5], "estimators": []}, "estimators"),
        ({"axis": "tau", "values": [0.5], "base": {"rate": [1, 2]}}, "base.rate"),
        ({"axis": "tau", "values": [0.5], "base": {"efficiency": "high"}}, "base.efficiency"),
        ({"axis": "n_antennas", "values": [0, 1]}, "n_antennas"),
        ({"axis": "tau", "values": [0.5], "base": {"link": {"path_loss_exponent": 7}}},
         "path_loss_exponent"),
    ])
    def test_errors(self, doc, message):
        with pytest.raises(ConfigError, match=message):
            spec_of(doc)

    def test_malformed_json(self):
        with pytest.raises(ConfigError, match="malformed JSON"):
            cli.load_config(io.StringIO("{\"axis\": "))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            cli.load_config(tmp_path / "absent.json")

    @pytest.mark.parametrize("name", ["fig2a", "fig2b", "fig3", "fig4", "fig5"])
    def test_shipped_configs_load(self, name):
        spec = cli.load_config(CONFIGS / f"{name}.json")
        assert spec.points()


class TestSweep:
    def test_row_count(self):
        spec = spec_of({"axis": "tx_power_dbm", "values": [20, 25, 30, 35, 40]})
        rows = cli.run_sweep(spec)
        assert len(rows) == 10
        assert [(r.axis_value, r.mode) for r in rows[:4]] == [
            (20, "delay_limited"), (20, "delay_tolerant"), (25, "delay_limited"),
            (25, "delay_tolerant")]

    def test_series_order(self):
        spec = spec_of({"axis": "tx_power_dbm", "values": [20, 30],
                        "base": {"n_antennas": [1, 2], "tau": [0.2, 0.5]},
                        "modes": ["delay_limited"], "estimators": ["exact", "approx"]})
        rows = cli.run_sweep(spec)
        assert len(rows) == 2 * 4 * 2
        keys = [(r.axis_value, r.N, r.tau, r.estimator) for r in rows]
        assert keys == sorted(keys, key=lambda k: (k[0], k[1], k[2], k[3] != "exact"))

    def test_values_match_library(self):
        spec = spec_of({"axis": "tau", "values": [0.3],
                        "estimators": ["exact", "asymptotic", "monte_carlo"],
                        "mc": {"trials": 5000, "seed": 3}})
        rows = {(r.mode, r.estimator): r for r in cli.run_sweep(spec)}
        p = SystemParams(tau=0.3)
        assert rows["delay_limited", "exact"].value == analytic.throughput_delay_limited(p)
        assert rows["delay_tolerant", "exact"].value == analytic.throughput_delay_tolerant(p)
        assert rows["delay_limited", "exact"].stderr is None
        assert rows["delay_limited", "exact"].trials is None
        assert rows["delay_tolerant", "monte_carlo"].trials == 5000
        assert rows["delay_tolerant", "monte_carlo"].stderr > 0

    def test_error_rows_do_not_stop_run(self, caplog):
        spec = spec_of({"axis": "tx_power_dbm", "values": [25, 40], "base": {"n_antennas": 1},
                        "estimators": ["approx", "optimal_tau_closed"]})
        rows = cli.run_sweep(spec)
        by = {(r.axis_value, r.mode, r.estimator): r.value for r in rows}
        assert by[25, "delay_tolerant", "approx"] == "error"
        assert by[25, "delay_limited", "optimal_tau_closed"] == "error"
        assert isinstance(by[40, "delay_limited", "optimal_tau_closed"], float)
        assert "use search" in caplog.text

    def test_interior_maximum_over_tau(self):
        doc = json.loads((CONFIGS / "fig4.json").read_text(encoding="utf-8"))
        doc["estimators"] = ["exact"]
        spec = spec_of(doc)
        rows = cli.run_sweep(spec)
        curves = {}
        for r in rows:
            curves.setdefault((r.mode, r.N, r.P_dbm), []).append(r.value)
        assert len(curves) == 2 * 2 * 2
        for vals in curves.values():
            k = vals.index(max(vals))
            assert 0 < k < len(vals) - 1

    def test_closed_form_tau_decreasing_in_power(self):
        spec = spec_of({"axis": "tx_power_dbm", "values": [35, 40, 45, 50, 55],
                        "base": {"n_antennas": [2, 5, 10]},
                        "estimators": ["optimal_tau_closed"]})
        rows = cli.run_sweep(spec)
        for mode in analytic.MODES:
            for n in (2, 5, 10):
                taus = [r.value for r in rows if r.mode == mode and r.N == n]
                assert all(b < a for a, b in zip(taus, taus[1:]))

    def test_csv_format(self):
        spec = spec_of({"axis": "tau", "values": [0.25, 0.5], "modes": ["delay_limited"],
                        "estimators": ["exact", "monte_carlo"], "mc": {"trials": 1000}})
        text = csv_text(cli.run_sweep(spec))
        lines = text.split("\r\n")
        assert lines[0] == ",".join(cli.CSV_FIELDS)
        assert lines[-1] == "" and len(lines) == 1 + 4 + 1
        rows = parse(text)
        assert rows[0]["stderr"] == "" and rows[0]["trials"] == "" and rows[0]["seed"] == "0"
        assert rows[1]["trials"] == "1000"
        for r in rows:
            if r["estimator"] == "exact":
                assert repr(float(r["value"])) == r["value"]

    @pytest.mark.parametrize("workers", [2, 5])
    def test_deterministic_across_workers(self, workers):
        spec = spec_of({"axis": "tx_power_dbm", "values": [20, 30, 40],
                        "base": {"n_antennas": [1, 4]},
                        "estimators": ["exact", "monte_carlo", "optimal_tau_search"],
                        "mc": {"trials": 20000, "seed": 7}})
        assert csv_text(cli.run_sweep(spec, workers)) == csv_text(cli.run_sweep(spec, 1))

    def test_optimal_tau_verb(self):
        spec = spec_of({"axis": "tx_power_dbm", "values": [40]})
        rows = cli.run_optimal_tau(spec)
        assert [(r.mode, r.estimator) for r in rows] == [
            ("delay_limited", "optimal_tau_closed"), ("delay_limited", "optimal_tau_search"),
            ("delay_tolerant", "optimal_tau_closed"), ("delay_tolerant", "optimal_tau_search")]

    def test_gnuplot_script(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"axis": "tx_power_dbm", "values": [20, 30],
                                   "base": {"n_antennas": [1, 2]}}), encoding="utf-8")
        out = tmp_path / "out.csv"
        assert cli.main(["sweep", str(cfg), "-o", str(out), "--gnuplot"]) == 0
        script = (tmp_path / "out.gp").read_text(encoding="utf-8")
        assert '"out.csv"' in script and script.count("with linespoints") == 4


class TestValidate:
    FIG_GRID = {"axis": "tx_power_dbm", "values": [20, 25, 30, 35, 40],
                "base": {"n_antennas": [1, 2, 5, 10]},
                "estimators": ["exact", "monte_carlo"]}

    def test_default_grid_passes(self):
        doc = dict(self.FIG_GRID, mc={"trials": 10 ** 6, "seed": 0})
        ok, max_z, report = cli.validate(spec_of(doc), workers=4)
        assert ok, report
        assert "max |z|" in report

    def test_corrupted_omega_fails(self, monkeypatch):
        exact_lim = analytic.throughput_delay_limited
        exact_tol = analytic.throughput_delay_tolerant
        bad = lambda f: lambda p, *a: f(p.replace(omega=p.omega * 10), *a)
        monkeypatch.setattr(analytic, "throughput_delay_limited", bad(exact_lim))
        monkeypatch.setattr(analytic, "throughput_delay_tolerant", bad(exact_tol))
        doc = dict(self.FIG_GRID, mc={"trials": 10 ** 5, "seed": 0})
        ok, max_z, _ = cli.validate(spec_of(doc))
        assert not ok and max_z > 40

    def test_needs_monte_carlo(self):
        with pytest.raises(ConfigError):
            cli.validate(spec_of({"axis": "tau", "values": [0.5], "estimators": ["exact"]}))

    def test_needs_exact(self):
        with pytest.raises(ConfigError):
            cli.validate(spec_of({"axis": "tau", "values": [0.5],
                                  "estimators": ["approx", "monte_carlo"]}))


class TestMain:
    def write(self, tmp_path, doc):
        path = tmp_path / "c.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        return str(path)

    def test_sweep_stdout(self, tmp_path, capsys):
        assert cli.main(["sweep", self.write(tmp_path, {"axis": "tau", "values": [0.5]})]) == 0
        assert capsys.readouterr().out.startswith("mode,axis_name")

    def test_config_error_exit(self, tmp_path, capsys):
        assert cli.main(["sweep", self.write(tmp_path, {"axis": "tau", "values": []})]) == 2
        assert "values non-empty" in capsys.readouterr().err

    def test_gnuplot_needs_output(self, tmp_path):
        assert cli.main(["sweep", self.write(tmp_path, {"axis": "tau", "values": [0.5]}),
                         "--gnuplot"]) == 2

    def test_validation_exit_codes(self, tmp_path, monkeypatch):
        path = self.write(tmp_path, {"axis": "tau", "values": [0.5],
                                     "estimators": ["exact", "monte_carlo"],
                                     "mc": {"trials": 20000}})
        assert cli.main(["validate", path]) == 0
        monkeypatch.setattr(analytic, "throughput_delay_tolerant", lambda p, *a: 10.0)
        assert cli.main(["validate", path]) == 1

    def test_numeric_failure_exit(self, tmp_path, monkeypatch):
        def boom(p, *a):
            raise NumericFailure("quadrature unconverged", partial=0.0)
        monkeypatch.setattr(analytic, "throughput_delay_tolerant", boom)
        path = self.write(tmp_path, {"axis": "tau", "values": [0.5],
                                     "estimators": ["exact", "monte_carlo"],
                                     "mc": {"trials": 1000}})
        assert cli.main(["validate", path]) == 3

    def test_optimal_tau_file(self, tmp_path):
        out = tmp_path / "tau.csv"
        path = self.write(tmp_path, {"axis": "tx_power_dbm", "values": [40, 45]})
        assert cli.main(["optimal-tau", path, "-o", str(out)]) == 0
        assert len(parse(out.read_text(encoding="utf-8"))) == 8

    def test_module_entry_point(self, tmp_path):
        path = self.write(tmp_path, {"axis": "tau", "values": [0.5], "modes": ["delay_limited"]})
        res = subprocess.run([sys.executable, "-m", "wpcn", "sweep", path],
                             capture_output=True, check=True)
        assert res.stdout.count(b"\r\n") == 2
