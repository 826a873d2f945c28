import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mmv2v import analytics
from mmv2v.analytics import QuadratureError
from mmv2v.experiments import cli
from mmv2v.experiments.config import DEFAULTS, ConfigError, load_config, parse_config, parse_values
from mmv2v.experiments.output import emit, read_csv, render_svg, write_csv
from mmv2v.experiments.sweep import ROW_FIELDS, SweepResult, SweepRow, SweepSpec, evaluate_point, run_sweep
from mmv2v.montecarlo import ScenarioConfig

SVG = "{http://www.w3.org/2000/svg}"


class TestConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.cfg"
        path.write_text("")
        cfg = load_config(path)
        assert isinstance(cfg, ScenarioConfig)
        assert cfg == ScenarioConfig()

    def test_defaults_table_matches_scenario(self):
        cfg = parse_config("# nothing\n\n")
        assert cfg.lt == DEFAULTS["lt"]
        assert cfg.budget.sigma == DEFAULTS["sigma"]
        assert cfg.headway.mu == DEFAULTS["mu"]
        assert cfg.geom.eta == pytest.approx(0.04)

    def test_override(self):
        cfg = parse_config("lt = 140   # metres\nseed = 9\n")
        assert cfg.lt == 140.0
        assert cfg.seed == 9
        assert cfg.budget == ScenarioConfig().budget

    @pytest.mark.parametrize(
        "text, key",
        [
            ("lt = 800", "lt"),
            ("lt = 1000", "lt"),
            ("bogus = 1", "bogus"),
            ("alpha = two", "alpha"),
            ("alpha = 2.9\nalpha = 3.0", "alpha"),
            ("sigma = -1", "sigma"),
            ("replications = 2.5", "replications"),
            ("t_t = 1e-3", "t_t"),
            ("values = 1,2", "values"),
        ],
    )
    def test_bad_input_names_key(self, text, key):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.key == key
        assert key in str(info.value)

    def test_line_without_equals(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("lt = 100\nlt 120\n")

    def test_sweep_file(self):
        spec = parse_config("sweep = lt\nvalues = 60:240:20\nmodes = analytic\nalpha = 3.1\n")
        assert isinstance(spec, SweepSpec)
        assert spec.values == tuple(float(v) for v in range(60, 241, 20))
        assert spec.modes == ("analytic",)
        assert spec.config_at(80.0).budget.alpha == 3.1
        assert spec.config_at(80.0).lt == 80.0

    def test_swept_key_overridden(self):
        with pytest.raises(ConfigError) as info:
            parse_config("sweep = lt\nvalues = 60,80\nlt = 100\n")
        assert info.value.key == "lt"

    @pytest.mark.parametrize("values", ["80,60", "60,60", ""])
    def test_values_must_increase(self, values):
        with pytest.raises(ConfigError) as info:
            parse_config(f"sweep = alpha\nvalues = {values}\n")
        assert info.value.key == "values"

    def test_sweep_point_invalid(self):
        with pytest.raises(ConfigError) as info:
            SweepSpec.create("lt", [100.0, 900.0])
        assert info.value.key == "lt"

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            SweepSpec.create("lt", [100.0], modes=["analytic", "guess"])

    def test_parse_values(self):
        assert parse_values("2.5:3.5:0.25") == [2.5, 2.75, 3.0, 3.25, 3.5]
        assert parse_values("1, 2,3") == [1.0, 2.0, 3.0]
        with pytest.raises(ConfigError):
            parse_values("1:2:0")


@pytest.fixture(scope="module")
def lt_sweep():
    return run_sweep(SweepSpec.create("lt", parse_values("60:240:20"), modes=["analytic"]))


class TestSweep:
    def test_lt_sweep_shape(self, lt_sweep):
        assert len(lt_sweep.rows) == 10
        delays = lt_sweep.column("analytic_delay")
        i = int(np.argmin(delays))
        assert 0 < i < len(delays) - 1
        assert all(np.diff(delays[: i + 1]) < 0)
        assert all(np.diff(delays[i:]) > 0)
        assert all(math.isnan(x) for x in lt_sweep.column("sim_delay"))

    def test_alpha_sweep_reliability_decreases(self):
        res = run_sweep(SweepSpec.create("alpha", [2.5, 2.7, 2.9, 3.1, 3.3], modes=["analytic"]))
        rel = res.column("analytic_reliability")
        assert all(np.diff(rel) < 0)

    def test_single_point_equals_direct_call(self):
        spec = SweepSpec.create("epsilon", [5.0], modes=["analytic"])
        row = run_sweep(spec).rows[0]
        cfg = ScenarioConfig()
        assert row.analytic_delay == analytics.avg_total_delay(cfg.budget, cfg.r_valid, cfg.lt).value
        assert row.analytic_reliability == analytics.avg_total_reliability(
            cfg.budget, cfg.r_valid, cfg.lt, cfg.epsilon).value
        assert row.hop_count_analytic == pytest.approx(20.0)

    def test_simulated_point(self):
        spec = SweepSpec.create("lt", [100.0], overrides={"replications": 50})
        row = evaluate_point(spec, 100.0)
        assert 0 <= row.sim_reliability <= 1
        assert row.sim_delay > 0 and row.sim_delay_ci > 0
        assert row.mean_hops_sim > 10

    def test_parallel_matches_serial(self):
        spec = SweepSpec.create("lt", [80.0, 120.0], overrides={"replications": 20})
        a = run_sweep(spec, workers=1)
        b = run_sweep(spec, workers=2)
        assert a == b


class TestOutput:
    def test_empty_result_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv(SweepResult("alpha", []), path)
        assert path.read_text() == ",".join(("alpha",) + ROW_FIELDS[1:]) + "\n"
        assert read_csv(path).rows == []

    def test_round_trip(self, tmp_path, lt_sweep):
        path = tmp_path / "lt.csv"
        write_csv(lt_sweep, path)
        back = read_csv(path)
        assert back.variable == "lt"
        for a, b in zip(back.rows, lt_sweep.rows):
            for name in ROW_FIELDS:
                x, y = getattr(a, name), getattr(b, name)
                assert x == y or (math.isnan(x) and math.isnan(y))

    def test_byte_identical_reruns(self, tmp_path):
        spec = SweepSpec.create("lt", [80.0, 120.0], overrides={"replications": 30, "seed": 4})
        paths = []
        for k in range(2):
            p = tmp_path / f"run{k}"
            result = run_sweep(spec)
            emit(result, "csv", f"{p}.csv")
            emit(result, "svg", f"{p}.svg")
            paths.append(p)
        for ext in ("csv", "svg"):
            assert (tmp_path / f"run0.{ext}").read_bytes() == (tmp_path / f"run1.{ext}").read_bytes()

    def test_svg_points_match_csv(self):
        rows = [
            SweepRow(60.0, 3e-3, 0.95, 3.1e-3, 1e-4, 0.94, 0.01),
            SweepRow(100.0, 2.5e-3, 0.93, 2.6e-3, 5e-5, 0.92, 0.01),
            SweepRow(140.0, 2.3e-3, 0.91, 2.45e-3, 5e-5, 0.9, 0.012),
        ]
        result = SweepResult("lt", rows)
        root = ET.fromstring(render_svg(result))
        panels = root.findall(f"{SVG}g[@class='panel']")
        assert len(panels) == 2
        for panel in panels:
            xmin, xmax = float(panel.get("data-xmin")), float(panel.get("data-xmax"))
            ymin, ymax = float(panel.get("data-ymin")), float(panel.get("data-ymax"))
            left, top = float(panel.get("data-left")), float(panel.get("data-top"))
            width, height = float(panel.get("data-width")), float(panel.get("data-height"))
            series = panel.findall(f"{SVG}g[@class='series']")
            assert {s.get("data-series") for s in series} == {"analytic", "simulated"}
            for s in series:
                column = s.get("data-column")
                circles = s.findall(f"{SVG}circle")
                assert [float(c.get("data-x")) for c in circles] == result.column("value")
                assert [float(c.get("data-y")) for c in circles] == result.column(column)
                for c in circles:
                    x, y = float(c.get("data-x")), float(c.get("data-y"))
                    assert float(c.get("cx")) == pytest.approx(left + (x - xmin) / (xmax - xmin) * width, abs=1e-3)
                    assert float(c.get("cy")) == pytest.approx(top + height - (y - ymin) / (ymax - ymin) * height,
                                                               abs=1e-3)

    def test_svg_skips_missing_series(self, lt_sweep):
        root = ET.fromstring(render_svg(lt_sweep))
        names = {g.get("data-series") for g in root.iter(f"{SVG}g") if g.get("class") == "series"}
        assert names == {"analytic"}

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit(SweepResult("lt", []), "png", tmp_path / "x.png")


class TestCli:
    def test_run_analytic(self, tmp_path):
        out = tmp_path / "res"
        code = cli.main(["run", "--sweep", "lt", "--values", "80,100,120", "--modes", "analytic", "--out", str(out)])
        assert code == cli.EXIT_OK
        result = read_csv(f"{out}.csv")
        assert result.column("value") == [80.0, 100.0, 120.0]
        ET.parse(f"{out}.svg")

    def test_run_from_config(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("sweep = alpha\nvalues = 2.7,3.1\nmodes = analytic\nlt = 140\n")
        out = tmp_path / "res"
        assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == cli.EXIT_OK
        assert read_csv(f"{out}.csv").variable == "alpha"

    def test_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("lt = 2000\n")
        code = cli.main(["run", "--config", str(cfg), "--sweep", "alpha", "--values", "3", "--out", str(tmp_path / "x")])
        assert code == cli.EXIT_CONFIG
        assert "lt" in capsys.readouterr().err

    def test_missing_sweep(self, tmp_path):
        assert cli.main(["run", "--out", str(tmp_path / "x")]) == cli.EXIT_CONFIG

    def test_bad_argument(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            cli.main(["run", "--sweep", "nope", "--values", "1", "--out", str(tmp_path / "x")])
        assert info.value.code == cli.EXIT_CONFIG

    def test_numeric_error(self, tmp_path, monkeypatch):
        def fail(*args, **kwargs):
            raise QuadratureError("did not converge", 4321)

        monkeypatch.setattr(analytics, "avg_total_delay", fail)
        code = cli.main(["run", "--sweep", "lt", "--values", "100", "--modes", "analytic",
                         "--out", str(tmp_path / "x")])
        assert code == cli.EXIT_NUMERIC

    def test_io_error(self, tmp_path):
        code = cli.main(["run", "--sweep", "lt", "--values", "100", "--modes", "analytic",
                         "--out", str(tmp_path / "missing" / "x")])
        assert code == cli.EXIT_IO

    def test_missing_config_file(self, tmp_path):
        code = cli.main(["run", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "x")])
        assert code == cli.EXIT_IO

    def test_field_dump(self, tmp_path):
        out = tmp_path / "field.csv"
        assert cli.main(["field", "--seed", "3", "--out", str(out)]) == cli.EXIT_OK
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        assert out.read_text().splitlines()[0] == "road_id,x,y"
        assert data.shape[0] > 100
        on_vertical = np.isclose(np.mod(data[:, 1], 50.0), 0.0)
        on_horizontal = np.isclose(np.mod(data[:, 2], 50.0), 0.0)
        assert np.all(on_vertical | on_horizontal)
        again = tmp_path / "again.csv"
        cli.main(["field", "--seed", "3", "--out", str(again)])
        assert again.read_bytes() == out.read_bytes()
