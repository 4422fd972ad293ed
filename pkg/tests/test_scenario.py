import math
import os

import numpy as np
import pytest

from rydbec import dynamics as dyn
from rydbec.errors import TruncationError
from rydbec.scenario import (
    COLUMNS,
    PRESETS,
    PRESET_PARAMS,
    ConfigError,
    ScenarioConfig,
    TauGrid,
    TimeSeries,
    apply_overrides,
    check_complementarity,
    emit_csv,
    parse_config,
    parse_number,
    preset_configs,
    read_csv,
    run_preset,
    run_scenario,
    series_to_csv,
)

CLOSED = """
[scenario]
mode = closed-coherent
theta = pi/4
[params]
omega = 1
lambda_c = 1
[bec]
alpha = 2
[grid]
stop = 2*pi
points = {points}
"""

LINDBLAD = """
[scenario]
mode = lindblad
[params]
lambda_c = 1
kappa = {kappa}
[bec]
alpha = 1
[grid]
start = {start}
stop = 1.0
points = 11
[integrator]
dt = 0.01
"""


class TestParseNumber:
    @pytest.mark.parametrize("text,value", [("1.5", 1.5), ("pi/4", math.pi / 4), ("2*pi", 2 * math.pi), ("-3", -3), ("1e-3", 1e-3)])
    def test_values(self, text, value):
        assert parse_number(text, "x") == pytest.approx(value)

    def test_complex(self):
        assert parse_number("1+2j", "x", allow_complex=True) == 1 + 2j
        with pytest.raises(ConfigError):
            parse_number("1+2j", "x")

    @pytest.mark.parametrize("text", ["__import__('os')", "abc", "", "2**1000000", "[1]"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError) as exc:
            parse_number(text, "grid.stop")
        assert exc.value.field == "grid.stop"


class TestParseConfig:
    def test_closed(self):
        cfg = parse_config(CLOSED.format(points=11))
        assert cfg.mode == "closed-coherent"
        assert cfg.theta == pytest.approx(math.pi / 4)
        assert cfg.alpha == 2
        assert cfg.tau_grid == TauGrid(0.0, 2 * math.pi, 11)
        assert cfg.integrator is None

    def test_lindblad_gets_default_integrator(self):
        text = LINDBLAD.format(kappa=0, start=0).replace("[integrator]\ndt = 0.01\n", "")
        assert parse_config(text).integrator is not None

    def test_raw_time_unit(self):
        text = CLOSED.format(points=5).replace("lambda_c = 1", "lambda_c = 2").replace("theta = pi/4", "theta = pi/4\ntime_unit = t")
        cfg = parse_config(text)
        assert cfg.tau_grid.stop == pytest.approx(4 * math.pi)

    @pytest.mark.parametrize(
        "edit,field",
        [
            (("points = 11", "points = 1"), "grid.points"),
            (("points = 11", "points = ten"), "grid.points"),
            (("stop = 2*pi", "stop = -1"), "grid.stop"),
            (("mode = closed-coherent", "mode = magic"), "scenario.mode"),
            (("alpha = 2", "alpha = two"), "bec.alpha"),
            (("omega = 1", "omega = 1\nkappa = -1"), "params.kappa"),
            (("omega = 1", "omgea = 1"), "params.omgea"),
            (("lambda_c = 1", "lambda_c = 0"), "params.lambda_c"),
            (("alpha = 2", "alpha = 2\namplitudes = 1, 0"), "bec"),
            (("theta = pi/4", "theta = pi/4\noutputs = c_mimi, bogus"), "scenario.outputs"),
            (("[grid]", "[gird]"), "gird"),
        ],
    )
    def test_errors_name_field(self, edit, field):
        text = CLOSED.format(points=11).replace(*edit)
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert exc.value.field == field
        assert field in str(exc.value)

    def test_missing_section(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[scenario]\nmode = lindblad\n")
        assert exc.value.field == "params"

    def test_amplitudes(self):
        text = CLOSED.format(points=5).replace("closed-coherent", "closed-general").replace("alpha = 2", "amplitudes = 1, 1j")
        cfg = parse_config(text)
        bec = cfg.bec()
        np.testing.assert_allclose(bec.amplitudes, np.array([1, 1j]) / math.sqrt(2))

    def test_overrides(self):
        cfg = parse_config(LINDBLAD.format(kappa=0, start=0))
        new = apply_overrides(cfg, cutoff=20, dt=0.005, tau_max=2.0, points=21, kappa=0.1)
        assert new.fock_cutoff == 20
        assert new.integrator.dt == 0.005
        assert new.tau_grid == TauGrid(0.0, 2.0, 21)
        assert new.params.kappa == 0.1
        with pytest.raises(ConfigError):
            apply_overrides(cfg, kappa=-1)


class TestRun:
    def test_closed_columns(self):
        series = run_scenario(parse_config(CLOSED.format(points=101)))
        t = series.tau
        np.testing.assert_allclose(series.columns["c_mimi"], dyn.concurrence_mimi_closed(math.pi / 4, 2, PRESET_PARAMS, t), atol=1e-14)
        assert np.max(np.abs(series.columns["residual"])) < 1e-12
        # pure global state: 2 * negativity equals the concurrence on each side
        np.testing.assert_allclose(2 * series.columns["neg_mimi"], series.columns["c_mimi"], atol=1e-12)
        np.testing.assert_allclose(2 * series.columns["neg_mima"], series.columns["c_mima"], atol=1e-8)
        assert "trace" not in series.columns

    def test_general_matches_coherent(self):
        text = CLOSED.format(points=41)
        a = run_scenario(parse_config(text))
        b = run_scenario(parse_config(text.replace("closed-coherent", "closed-general")))
        for col in ("c_mimi", "c_mima", "neg_mimi"):
            np.testing.assert_allclose(a.columns[col], b.columns[col], atol=1e-9)

    def test_lindblad_samples_on_grid_with_offset_start(self):
        full = run_scenario(parse_config(LINDBLAD.format(kappa=0.1, start=0)))
        tail = run_scenario(parse_config(LINDBLAD.format(kappa=0.1, start=0.5).replace("points = 11", "points = 6")))
        np.testing.assert_allclose(tail.tau, full.tau[5:], atol=1e-15)
        np.testing.assert_allclose(tail.columns["c_mimi"], full.columns["c_mimi"][5:], atol=1e-9)
        assert "c_mima" not in full.columns

    def test_truncation_propagates(self):
        text = CLOSED.format(points=5).replace("closed-coherent", "closed-general").replace("alpha = 2", "alpha = 2\ncutoff = 5")
        with pytest.raises(TruncationError):
            run_scenario(parse_config(text))


class TestCsv:
    def test_line_count_and_header(self, tmp_path):
        series = run_scenario(parse_config(CLOSED.format(points=3)))
        path = emit_csv(series, tmp_path / "out.csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0] == ",".join(COLUMNS)
        # columns unavailable in closed mode are empty
        assert lines[1].endswith(",,")

    def test_significant_digits(self):
        series = TimeSeries(np.array([0.0, 1 / 3]), {"c_mimi": np.array([1.0, 2 / 3])})
        row = series_to_csv(series).splitlines()[2].split(",")
        assert float(row[1]) == 2 / 3

    def test_byte_identical_reruns(self, tmp_path):
        cfg = parse_config(LINDBLAD.format(kappa=0.05, start=0))
        a = emit_csv(run_scenario(cfg), tmp_path / "a.csv")
        b = emit_csv(run_scenario(cfg), tmp_path / "b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_round_trip(self, tmp_path):
        series = run_scenario(parse_config(CLOSED.format(points=17)))
        back = read_csv(emit_csv(series, tmp_path / "r.csv"))
        np.testing.assert_array_equal(back["c_mima"], series.columns["c_mima"])
        assert back["trace"] is None

    def test_invalid_series_rejected(self):
        with pytest.raises(Exception):
            TimeSeries(np.array([1.0, 0.0]), {}).validate()
        with pytest.raises(Exception):
            TimeSeries(np.array([0.0, 1.0]), {"c_mimi": np.array([0.5, 1.5])}).validate()

    def test_no_partial_file_on_failure(self, tmp_path, monkeypatch):
        series = run_scenario(parse_config(CLOSED.format(points=3)))

        def boom(*a, **k):
            raise OSError("disk full")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(OSError):
            emit_csv(series, tmp_path / "x.csv")
        assert list(tmp_path.iterdir()) == []


class TestComplementarity:
    def test_exact_identity(self):
        report = check_complementarity(parse_config(CLOSED.format(points=500)))
        assert report.identity_expected
        assert report.max_residual < 1e-10

    def test_separable(self):
        report = check_complementarity(parse_config(CLOSED.format(points=50).replace("theta = pi/4", "theta = 0")))
        assert report.max_residual == 0.0
        assert report.negativity_residual == 0.0

    def test_decay_flagged(self):
        report = check_complementarity(parse_config(LINDBLAD.format(kappa=0.02, start=0)))
        assert not report.identity_expected
        assert report.max_residual is None
        assert report.negativity_residual is not None
        assert any("not expected" in line for line in report.lines())


class TestPresets:
    def test_registry(self):
        assert set(PRESETS) == {"fig2", "fig3", "fig4", "fig5"}
        cfgs = preset_configs("fig3")
        assert [c.alpha for c in cfgs] == [2, 3, 5]
        assert all(c.params.kappa == 0.02 and c.theta == pytest.approx(math.pi / 4) for c in cfgs)
        assert preset_configs("fig5")[0].alpha == 2

    def test_unknown(self):
        with pytest.raises(ConfigError):
            preset_configs("fig9")

    def test_fig2_csv_matches_closed_form(self, tmp_path):
        paths = run_preset("fig2", tmp_path, jobs=1)
        assert [p.name for p in paths] == ["fig2_alpha2.csv", "fig2_alpha3.csv", "fig2_alpha5.csv"]
        for alpha, path in zip((2, 3, 5), paths):
            data = read_csv(path)
            ref = dyn.concurrence_mimi_closed(math.pi / 4, alpha, PRESET_PARAMS, data["tau"])
            assert np.max(np.abs(data["c_mimi"] - ref)) < 1e-10

    def test_fig4_shape(self, tmp_path):
        for alpha, path in zip((2, 3, 5), run_preset("fig4", tmp_path, jobs=1)):
            data = read_csv(path)
            tau, c2 = data["tau"], data["c_mima"]
            for k in range(3):
                i = int(np.argmin(np.abs(tau - k * math.pi)))
                assert c2[i] < 1e-6
            if alpha == 5:
                mid = (tau > 0.5) & (tau < math.pi - 0.5)
                assert np.all(c2[mid] > 1 - 1e-6)

    def test_parallel_matches_serial(self, tmp_path):
        a = run_preset("fig2", tmp_path / "a", jobs=1, points=31)
        b = run_preset("fig2", tmp_path / "b", jobs=3, points=31)
        for x, y in zip(a, b):
            assert x.read_bytes() == y.read_bytes()
