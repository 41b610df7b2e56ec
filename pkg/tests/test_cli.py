import csv

import numpy as np
import orjson
import pytest
import yaml

import cli
from config import DATA_DIR, load_run_config
from utils.tables import TRACE_COLUMNS, read_trace, write_trace

PERIODS = (13.5, 4.5, 2.3)
TARGET_LIFT = 0.5 * 13.0 * 9.81


def _write_config(tmp_path, **overrides):
    raw = {
        "material": str(DATA_DIR / "sand.ini"),
        "foot": {"shape": "elliptical", "n_length": 20, "n_width": 10},
        "gait": {"file": str(DATA_DIR / "gait_mean.csv"), "periods": [2.3], "samples": 500},
        "sweep": {"shapes": ["flat", "elliptical"]},
        "output_dir": str(tmp_path / "out"),
        "workers": 1,
    }
    for key, value in overrides.items():
        if isinstance(value, dict):
            raw.setdefault(key, {}).update(value)
        else:
            raw[key] = value
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    return path


def _synthetic_trace(path, fx_offset=0.0):
    t = np.linspace(0.0, 1.0, 101)
    fz = np.clip(10.0 * np.sin(2 * np.pi * t), 0.0, None)
    columns = {name: np.zeros_like(t) for name in TRACE_COLUMNS}
    columns.update(t=t, Fx=2.0 * t + fx_offset, Fz=fz)
    return write_trace(path, columns)


def test_simulate_writes_trace_and_summary(tmp_path):
    config = _write_config(tmp_path)

    code = cli.main(["simulate", "--config", str(config), "--period", "2.3"])

    target = tmp_path / "out" / "elliptical_T2.3"
    trace = read_trace(target / "trace.csv")
    summary = orjson.loads((target / "summary.json").read_bytes())
    assert code == cli.EXIT_OK
    assert len(trace["t"]) == 500
    assert trace["t"][-1] == pytest.approx(2.3)
    assert (target / "trace.dat").read_text(encoding="utf-8").startswith("# t phase Fx")
    assert (target / "distribution.csv").is_file()
    assert summary["shape"] == "elliptical"
    assert summary["model"]["correction"] is True
    assert summary["equivalent_velocity_mps"] == pytest.approx(1.2 * 1.1 / 2.3 * 0.46 / 0.9)


def _summary(directory, shape, period):
    return orjson.loads((directory / cli.run_tag(shape, period) / "summary.json").read_bytes())


@pytest.mark.parametrize("period", PERIODS)
def test_simulate_without_correction(tmp_path, period):
    config = _write_config(tmp_path)
    corrected_dir, plain_dir = tmp_path / "on", tmp_path / "off"

    codes = [
        cli.main(["simulate", "--config", str(config), "--period", str(period), "--out", str(corrected_dir)]),
        cli.main(["simulate", "--config", str(config), "--period", str(period), "--out", str(plain_dir), "--no-correction"]),
    ]

    corrected = _summary(corrected_dir, "elliptical", period)
    plain = _summary(plain_dir, "elliptical", period)
    assert codes == [cli.EXIT_OK, cli.EXIT_OK]
    assert plain["model"]["correction"] is False
    assert plain["model"]["inertial"] is True
    assert corrected["peak_lift_N"] > plain["peak_lift_N"]


def test_correction_grows_with_gait_speed(tmp_path):
    run = load_run_config(_write_config(tmp_path))

    corrected = [cli.simulate(run, "elliptical", period, tmp_path / "on")[0].peak_lift for period in PERIODS]
    run.model.correction = False
    plain = [cli.simulate(run, "elliptical", period, tmp_path / "off")[0].peak_lift for period in PERIODS]

    assert corrected[0] < corrected[1] < corrected[2]
    assert corrected[0] > 2.0 * plain[0]
    assert max(plain) - min(plain) < 0.01 * max(plain)


def test_simulate_is_deterministic(tmp_path):
    run = load_run_config(_write_config(tmp_path))

    first, _ = cli.simulate(run, "elliptical", 4.5, tmp_path / "first")
    second, _ = cli.simulate(run, "elliptical", 4.5, tmp_path / "second")

    tag = cli.run_tag("elliptical", 4.5)
    assert (tmp_path / "first" / tag / "trace.csv").read_bytes() == (tmp_path / "second" / tag / "trace.csv").read_bytes()
    assert first.total_work == second.total_work


def test_zero_period_exits_with_config_code(tmp_path):
    config = _write_config(tmp_path)

    assert cli.main(["simulate", "--config", str(config), "--period", "0"]) == cli.EXIT_CONFIG
    assert not (tmp_path / "out").exists()


def test_missing_config_exits_with_config_code(tmp_path):
    assert cli.main(["simulate", "--config", str(tmp_path / "nope.yaml")]) == cli.EXIT_CONFIG


def test_invalid_config_value_exits_with_config_code(tmp_path):
    config = _write_config(tmp_path, gait={"periods": [-1.0]})

    assert cli.main(["simulate", "--config", str(config)]) == cli.EXIT_CONFIG


def test_foot_above_sand_exits_with_runtime_code(tmp_path):
    config = _write_config(tmp_path, leg={"hip_height": 2.0})

    assert cli.main(["simulate", "--config", str(config)]) == cli.EXIT_RUNTIME


def test_sweep_writes_comparison(tmp_path):
    config = _write_config(tmp_path, gait={"samples": 120})

    code = cli.main(["sweep", "--config", str(config)])

    with (tmp_path / "out" / "comparison.csv").open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert code == cli.EXIT_OK
    assert [row["shape"] for row in rows] == ["flat", "elliptical"]
    assert all(row["status"] == "ok" for row in rows)
    assert (tmp_path / "out" / "flat_T2.3" / "trace.csv").is_file()


def test_sweep_records_failed_cells(tmp_path):
    config = _write_config(tmp_path, gait={"samples": 50}, leg={"hip_height": 2.0}, sweep={"shapes": ["flat"]})

    code = cli.main(["sweep", "--config", str(config)])

    with (tmp_path / "out" / "comparison.csv").open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert code == cli.EXIT_PARTIAL
    assert rows[0]["status"] == "erro: NoContactError"


def test_report_rmse_of_identical_traces(tmp_path, capsys):
    simulated = _synthetic_trace(tmp_path / "sim.csv")

    code = cli.main(["report-rmse", str(simulated), str(simulated), "--out", str(tmp_path)])

    payload = orjson.loads((tmp_path / "rmse.json").read_bytes())
    assert code == cli.EXIT_OK
    for axis in ("Fx", "Fy", "Fz"):
        assert payload["com correção"][axis]["rmse"] == pytest.approx(0.0, abs=1e-12)
    assert "ERRO ABSOLUTO" in capsys.readouterr().out


def test_report_rmse_of_constant_offset(tmp_path):
    simulated = read_trace(_synthetic_trace(tmp_path / "sim.csv"))
    measured = read_trace(_synthetic_trace(tmp_path / "measured.csv", fx_offset=1.0))

    report = cli.rmse_report(measured, simulated)

    assert report["Fx"]["rmse"] == pytest.approx(1.0, abs=1e-6)
    assert report["Fx"]["std"] == pytest.approx(0.0, abs=1e-6)
    assert report["Fz"]["rmse"] == pytest.approx(0.0, abs=1e-12)


def test_report_rmse_with_baseline(tmp_path):
    simulated = _synthetic_trace(tmp_path / "sim.csv")
    baseline = _synthetic_trace(tmp_path / "base.csv", fx_offset=0.5)

    code = cli.main(["report-rmse", str(simulated), str(simulated), "--baseline", str(baseline), "--out", str(tmp_path)])

    payload = orjson.loads((tmp_path / "rmse.json").read_bytes())
    assert code == cli.EXIT_OK
    assert payload["sem correção"]["Fx"]["rmse"] == pytest.approx(0.5, abs=1e-6)


def test_report_rmse_missing_file_exits_with_config_code(tmp_path):
    simulated = _synthetic_trace(tmp_path / "sim.csv")

    assert cli.main(["report-rmse", str(tmp_path / "nope.csv"), str(simulated)]) == cli.EXIT_CONFIG


def test_calibrate_writes_loadable_profile(tmp_path):
    depths = np.linspace(0.002, 0.05, 10)
    rows = "\n".join(f"{i * 0.1:.3f},{d:.6f},{2.575e6 * 1.4e-3 * d:.6f}" for i, d in enumerate(depths))
    vertical = tmp_path / "vertical.csv"
    vertical.write_text("t,depth_m,Fz_N\n" + rows + "\n", encoding="utf-8")

    code = cli.main([
        "calibrate", "--material", str(DATA_DIR / "sand.ini"),
        "--vertical", str(vertical), "--out", str(tmp_path),
    ])

    from medium import load_medium

    profile = load_medium(tmp_path / "calibrated.ini")
    assert code == cli.EXIT_OK
    assert profile.zeta == pytest.approx(2.06e6, rel=1e-4)
    assert "mantidos no padrão" in (tmp_path / "calibrated.ini").read_text(encoding="utf-8")


def test_calibrate_without_records_exits_with_config_code(tmp_path):
    assert cli.main(["calibrate", "--material", str(DATA_DIR / "sand.ini")]) == cli.EXIT_CONFIG


def test_prepare_gait_uses_configured_grid(tmp_path):
    run = load_run_config(_write_config(tmp_path, gait={"samples": 200}))

    traj = cli.prepare_gait(run, 4.5)

    assert len(traj) == 200
    assert traj.period == pytest.approx(4.5)


@pytest.fixture(scope="module")
def calibrated(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("calibrated")
    run = load_run_config(_write_config(
        tmp_path,
        gait={"periods": list(PERIODS)},
        terrain={"target_peak_lift": TARGET_LIFT},
    ))
    reports = {
        (shape, period): cli.simulate(run, shape, period, tmp_path / "out")[0]
        for shape in ("flat", "elliptical")
        for period in PERIODS
    }
    return run, reports, tmp_path / "out"


def test_calibrated_surface_reaches_target_lift(calibrated):
    _, reports, out_dir = calibrated

    for (shape, period), report in reports.items():
        assert report.peak_lift == pytest.approx(TARGET_LIFT, rel=1e-3)
        assert _summary(out_dir, shape, period)["free_surface_height_m"] == report.free_surface_height


def test_curved_feet_need_higher_surface_for_same_support(calibrated):
    run, reports, out_dir = calibrated

    circular, _ = cli.simulate(run, "circular", 4.5, out_dir)

    assert circular.peak_lift == pytest.approx(TARGET_LIFT, rel=1e-3)
    assert circular.free_surface_height > reports["elliptical", 4.5].free_surface_height
    assert reports["elliptical", 4.5].free_surface_height > reports["flat", 4.5].free_surface_height


@pytest.mark.trends
@pytest.mark.parametrize("shape", ["flat", "elliptical"])
def test_hip_work_falls_with_gait_speed(calibrated, shape):
    _, reports, _ = calibrated

    hip = [reports[shape, period].hip_work for period in PERIODS]

    assert hip[0] > hip[1] > hip[2] > 0.0


@pytest.mark.trends
@pytest.mark.parametrize("shape", ["flat", "elliptical"])
def test_intrusion_share_shrinks_with_gait_speed(calibrated, shape):
    _, reports, _ = calibrated

    shares = []
    for period in PERIODS:
        start, end = reports[shape, period].intrusion
        shares.append((end - start) / period)

    assert shares[0] > shares[1] > shares[2]


@pytest.mark.trends
def test_elliptical_knee_work_below_flat(calibrated):
    _, reports, _ = calibrated

    assert abs(reports["elliptical", 2.3].knee_work) < abs(reports["flat", 2.3].knee_work)


@pytest.mark.trends
def test_elliptical_saves_energy_at_fast_gait(calibrated):
    _, reports, _ = calibrated

    assert reports["elliptical", 2.3].total_work < reports["flat", 2.3].total_work


def test_calibrated_sweep_records_surface_height(tmp_path):
    config = _write_config(tmp_path, gait={"samples": 120}, terrain={"target_peak_lift": TARGET_LIFT}, sweep={"shapes": ["flat"]})

    code = cli.main(["sweep", "--config", str(config)])

    with (tmp_path / "out" / "comparison.csv").open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert code == cli.EXIT_OK
    assert float(rows[0]["peak_lift_N"]) == pytest.approx(TARGET_LIFT, rel=1e-3)
    assert float(rows[0]["free_surface_height_m"]) < 0.0


def test_unreachable_target_lift_exits_with_runtime_code(tmp_path):
    config = _write_config(tmp_path, gait={"samples": 60})

    assert cli.main(["simulate", "--config", str(config), "--target-lift", "1e7"]) == cli.EXIT_RUNTIME
