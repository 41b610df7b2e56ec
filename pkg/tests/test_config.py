import pytest
import yaml

import config
from errors import ConfigError


@pytest.fixture(autouse=True)
def restore_config():
    original_workers = config.Config.RFT_WORKERS
    original_level = config.Config.LOG_LEVEL
    yield
    config.Config.RFT_WORKERS = original_workers
    config.Config.LOG_LEVEL = original_level


def _write(tmp_path, raw):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    return path


def test_bundled_run_config():
    run = config.load_run_config(config.DATA_DIR / "run.yaml")

    assert run.material == (config.DATA_DIR / "sand.ini").resolve()
    assert run.gait.file.is_file()
    assert run.gait.periods == [13.5, 4.5, 2.3]
    assert run.foot.shape == "elliptical"
    assert run.sweep.shapes == ["flat", "circular", "elliptical"]
    assert run.terrain.target_peak_lift == pytest.approx(0.5 * 13.0 * 9.81, rel=1e-3)


def test_relative_paths_resolve_against_yaml(tmp_path):
    (tmp_path / "sand.ini").write_text((config.DATA_DIR / "sand.ini").read_text(encoding="utf-8"), encoding="utf-8")
    (tmp_path / "gait.csv").write_text("t,theta1_deg,theta2_deg\n0,0,0\n1,1,1\n", encoding="utf-8")

    run = config.load_run_config(_write(tmp_path, {"material": "sand.ini", "gait": {"file": "gait.csv"}}))

    assert run.material == (tmp_path / "sand.ini").resolve()
    assert run.gait.samples == 500
    assert run.model.correction and run.model.inertial and run.model.ankle_moment


def test_invalid_value_names_key(tmp_path):
    path = _write(tmp_path, {
        "material": str(config.DATA_DIR / "sand.ini"),
        "gait": {"file": str(config.DATA_DIR / "gait_mean.csv")},
        "foot": {"length": -0.1},
    })

    with pytest.raises(ConfigError) as excinfo:
        config.load_run_config(path)

    assert "foot.length" in str(excinfo.value)


def test_missing_referenced_file(tmp_path):
    path = _write(tmp_path, {"material": "nope.ini", "gait": {"file": str(config.DATA_DIR / "gait_mean.csv")}})

    with pytest.raises(ConfigError) as excinfo:
        config.load_run_config(path)

    assert "material" in str(excinfo.value)


def test_custom_shape_requires_mesh_file(tmp_path):
    path = _write(tmp_path, {
        "material": str(config.DATA_DIR / "sand.ini"),
        "gait": {"file": str(config.DATA_DIR / "gait_mean.csv")},
        "foot": {"shape": "custom"},
    })

    with pytest.raises(ConfigError):
        config.load_run_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        config.load_run_config(tmp_path / "nope.yaml")


def test_validate_rejects_zero_workers():
    config.Config.RFT_WORKERS = 0

    with pytest.raises(ValueError) as excinfo:
        config.Config.validate()

    assert "RFT_WORKERS" in str(excinfo.value)


def test_validate_rejects_unknown_log_level():
    config.Config.LOG_LEVEL = "VERBOSE"

    with pytest.raises(ValueError) as excinfo:
        config.Config.validate()

    assert "LOG_LEVEL inválido" in str(excinfo.value)


def test_display_config(capsys):
    config.Config.display_config()

    output = capsys.readouterr().out
    assert "CONFIGURAÇÃO ATUAL" in output
    assert "Workers" in output


def test_terrain_defaults_to_fixed_surface(tmp_path):
    run = config.load_run_config(_write(tmp_path, {
        "material": str(config.DATA_DIR / "sand.ini"),
        "gait": {"file": str(config.DATA_DIR / "gait_mean.csv")},
    }))

    assert run.terrain.target_peak_lift is None
    assert run.terrain.free_surface_height == 0.0


@pytest.mark.parametrize("terrain, key", [
    ({"target_peak_lift": -1.0}, "terrain.target_peak_lift"),
    ({"search_bounds": [0.05, -0.05]}, "terrain.search_bounds"),
])
def test_invalid_terrain_names_key(tmp_path, terrain, key):
    path = _write(tmp_path, {
        "material": str(config.DATA_DIR / "sand.ini"),
        "gait": {"file": str(config.DATA_DIR / "gait_mean.csv")},
        "terrain": terrain,
    })

    with pytest.raises(ConfigError) as excinfo:
        config.load_run_config(path)

    assert key in str(excinfo.value)
