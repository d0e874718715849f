"""
Tests for RunConfig validation and ConfigurationManager precedence.
"""

import json
import os
import tempfile

import pytest

from bmv.config_manager import CONFIG_ENV, ConfigurationManager, RunConfig
from bmv.errors import ParameterError


def test_run_config_defaults():
    """Test the documented default values."""
    config = RunConfig()
    assert config.n_nodes_initial == 256
    assert config.n_nodes_max == 16384
    assert config.tau_quad == 1e-9
    assert config.points_per_interval == 20
    assert config.eps_split is None
    assert config.t_count == 25


@pytest.mark.parametrize(
    "overrides",
    [
        {"n_nodes_initial": 100},
        {"n_nodes_initial": 32},
        {"n_nodes_max": 128},
        {"tau_quad": 0.0},
        {"tau_laplace": -1e-6},
        {"points_per_interval": 1},
        {"t_min": 0.0},
        {"t_spacing": "cubic"},
        {"precision": "quad"},
        {"eps_split": -1.0},
        {"workers": 0},
    ],
)
def test_run_config_rejects_invalid(overrides):
    with pytest.raises(ParameterError):
        RunConfig(**overrides)


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ParameterError):
        RunConfig.from_dict({"tau_quad": 1e-9, "selected_model": None})


def test_manager_without_file_uses_defaults():
    manager = ConfigurationManager()
    assert manager.file_path is None
    assert manager.load() == RunConfig()


def test_manager_precedence():
    """Defaults < file < overrides."""
    with tempfile.NamedTemporaryFile(mode="w", delete=False, suffix=".json") as f:
        json.dump({"tau_quad": 1e-8, "points_per_interval": 8}, f)
        temp_file = f.name

    try:
        manager = ConfigurationManager(temp_file)
        config = manager.load(points_per_interval=12, seed=None)
        assert config.tau_quad == 1e-8
        assert config.points_per_interval == 12
        assert config.seed == 0
    finally:
        os.remove(temp_file)


def test_manager_reads_environment(temp_dir):
    path = temp_dir / "bmv.json"
    path.write_text(json.dumps({"n_nodes_initial": 512}))
    os.environ[CONFIG_ENV] = str(path)
    assert ConfigurationManager().load().n_nodes_initial == 512


def test_manager_bad_file(temp_dir):
    path = temp_dir / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ParameterError):
        ConfigurationManager(str(path)).load()
    with pytest.raises(ParameterError):
        ConfigurationManager(str(temp_dir / "missing.json")).load()


def test_write_and_set_value(temp_dir):
    path = str(temp_dir / "written.json")
    manager = ConfigurationManager(path)
    manager.write_config(RunConfig(seed=5))
    assert manager.load().seed == 5

    config = manager.set_value("points_per_interval", 6)
    assert config.points_per_interval == 6
    assert manager.load().points_per_interval == 6

    with pytest.raises(ParameterError):
        manager.set_value("no_such_setting", 1)
