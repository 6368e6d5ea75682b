"""
Configuration tests
Settings, run-config resolution, presets and the effective-config round trip
"""

import pytest

from src.config import (
    PRESETS,
    RunConfig,
    Settings,
    TrainConfig,
    TrainMode,
    build_run_config,
    dump_run_config,
    load_run_config,
    write_effective_config,
)
from src.errors import ConfigError
from src.models.network import Activation


class TestSettings:
    """Test process settings"""

    def test_defaults(self):
        """Test documented defaults"""
        s = Settings(_env_file=None)
        assert s.HISTOGRAM_BINS == 20
        assert s.GRADIENT_TOP_K == 5
        assert s.SCORE_WORKERS == 1

    def test_environment_override(self, monkeypatch):
        """Test environment variables override defaults, case-insensitively"""
        monkeypatch.setenv("log_level", "DEBUG")
        monkeypatch.setenv("SCORE_WORKERS", "4")
        s = Settings(_env_file=None)
        assert s.LOG_LEVEL == "DEBUG"
        assert s.SCORE_WORKERS == 4


class TestRunConfig:
    """Test run configuration resolution"""

    def test_minimal(self):
        """Test a generator alone is a valid configuration"""
        cfg = build_run_config({"generator": "gaussian"})
        assert cfg.mode == "joint"
        assert cfg.activation is Activation.SIGMOID

    def test_exactly_one_source(self):
        """Test neither or both of dataset and generator are rejected"""
        with pytest.raises(ConfigError):
            build_run_config({})
        with pytest.raises(ConfigError):
            build_run_config({"generator": "gaussian", "dataset": "d.csv"})

    def test_unknown_key_rejected(self):
        """Test keys outside the schema are rejected"""
        with pytest.raises(ConfigError) as excinfo:
            build_run_config({"generator": "gaussian", "learning_rat": "0.1"})
        assert any("learning_rat" in v for v in excinfo.value.violations)

    def test_every_violation_listed(self):
        """Test all problems are reported together"""
        with pytest.raises(ConfigError) as excinfo:
            build_run_config({"generator": "gaussian", "nu": "2", "epochs": "-1", "sigma": "0"})
        violations = excinfo.value.violations
        assert len(violations) == 3
        assert {v.split(":")[0] for v in violations} == {"nu", "epochs", "sigma"}

    def test_source_rule_listed_with_field_errors(self):
        """Test a missing data source is reported next to field violations"""
        with pytest.raises(ConfigError) as excinfo:
            build_run_config({"nu": "2", "epochs": "-1"})
        violations = excinfo.value.violations
        assert len(violations) == 3
        assert sum("exactly one of 'dataset' or 'generator'" in v for v in violations) == 1

    def test_both_sources_listed_with_field_errors(self):
        """Test two data sources are reported next to field violations"""
        with pytest.raises(ConfigError) as excinfo:
            build_run_config({"generator": "gaussian", "dataset": "d.csv", "sigma": "0"})
        violations = excinfo.value.violations
        assert len(violations) == 2
        assert any(v.startswith("sigma") for v in violations)

    def test_source_rule_alone_listed_once(self):
        """Test a config whose only problem is the data source has one violation"""
        with pytest.raises(ConfigError) as excinfo:
            build_run_config({"dataset": " "})
        assert len(excinfo.value.violations) == 1

    def test_list_values(self):
        """Test comma-separated and JSON list text"""
        assert build_run_config({"generator": "gaussian", "encoder_layers": "64, 16"}).encoder_layers == [64, 16]
        assert build_run_config({"generator": "gaussian", "encoder_layers": "[8,4,2]"}).encoder_layers == [8, 4, 2]
        cfg = build_run_config({"dataset": "d.csv", "categorical_columns": "proto,service"})
        assert cfg.categorical_columns == ["proto", "service"]

    def test_precedence(self):
        """Test defaults < preset < file < overrides"""
        cfg = build_run_config(
            {"generator": "gaussian", "preset": "shuttle", "nu": "0.2", "batch_size": "8"},
            {"batch_size": "4"},
        )
        assert cfg.encoder_layers == PRESETS["shuttle"]["encoder_layers"]
        assert cfg.learning_rate == PRESETS["shuttle"]["learning_rate"]
        assert cfg.nu == 0.2
        assert cfg.batch_size == 4

    def test_unknown_preset(self):
        """Test a preset name outside the table is rejected"""
        with pytest.raises(ConfigError):
            build_run_config({"generator": "gaussian", "preset": "cifar"})

    def test_raw_mode_drops_encoder(self):
        """Test raw mode forces an empty layer list"""
        cfg = build_run_config({"generator": "gaussian", "mode": "raw", "encoder_layers": "4,2"})
        assert cfg.encoder_layers == []
        assert cfg.train_config().mode is TrainMode.JOINT

    def test_train_config(self):
        """Test the optimization subset"""
        cfg = build_run_config({"generator": "gaussian", "mode": "two-stage", "epochs": "3", "seed": "9"})
        train = cfg.train_config()
        assert isinstance(train, TrainConfig)
        assert (train.epochs, train.seed, train.mode) == (3, 9, TrainMode.TWO_STAGE)

    def test_gaussian_preset_scales_by_quantiles(self):
        """Test the gaussian preset carries its scaling quantile into training"""
        cfg = build_run_config({"generator": "gaussian", "preset": "gaussian"})
        assert cfg.train_config().scale_quantile == PRESETS["gaussian"]["scale_quantile"]
        assert build_run_config({"generator": "gaussian"}).train_config().scale_quantile == 0.0

    def test_scale_quantile_range(self):
        """Test a quantile of one half or more is rejected"""
        with pytest.raises(ConfigError):
            build_run_config({"generator": "gaussian", "scale_quantile": "0.5"})

    def test_train_config_is_frozen(self):
        """Test training settings cannot be changed after validation"""
        train = TrainConfig(epochs=1)
        with pytest.raises(Exception):
            train.epochs = 2


class TestConfigFiles:
    """Test flat KEY=value files"""

    def test_load_with_overrides(self, tmp_path):
        """Test file values and command-line overrides combine"""
        path = tmp_path / "run.env"
        path.write_text("# comment\ngenerator=illustrative4d\nENCODER_LAYERS=3,2\nepochs=4\n")
        cfg = load_run_config(str(path), {"epochs": "1"})
        assert cfg.generator == "illustrative4d"
        assert cfg.encoder_layers == [3, 2]
        assert cfg.epochs == 1

    def test_missing_file(self, tmp_path):
        """Test a missing config file is a config error"""
        with pytest.raises(ConfigError):
            load_run_config(str(tmp_path / "absent.env"))

    def test_effective_config_round_trip(self, tmp_path):
        """Test the written effective config reloads to an equal configuration"""
        cfg = build_run_config({
            "generator": "gaussian", "preset": "kddcup99", "learning_rate": "0.1",
            "out_dir": str(tmp_path / "out"), "positive_label_values": "normal.",
        })
        path = write_effective_config(cfg, tmp_path / "effective_config.env")
        assert load_run_config(str(path)) == cfg

    def test_dump_omits_unset_values(self):
        """Test None values are left out of the dump"""
        text = dump_run_config(RunConfig(generator="gaussian"))
        assert "dataset=" not in text
        assert "generator=gaussian" in text
