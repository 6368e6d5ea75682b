# src/config.py
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Literal, Mapping, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.errors import ConfigError
from src.models.network import Activation


class Settings(BaseSettings):
    # ==== Application ====
    APP_NAME: str = "AE-1SVM"
    APP_VERSION: str = "1.0.0"

    # ==== Logging ====
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = ""

    # ==== Runs ====
    OUTPUT_DIR: str = "./runs"
    DEFAULT_SEED: int = 1
    DEFAULT_EPOCHS: int = 50

    # ==== Scoring ====
    SCORE_WORKERS: int = 1
    SCORE_CHUNK_SIZE: int = 4096

    # ==== Reporting ====
    HISTOGRAM_BINS: int = 20
    GRADIENT_TOP_K: int = 5

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=False, extra="ignore")


settings = Settings()


class TrainMode(str, Enum):
    JOINT = "joint"
    TWO_STAGE = "two-stage"


ParameterGroup = Literal["encoder", "decoder", "head"]


class TrainConfig(BaseModel):
    """Optimization settings for one call to fit"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epochs: int = Field(default=50, ge=0)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=0.01, gt=0)
    seed: int = Field(default=0, ge=0)
    mode: TrainMode = TrainMode.JOINT
    frozen: FrozenSet[ParameterGroup] = frozenset()
    scale_quantile: float = Field(default=0.0, ge=0, lt=0.5)


# Per-dataset network and training settings; sigma is 3.0 throughout
PRESETS: Dict[str, Dict[str, Any]] = {
    "gaussian": {"encoder_layers": [128, 32], "nu": 0.40, "alpha": 1000.0,
                 "rff_features": 500, "batch_size": 32, "learning_rate": 0.01,
                 "scale_quantile": 0.025},
    "forestcover": {"encoder_layers": [32, 16], "nu": 0.30, "alpha": 1000.0,
                    "rff_features": 200, "batch_size": 1024, "learning_rate": 0.01},
    "shuttle": {"encoder_layers": [6, 2], "nu": 0.40, "alpha": 1000.0,
                "rff_features": 50, "batch_size": 16, "learning_rate": 0.001},
    "kddcup99": {"encoder_layers": [80, 40, 20], "nu": 0.30, "alpha": 10000.0,
                 "rff_features": 400, "batch_size": 128, "learning_rate": 0.001},
    "usps": {"encoder_layers": [128, 64, 32], "nu": 0.28, "alpha": 1000.0,
             "rff_features": 500, "batch_size": 16, "learning_rate": 0.005},
    "mnist": {"encoder_layers": [256, 128], "nu": 0.40, "alpha": 1000.0,
              "rff_features": 1000, "batch_size": 32, "learning_rate": 0.001},
}

SOURCE_RULE = "exactly one of 'dataset' or 'generator' must be set"

_LIST_FIELDS = ("encoder_layers", "positive_label_values", "negative_label_values",
                "categorical_columns")


class RunConfig(BaseModel):
    """Everything one training run needs; unknown keys are rejected"""

    model_config = ConfigDict(extra="forbid")

    # ==== Data ====
    dataset: Optional[str] = None
    generator: Optional[Literal["gaussian", "illustrative4d"]] = None
    label_column: Optional[str] = "label"
    positive_label_values: List[str] = ["1"]
    negative_label_values: List[str] = ["-1"]
    categorical_columns: List[str] = []
    split_ratio: float = Field(default=0.5, gt=0, lt=1)

    # ==== Model ====
    preset: Optional[Literal["gaussian", "forestcover", "shuttle", "kddcup99", "usps", "mnist"]] = None
    encoder_layers: List[int] = [128, 32]
    activation: Activation = Activation.SIGMOID
    nu: float = Field(default=0.4, gt=0, le=1)
    alpha: float = Field(default=1000.0, ge=0)
    sigma: float = Field(default=3.0, gt=0)
    rff_features: int = Field(default=500, ge=1)

    # ==== Training ====
    epochs: int = Field(default_factory=lambda: settings.DEFAULT_EPOCHS, ge=0)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=0.01, gt=0)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0)
    scale_quantile: float = Field(default=0.0, ge=0, lt=0.5)
    mode: Literal["joint", "two-stage", "raw"] = "joint"

    # ==== Output ====
    out_dir: str = Field(default_factory=lambda: str(Path(settings.OUTPUT_DIR) / "latest"))

    @field_validator(*_LIST_FIELDS, mode="before")
    @classmethod
    def parse_list(cls, v):
        """
        Parse list values coming from the flat config file
        Supports:
          - Comma-separated strings → "128,32"
          - JSON-style lists → [128, 32]
        """
        if isinstance(v, str):
            text = v.strip()
            if not text:
                return []
            try:
                parsed = json.loads(text)
                if isinstance(parsed, list):
                    return [str(item) if isinstance(item, str) else item for item in parsed]
            except json.JSONDecodeError:
                pass
            return [item.strip() for item in text.split(",") if item.strip()]
        return v

    @field_validator("encoder_layers")
    @classmethod
    def positive_layers(cls, v: List[int]) -> List[int]:
        if any(d < 1 for d in v):
            raise ValueError(f"layer sizes must be positive, got {v}")
        return v

    @field_validator("dataset", "generator", "preset", "label_column", mode="before")
    @classmethod
    def blank_is_none(cls, v):
        if isinstance(v, str) and not v.strip():
            return None
        return v

    @model_validator(mode="after")
    def check_source(self) -> "RunConfig":
        if (self.dataset is None) == (self.generator is None):
            raise ValueError(SOURCE_RULE)
        if self.mode == "raw":
            self.encoder_layers = []
        return self

    def train_config(self) -> TrainConfig:
        mode = TrainMode.TWO_STAGE if self.mode == "two-stage" else TrainMode.JOINT
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=self.seed,
            mode=mode,
            scale_quantile=self.scale_quantile,
        )


def _format_violations(exc: ValidationError) -> List[str]:
    violations = []
    for err in exc.errors():
        where = ".".join(str(part) for part in err["loc"]) or "config"
        violations.append(f"{where}: {err['msg']}")
    return violations


def _source_violation(values: Mapping[str, Any]) -> Optional[str]:
    """The dataset/generator rule checked on raw values, so it is reported next to field errors"""
    def given(key: str) -> bool:
        value = values.get(key)
        return value is not None and not (isinstance(value, str) and not value.strip())

    if given("dataset") == given("generator"):
        return f"config: {SOURCE_RULE}"
    return None


def build_run_config(
    file_values: Optional[Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Resolve a RunConfig

    Precedence (lowest to highest): field defaults, preset values,
    config-file values, command-line overrides.
    """
    file_values = {k.strip().lower(): v for k, v in (file_values or {}).items() if v is not None}
    overrides = {k.strip().lower(): v for k, v in (overrides or {}).items() if v is not None}

    merged: Dict[str, Any] = {}
    preset = overrides.get("preset", file_values.get("preset"))
    if isinstance(preset, str) and preset.strip().lower() in PRESETS:
        merged.update(PRESETS[preset.strip().lower()])
    merged.update(file_values)
    merged.update(overrides)

    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        violations = _format_violations(e)
        source = _source_violation(merged)
        if source and not any(SOURCE_RULE in v for v in violations):
            violations.append(source)
        raise ConfigError(f"Invalid configuration ({len(violations)} problem(s))", violations)


def load_run_config(path: Optional[str], overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Read a flat KEY=value config file and resolve it with ``overrides``"""
    file_values: Dict[str, Any] = {}
    if path:
        config_path = Path(path)
        if not config_path.is_file():
            raise ConfigError(f"Config file not found: {path}", [f"config: no such file {path}"])
        file_values = dict(dotenv_values(config_path))
    return build_run_config(file_values, overrides)


def dump_run_config(cfg: RunConfig) -> str:
    """Flat KEY=value text that :func:`load_run_config` reads back to an equal config"""
    lines = []
    for name, value in cfg.model_dump(mode="json").items():
        if value is None:
            continue
        if isinstance(value, list):
            text = json.dumps(value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{name}={text}")
    return "\n".join(lines) + "\n"


def write_effective_config(cfg: RunConfig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_run_config(cfg), encoding="utf-8")
    return path
