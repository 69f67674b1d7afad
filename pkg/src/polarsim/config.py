"""Experiment configuration: a versioned JSON document mapped onto a dataclass.

Unknown keys are rejected so typos surface as configuration errors. Lists are
stored as tuples so a config is hashable and safe to ship to worker processes.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

SCHEMA_VERSION = 1
EXPERIMENTS = ("grid", "switching", "qber", "track")
ALLOWED_SAMPLE_COUNTS = frozenset({4, 6, 8, 16, 24, 32})
TAU_INTERPRETATIONS = ("fixed_device", "time_constant", "settle_95")


class ConfigError(ValueError):
    pass


def _ds_grid() -> tuple[float, ...]:
    return tuple(round(0.025 * i, 3) for i in range(13))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    schema_version: int = SCHEMA_VERSION
    seed: int = 20251016
    output_dir: str = "results"
    workers: int = 1

    # polarimeter noise
    sigma_i: float = 0.038
    power_drift_amplitude: float = 0.0
    power_drift_frequency_hz: float = 0.0

    # LC devices and timing
    lc_tau: float = 0.0
    exposure: float = 0.02
    dwell: float = 0.1
    switching_windows: tuple[float, ...] = (0.05, 0.1, 0.2)
    tau_interpretation: str = "fixed_device"

    # accuracy grid / switching study
    sample_counts: tuple[int, ...] = (4, 8, 16, 32)
    grid_n_qwp: int = 16
    grid_n_hwp: int = 16
    grid_max_angle_deg: float = 160.0
    repeats: int = 50

    # QBER study
    ds_grid: tuple[float, ...] = field(default_factory=_ds_grid)
    n_pairs: int = 1_000_000
    trials: int = 200
    angle_convention: str = "jones"
    showcase_ds: tuple[float, ...] = (0.1, 0.2)

    # tracking demo
    track_kind: str = "sinusoidal"
    track_axis: tuple[float, float, float] = (0.0, 1.0, 0.0)
    track_angle: float = 0.4
    track_rate: float = 0.0
    track_amplitude: float = 0.3
    track_frequency_hz: float = 0.05
    track_method: str = "fourier"
    track_n: int = 8
    loop_period: float = 1.0
    duration: float = 60.0

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


# per-experiment defaults layered over the dataclass defaults
EXPERIMENT_DEFAULTS: dict[str, dict[str, Any]] = {
    "grid": {"sample_counts": (4, 8, 16, 32), "lc_tau": 0.0, "dwell": 0.1},
    "switching": {"sample_counts": (6, 8, 16, 24, 32), "lc_tau": 0.03},
    "qber": {},
    "track": {"sigma_i": 0.01, "dwell": 0.05},
}


def default_config(experiment: str) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    return ExperimentConfig(experiment=experiment, **EXPERIMENT_DEFAULTS[experiment])


def _coerce(name: str, value: Any, default: Any) -> Any:
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name}: expected a list")
        return tuple(value)
    if isinstance(default, bool):
        return bool(value)
    if isinstance(default, int) and not isinstance(value, bool):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer")
        return value
    if isinstance(default, float):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{name}: expected a number")
        return float(value)
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(f"{name}: expected a string")
    return value


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    if "experiment" not in data:
        raise ConfigError("config needs an 'experiment' key")
    base = default_config(data["experiment"])
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {data['schema_version']!r}")
    updates = {k: _coerce(k, v, getattr(base, k)) for k, v in data.items() if k != "experiment"}
    cfg = replace(base, **updates)
    validate(cfg)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return config_from_dict(data)


def dump_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def validate(cfg: ExperimentConfig) -> None:
    def positive(name: str, allow_zero: bool = False):
        v = getattr(cfg, name)
        if v < 0 or (v == 0 and not allow_zero):
            raise ConfigError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {v}")

    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    for name in ("exposure", "workers", "repeats", "trials", "loop_period", "duration", "grid_n_qwp", "grid_n_hwp"):
        positive(name)
    for name in ("sigma_i", "power_drift_amplitude", "power_drift_frequency_hz", "lc_tau", "dwell", "n_pairs",
                 "grid_max_angle_deg"):
        positive(name, allow_zero=True)
    if any(w <= 0 for w in cfg.switching_windows) or not cfg.switching_windows:
        raise ConfigError("switching_windows must be a non-empty list of positive durations")
    if cfg.tau_interpretation not in TAU_INTERPRETATIONS:
        raise ConfigError(f"tau_interpretation must be one of {', '.join(TAU_INTERPRETATIONS)}")
    bad = set(cfg.sample_counts) - ALLOWED_SAMPLE_COUNTS
    if bad or not cfg.sample_counts:
        raise ConfigError(f"sample_counts must be a non-empty subset of {sorted(ALLOWED_SAMPLE_COUNTS)}")
    if cfg.experiment == "grid":
        fourier = [n for n in cfg.sample_counts if n != 4]
        if fourier:
            top = max(fourier)
            if any(top % n for n in fourier):
                raise ConfigError("grid Fourier sample counts must divide the largest one (decimated sweep)")
    if cfg.experiment == "switching" and 4 in cfg.sample_counts:
        raise ConfigError("switching study uses Fourier analysis only; 4 is not a valid count there")
    if any(not 0.0 <= d <= 2.0 for d in (*cfg.ds_grid, *cfg.showcase_ds)):
        raise ConfigError("dS values must lie in [0, 2]")
    if cfg.angle_convention not in ("jones", "poincare"):
        raise ConfigError("angle_convention must be 'jones' or 'poincare'")
    if cfg.track_kind not in ("static", "linear-ramp", "sinusoidal"):
        raise ConfigError("track_kind must be static, linear-ramp or sinusoidal")
    if len(cfg.track_axis) != 3 or not any(cfg.track_axis):
        raise ConfigError("track_axis must be a non-zero 3-vector")
    if cfg.track_method not in ("direct", "fourier"):
        raise ConfigError("track_method must be 'direct' or 'fourier'")
    if cfg.track_method == "fourier" and cfg.track_n < 4:
        raise ConfigError("track_n must be at least 4")
