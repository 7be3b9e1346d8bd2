"""RunConfig: the flat key=value description of one CLI run.

Values are resolved in order: dataclass defaults, then DYSPN_<KEY> entries
from the environment or a .env file, then the config file, then CLI flags.
Every run writes the resolved config back as run.cfg with sorted keys.
"""

from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from dotenv import dotenv_values, find_dotenv

from src.module_1_propagation import Activation
from src.module_5_synth import SceneKind
from src.shared import Precision, PropagationConfig, ValidationError, Variant

from .atomic import atomic_write_text

logger = logging.getLogger(__name__)

ENV_PREFIX = "DYSPN_"
RUN_CONFIG_NAME = "run.cfg"
# Keys that never change results; left out of run.cfg so reruns compare byte-equal.
EXECUTION_KEYS = ("output", "threads")
SCHEDULES = ("far_decay", "far_decay_edges", "constant")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class RunConfig:
    variant: Variant = Variant.RING_7X7
    steps: int = 6
    epsilon: float = 1e-8
    precision: Precision = Precision.F64
    reference: bool = False
    suppression: bool = True
    threads: int = 1
    activation: Activation = Activation.IDENTITY
    seed: int = 0

    # synthetic scene
    scene: SceneKind = SceneKind.STEP_EDGE
    height: int = 64
    width: int = 64
    rate: float = 0.05
    sigma: Optional[float] = None
    schedule: str = "far_decay"

    # files
    depth: Optional[str] = None
    affinity: Optional[str] = None
    attention: Optional[str] = None
    offsets: Optional[str] = None
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if self.schedule not in SCHEDULES:
            raise ValidationError(f"run config: schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        self.propagation_config()

    def propagation_config(self) -> PropagationConfig:
        return PropagationConfig(
            steps=self.steps,
            epsilon=self.epsilon,
            precision=self.precision,
            reference=self.reference,
            suppression=self.suppression,
            threads=self.threads,
        )

    def with_overrides(self, overrides: Mapping[str, Optional[str]]) -> "RunConfig":
        """Apply string overrides; None values are skipped."""
        _check_keys(overrides)
        given = {key: value for key, value in overrides.items() if value is not None}
        if not given:
            return self
        return replace(self, **_coerce_all(given))

    def as_strings(self) -> Dict[str, str]:
        out = {}
        for key, value in asdict(self).items():
            if value is None:
                out[key] = ""
            elif isinstance(value, bool):
                out[key] = "true" if value else "false"
            elif hasattr(value, "value"):
                out[key] = str(value.value)
            else:
                out[key] = repr(value) if isinstance(value, float) else str(value)
        return out

    def to_text(self) -> str:
        items = sorted(self.as_strings().items())
        return "".join(f"{key}={value}\n" for key, value in items if key not in EXECUTION_KEYS)

    def write(self, directory: PathLike) -> Path:
        return atomic_write_text(Path(directory) / RUN_CONFIG_NAME, self.to_text())

    @classmethod
    def from_mapping(cls, values: Mapping[str, Optional[str]]) -> "RunConfig":
        return cls(**_coerce_all(values))

    @classmethod
    def from_file(cls, path: PathLike) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        return cls.from_mapping(dotenv_values(path))


# -----------------------------------------------------------------------------
# Parsing
# -----------------------------------------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(key: str, raw: Optional[str]) -> object:
    kind = _FIELD_TYPES[key]
    text = (raw or "").strip()
    try:
        if kind == "bool":
            lowered = text.lower()
            if lowered not in _TRUE | _FALSE:
                raise ValueError(text)
            return lowered in _TRUE
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "Optional[float]":
            return float(text) if text else None
        if kind == "Optional[str]":
            return text or None
        if kind == "Variant":
            return Variant(text)
        if kind == "Precision":
            return Precision(text)
        if kind == "Activation":
            return Activation(text)
        if kind == "SceneKind":
            return SceneKind(text)
        return text
    except ValueError:
        raise ValidationError(f"run config: bad value {raw!r} for key {key!r}") from None


def _check_keys(values: Mapping[str, object]) -> None:
    unknown = sorted(set(values) - set(_FIELD_TYPES))
    if unknown:
        raise ValidationError(f"run config: unknown key(s) {', '.join(unknown)}")


def _coerce_all(values: Mapping[str, Optional[str]]) -> Dict[str, object]:
    _check_keys(values)
    return {key: _coerce(key, raw) for key, raw in values.items()}


def environment(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Optional[str]]:
    """A .env file in the working directory, overridden by the process environment."""
    merged: Dict[str, Optional[str]] = dict(dotenv_values(find_dotenv(usecwd=True)))
    merged.update(os.environ if environ is None else environ)
    return merged


def environment_defaults(environ: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    """DYSPN_<KEY> values for RunConfig fields; other names are ignored."""
    out = {}
    for name, value in environment(environ).items():
        if not name.startswith(ENV_PREFIX) or value is None:
            continue
        key = name[len(ENV_PREFIX) :].lower()
        if key in _FIELD_TYPES:
            out[key] = value
    return out


def resolve_run_config(
    config_path: Optional[PathLike] = None,
    overrides: Optional[Mapping[str, Optional[str]]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """Defaults < environment/.env < config file < overrides."""
    config = RunConfig().with_overrides(environment_defaults(environ))
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        config = config.with_overrides(dotenv_values(path))
    config = config.with_overrides(overrides or {})
    logger.debug("resolved run config: %s", config.as_strings())
    return config
