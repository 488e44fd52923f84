"""
Experiment configs: flat dotted `key = value` files (read with python-dotenv), nested into
sections and validated by ExperimentConfig.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Mapping, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigError, PresetNotFoundError
from app.schemas.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

BUNDLED_PRESETS = Path(__file__).resolve().parent.parent / "presets"
PRESET_SUFFIX = ".env"


def preset_dirs() -> list[Path]:
    dirs = [Path(settings.PRESETS_DIR)] if settings.PRESETS_DIR else []
    return dirs + [BUNDLED_PRESETS]


def list_presets() -> list[str]:
    names = set()
    for directory in preset_dirs():
        if directory.is_dir():
            names.update(p.stem for p in directory.glob(f"*{PRESET_SUFFIX}"))
    return sorted(names)


def preset_path(name: str) -> Path:
    for directory in preset_dirs():
        candidate = directory / f"{name}{PRESET_SUFFIX}"
        if candidate.is_file():
            return candidate
    raise PresetNotFoundError(f"unknown preset {name!r}; known: {list_presets()}")


def read_flat(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    raw = dotenv_values(path)
    missing = [key for key, value in raw.items() if value is None]
    if missing:
        raise ConfigError(f"{path}: keys without a value", [f"{k}: missing '='" for k in missing])
    return {key: value for key, value in raw.items()}


def nest(flat: Mapping[str, str]) -> dict:
    """{"time.dt": "0.01"} -> {"time": {"dt": "0.01"}}."""
    out: dict = {}
    problems = []
    for key, value in flat.items():
        parts = key.strip().split(".")
        node = out
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                problems.append(f"{key}: '{part}' is both a value and a section")
                break
            node = child
        else:
            if isinstance(node.get(parts[-1]), dict):
                problems.append(f"{key}: '{parts[-1]}' is both a value and a section")
            else:
                node[parts[-1]] = value.strip() if isinstance(value, str) else value
    if problems:
        raise ConfigError("inconsistent config keys", problems)
    return out


def parse_config(flat: Mapping[str, str]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(nest(flat))
    except ValidationError as exc:
        problems = [
            f"{'.'.join(str(p) for p in err['loc']) or '<config>'}: {err['msg']}"
            for err in exc.errors()
        ]
        raise ConfigError(f"invalid experiment config ({len(problems)} problems)", problems) from exc


def load_flat(
    path: Optional[str | Path] = None,
    preset: Optional[str] = None,
    overrides: Optional[Mapping[str, str]] = None,
) -> dict[str, str]:
    if (path is None) == (preset is None):
        raise ConfigError("give exactly one of a config path or a preset name")
    flat = read_flat(preset_path(preset) if preset else path)
    flat.update(overrides or {})
    return flat


def load_config(
    path: Optional[str | Path] = None,
    preset: Optional[str] = None,
    overrides: Optional[Mapping[str, str]] = None,
) -> ExperimentConfig:
    cfg = parse_config(load_flat(path, preset, overrides))
    logger.info("load_config: %s (%s)", preset or path, config_hash(cfg)[:12])
    return cfg


def config_hash(cfg: ExperimentConfig) -> str:
    """sha256 of the canonical JSON form of the validated config."""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
