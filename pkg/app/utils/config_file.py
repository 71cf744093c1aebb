# app/utils/config_file.py

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from app.core.errors import ConfigError
from app.schemas.scenario import ScenarioConfig


def _key_path(loc) -> str:
    return ".".join(str(part) for part in loc if not isinstance(part, int)) or "<root>"


def validate_config(data: Dict[str, Any]) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = _key_path(first["loc"])
        message = first["msg"].removeprefix("Value error, ")
        if first["type"] == "extra_forbidden":
            message = "unknown key"
        raise ConfigError(message, key=key) from exc


def load_config(path: Optional[Path]) -> ScenarioConfig:
    """
    Read a YAML scenario file. Missing keys fall back to the built-in defaults,
    unknown keys are rejected. None loads pure defaults.
    """
    if path is None:
        return ScenarioConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}", key=str(path)) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}", key=str(path)) from exc

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("scenario file must contain a mapping at the top level", key=str(path))
    return validate_config(data)


def config_to_dict(config: ScenarioConfig) -> Dict[str, Any]:
    return config.model_dump(mode="json")


def dump_config(config: ScenarioConfig, path: Path) -> Path:
    path = Path(path)
    path.write_text(yaml.safe_dump(config_to_dict(config), sort_keys=True), encoding="utf-8")
    return path


def config_hash(config: ScenarioConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def apply_overrides(
    config: ScenarioConfig,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
    m_max: Optional[int] = None,
) -> ScenarioConfig:
    """CLI flags win over the file; the merged result is validated again."""
    data = config_to_dict(config)
    if seed is not None:
        data["seed"] = seed
    if out_dir is not None:
        data["output"]["out_dir"] = str(out_dir)
    if m_max is not None:
        data["phases"]["m_max"] = m_max
    return validate_config(data)
