"""Flat TOML-style configuration files.

Supports the subset the harness needs: `key = value` lines with strings,
numbers, booleans, and one-level arrays, plus # comments. Section headers
are rejected rather than silently ignored. CLI flags always override file
values.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict

from .errors import ConfigError

#: Keys the harness understands, with their defaults.
DEFAULTS: Dict[str, Any] = {
    "endpoint": "",
    "model": "",
    "method": "base",
    "threshold": "0.9",
    "repeats": 3,
    "temperatures": [0.7, 1.0, 1.2],
    "concurrency": 4,
    "seed": 0,
    "timeout": 30.0,
}

_decoder = json.JSONDecoder()


def _parse_value(raw: str, where: str) -> Any:
    raw = raw.strip()
    if not raw:
        raise ConfigError(f"{where}: missing value")
    if raw[0] in "\"[":
        try:
            value, end = _decoder.raw_decode(raw)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{where}: bad value ({err})") from err
        rest = raw[end:].strip()
        if rest and not rest.startswith("#"):
            raise ConfigError(f"{where}: trailing characters {rest!r}")
        return value
    raw = raw.split("#", 1)[0].strip()
    if raw in ("true", "false"):
        return raw == "true"
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    raise ConfigError(f"{where}: unquoted value {raw!r} (strings need quotes)")


def load_config(path) -> Dict[str, Any]:
    """Parse a config file into a plain dict; unknown keys are kept."""
    values: Dict[str, Any] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        where = f"{path}:{lineno}"
        if stripped.startswith("["):
            raise ConfigError(f"{where}: sections are not supported, use flat keys")
        if "=" not in stripped:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{where}: empty key")
        values[key] = _parse_value(raw, where)
    return values


def merged(file_values: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """DEFAULTS, updated by the file, updated by non-None CLI overrides."""
    out = dict(DEFAULTS)
    out.update(file_values)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out
