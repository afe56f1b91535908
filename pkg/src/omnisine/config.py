"""Plain-text ``key = value`` files for camera models and scenarios."""

from __future__ import annotations

from pathlib import Path

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    pass


def read_keyvalue(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key.lower().replace("-", "_")] = value
    return out


def get_float(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number: {cfg[key]!r}") from exc


def get_int(cfg, key, default=None):
    value = get_float(cfg, key, default)
    if value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {cfg[key]!r}")
    return int(value)


def get_vector(cfg, key, n=3, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return list(default)
    parts = cfg[key].replace(",", " ").split()
    if len(parts) != n:
        raise ConfigError(f"{key}: expected {n} numbers")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"{key}: not numeric: {cfg[key]!r}") from exc


def get_bool(cfg, key, default=False):
    if key not in cfg:
        return default
    value = cfg[key].lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {cfg[key]!r}")
