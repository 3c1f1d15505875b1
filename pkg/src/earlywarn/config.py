"""Flat ``key = value`` configuration files.

Blank lines and lines starting with ``#`` are ignored.  Keys may repeat only
when the caller allows it (campaign lists in synthetic specs).
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError


def parse_key_values(text: str, source: str = "<config>", multi: tuple[str, ...] = ()) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key in multi:
            out.setdefault(key, []).append(value)
        elif key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        else:
            out[key] = value
    return out


def read_key_values(path, multi: tuple[str, ...] = ()) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_key_values(text, str(path), multi)


def parse_bool(value: str, key: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def parse_number(value: str, key: str, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}") from None


def parse_list(value: str, key: str, kind=float) -> tuple:
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ConfigError(f"{key}: empty list")
    return tuple(parse_number(v, key, kind) for v in items)


def format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)
