"""Flat ``key = value`` experiment files.

One setting per line, ``#`` starts a comment, and a ``version`` key is
mandatory. Keys use the long command-line flag names with dashes or
underscores, e.g. ``alpha-schedule = 0.9:1,0.1:2``.
"""
from __future__ import annotations

from pathlib import Path

CONFIG_VERSION = 1


class ConfigError(ValueError):
    pass


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if not key:
            raise ConfigError(f"{source}:{number}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{number}: duplicate key {key!r}")
        values[key] = value
    if "version" not in values:
        raise ConfigError(f"{source}: missing 'version' key")
    if values.pop("version") != str(CONFIG_VERSION):
        raise ConfigError(f"{source}: unsupported config version (expected {CONFIG_VERSION})")
    return values


def load_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, str(path))


def format_config(values: dict[str, object]) -> str:
    lines = [f"version = {CONFIG_VERSION}"]
    lines += [f"{k.replace('_', '-')} = {v}" for k, v in sorted(values.items())]
    return "\n".join(lines) + "\n"


def parse_schedule(text: str) -> list[tuple[float, float]]:
    """``"0.9:1,0.1:2"`` -> ``[(0.9, 1.0), (0.1, 2.0)]``."""
    phases = []
    for chunk in text.split(","):
        try:
            frac, alpha = chunk.split(":")
            phases.append((float(frac), float(alpha)))
        except ValueError:
            raise ConfigError(f"bad alpha schedule phase {chunk!r}; expected fraction:alpha") from None
    fracs = sum(f for f, _ in phases)
    if any(f <= 0 for f, _ in phases) or abs(fracs - 1) > 1e-9:
        raise ConfigError(f"alpha schedule fractions must be positive and sum to 1, got {fracs:g}")
    if any(a < 1 for _, a in phases):
        raise ConfigError("every alpha must be >= 1")
    return phases


def format_schedule(phases) -> str:
    return ",".join(f"{f:g}:{a:g}" for f, a in phases)
