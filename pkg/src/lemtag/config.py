"""Flat key=value configuration files; flags always win over file values."""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError


def read_keyvalue(path: str | Path) -> dict[str, str]:
    """Parse "key = value" lines; "#" comments and blank lines are skipped."""
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, eq, value = stripped.partition("=")
        if not eq or not key.strip():
            raise ConfigError(f"{path} line {lineno}: expected key=value, got {line!r}")
        values[key.strip()] = value.strip()
    return values


def parse_ratios(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"ratios must be three comma-separated fractions, got {text!r}")
    try:
        ratios = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"ratios must be numeric, got {text!r}") from None
    return ratios


def merge_config(
    file_path: str | Path | None, flags: dict[str, object]
) -> dict[str, object]:
    """File values overridden by any flag explicitly set (not None)."""
    merged: dict[str, object] = {}
    if file_path:
        merged.update(read_keyvalue(file_path))
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged
