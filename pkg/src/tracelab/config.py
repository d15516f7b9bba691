"""Flat key=value experiment configuration with typed access and hashing."""

from __future__ import annotations

import hashlib
from pathlib import Path

__all__ = ["Config", "ConfigError"]


class ConfigError(ValueError):
    """Invalid configuration file, key, or value."""


class Config:
    """Flat string-to-string mapping from a config file plus overrides.

    File format: one ``key = value`` pair per line, ``#`` comments, blank
    lines ignored.  Overrides are ``key=value`` strings from the command
    line and win over file values.  The hash covers the merged mapping and
    is embedded in every output artifact.
    """

    def __init__(self, values: dict[str, str] | None = None):
        self.values: dict[str, str] = dict(values or {})

    @classmethod
    def load(cls, path: str | Path | None, overrides: list[str] | None = None) -> "Config":
        values: dict[str, str] = {}
        if path is not None:
            text = Path(path).read_text()
            for lineno, raw in enumerate(text.splitlines(), 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
                key, val = (s.strip() for s in line.split("=", 1))
                if not key:
                    raise ConfigError(f"{path}:{lineno}: empty key")
                values[key] = val
        for item in overrides or []:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not key=value")
            key, val = (s.strip() for s in item.split("=", 1))
            values[key] = val
        return cls(values)

    def hash(self) -> str:
        digest = hashlib.sha256()
        for key in sorted(self.values):
            digest.update(f"{key}={self.values[key]}\n".encode())
        return digest.hexdigest()[:12]

    # typed getters ---------------------------------------------------------

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)

    def get_float(self, key: str, default: float) -> float:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc

    def get_int(self, key: str, default: int) -> int:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc

    def get_floats(self, key: str, default: tuple[float, ...]) -> tuple[float, ...]:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return tuple(float(s) for s in raw.split(",") if s.strip())
        except ValueError as exc:
            raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}") from exc

    def to_dict(self) -> dict[str, str]:
        return dict(self.values)
