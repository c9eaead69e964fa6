"""Experiment configuration: INI-style sections or JSON, with typed accessors.

Every value may be given natively (JSON) or as text (INI).  Accessors raise
:class:`ConfigError` naming the section and key (and the line, for INI
syntax errors).
"""

from __future__ import annotations

import configparser
import json
from pathlib import Path

TASKS = ("cell2d-solve", "verify-estimates", "defect-ladder", "classify", "scatter", "sweep")


class ConfigError(ValueError):
    pass


class Config:
    """Read-only view of ``{section: {key: value}}``."""

    def __init__(self, data: dict | None = None, source: str = "<defaults>"):
        self.data = {str(k).lower(): dict(v) for k, v in (data or {}).items() if isinstance(v, dict)}
        top = {k: v for k, v in (data or {}).items() if not isinstance(v, dict)}
        if top:
            self.data.setdefault("run", {}).update(top)
        self.source = source

    @classmethod
    def load(cls, path) -> "Config":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not text.strip():
            raise ConfigError(f"config {path} is empty")
        if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
            if not isinstance(data, dict):
                raise ConfigError(f"{path}: top level must be an object")
            return cls(data, str(path))
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        try:
            cp.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(str(exc).replace("\n", " ")) from None
        return cls({s: dict(cp[s]) for s in cp.sections()}, str(path))

    def echo(self) -> dict:
        return {s: {k: self.data[s][k] for k in sorted(self.data[s])} for s in sorted(self.data)}

    def section(self, name: str) -> dict:
        return self.data.get(name, {})

    def has(self, section: str, key: str) -> bool:
        return key in self.data.get(section, {})

    def _raw(self, section, key, default):
        sec = self.data.get(section, {})
        if key not in sec:
            if default is _REQUIRED:
                raise ConfigError(f"[{section}] {key}: required value missing")
            return default
        return sec[key]

    def str(self, section, key, default=None):
        v = self._raw(section, key, default)
        return None if v is None else str(v).strip()

    def float(self, section, key, default=None):
        v = self._raw(section, key, default)
        if v is None:
            return None
        try:
            return float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"[{section}] {key}: expected a number, got {v!r}") from None

    def int(self, section, key, default=None):
        v = self._raw(section, key, default)
        if v is None:
            return None
        try:
            return int(v)
        except (TypeError, ValueError):
            raise ConfigError(f"[{section}] {key}: expected an integer, got {v!r}") from None

    def complex(self, section, key, default=None):
        v = self._raw(section, key, default)
        if v is None:
            return None
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return complex(float(v[0]), float(v[1]))
        try:
            return complex(str(v).replace(" ", ""))
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected a complex number like 2+0.1j, got {v!r}") from None

    def floats(self, section, key, default=None):
        v = self._raw(section, key, default)
        if v is None:
            return None
        if isinstance(v, (list, tuple)):
            items = v
        else:
            items = [t for t in str(v).replace(";", ",").split(",") if t.strip()]
        try:
            return [float(t) for t in items]
        except (TypeError, ValueError):
            raise ConfigError(f"[{section}] {key}: expected a comma-separated list of numbers, got {v!r}") from None

    def words(self, section, key, default=None):
        v = self._raw(section, key, default)
        if v is None:
            return None
        if isinstance(v, (list, tuple)):
            return [str(t).strip() for t in v]
        return [t.strip() for t in str(v).split(",") if t.strip()]

    def exponent_range(self, section, key, default=None):
        """``"4..9"`` (or ``[4, 9]``) to the list ``[4, 5, ..., 9]``."""
        v = self._raw(section, key, default)
        if v is None:
            return None
        try:
            if isinstance(v, (list, tuple)):
                lo, hi = (int(t) for t in v)
            else:
                lo, hi = (int(t) for t in str(v).split(".."))
        except (TypeError, ValueError):
            raise ConfigError(f"[{section}] {key}: expected a range like 4..9, got {v!r}") from None
        if hi < lo:
            raise ConfigError(f"[{section}] {key}: empty range {v!r}")
        return list(range(lo, hi + 1))

    def gaps(self, section, key):
        v = self._raw(section, key, [])
        if isinstance(v, (list, tuple)):
            try:
                return [(float(a), float(b)) for a, b in v]
            except (TypeError, ValueError):
                raise ConfigError(f"[{section}] {key}: expected a list of [a, b] pairs") from None
        out = []
        for item in str(v).split(","):
            if not item.strip():
                continue
            try:
                a, b = item.split(":")
                out.append((float(a), float(b)))
            except ValueError:
                raise ConfigError(f"[{section}] {key}: expected intervals like 0.1:0.2, got {item.strip()!r}") from None
        return out


_REQUIRED = object()
REQUIRED = _REQUIRED
