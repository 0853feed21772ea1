"""Service configuration: flat key = value file, environment overrides on
top, defaults underneath (precedence env > file > defaults)."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Optional

ENV_KEYS = {
    "PROVIDER_URL": "provider_url",
    "PROVIDER_KEY": "provider_key",
    "EMBED_URL": "embed_url",
    "EMBED_KEY": "embed_key",
    "TEMPLATE_DIR": "template_dir",
}

_PATH_KEYS = ("corpus_path", "index_path", "template_dir", "ui_dir")


class ConfigError(ValueError):
    pass


@dataclass
class ServiceConfig:
    corpus_path: Optional[str] = None
    index_path: Optional[str] = None
    template_dir: Optional[str] = None
    ui_dir: Optional[str] = None
    provider_url: Optional[str] = None
    provider_key: str = ""
    embed_url: Optional[str] = None
    embed_key: str = ""
    embed_dimension: int = 64
    listen_host: str = "127.0.0.1"
    listen_port: int = 8722
    k: int = 10
    max_suggestions: int = 10
    candidate_cap: int = 20
    y_years: int = 5
    keep_fraction: float = 0.5
    parallelism: int = 8
    seed: int = 0

    def validate_paths(self) -> None:
        for key in _PATH_KEYS:
            value = getattr(self, key)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"configured path does not exist: {key} = {value!r}")


def _parse_scalar(raw: str):
    text = raw.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_file(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        values[key.strip()] = _parse_scalar(raw)
    return values


def load_config(
    path: str | Path | None = None, env: Mapping[str, str] | None = None
) -> ServiceConfig:
    env = os.environ if env is None else env
    known = {f.name: f.type for f in fields(ServiceConfig)}
    merged: dict = {}
    if path is not None:
        file_values = parse_config_file(Path(path).read_text(encoding="utf-8"))
        unknown = sorted(set(file_values) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(file_values)
    for env_name, key in ENV_KEYS.items():
        if env.get(env_name):
            merged[key] = env[env_name]
    try:
        return ServiceConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
