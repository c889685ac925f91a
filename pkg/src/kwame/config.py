"""Service configuration: flat key=value files plus environment overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8756
    bank_path: str | None = None
    default_backend: str = "tfidf"
    default_top_k: int = 3
    # Confidence gate the service ships with; the library itself applies no
    # threshold unless asked. Pass an explicit threshold in the request body
    # to override, or set "threshold=" empty in the config to disable.
    threshold: float | None = 0.35
    hash_dim: int = 1024
    hash_seed: int = 0
    vectors: dict[str, str] = field(default_factory=dict)
    provider_url: str | None = None
    provider_timeout_ms: int = 5000
    log_path: str | None = None

    def validate(self) -> None:
        if self.provider_timeout_ms <= 0:
            raise ConfigError(f"provider_timeout_ms must be positive, got {self.provider_timeout_ms}")
        if self.default_top_k < 1:
            raise ConfigError(f"default_top_k must be >= 1, got {self.default_top_k}")
        if self.threshold is not None and not -1.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in [-1, 1], got {self.threshold}")


def load_config(path: str | Path) -> ServiceConfig:
    """Parse a key=value config file ('#' starts a comment, blanks ignored).

    Dense vector files are configured per language as ``vectors.<lang>=path``.
    """
    cfg = ServiceConfig()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key == "host":
                cfg.host = value
            elif key == "port":
                cfg.port = int(value)
            elif key == "bank":
                cfg.bank_path = value
            elif key == "backend":
                cfg.default_backend = value
            elif key == "top_k":
                cfg.default_top_k = int(value)
            elif key == "threshold":
                cfg.threshold = float(value) if value else None
            elif key == "hash_dim":
                cfg.hash_dim = int(value)
            elif key == "hash_seed":
                cfg.hash_seed = int(value)
            elif key.startswith("vectors."):
                cfg.vectors[key.split(".", 1)[1]] = value
            elif key == "provider_url":
                cfg.provider_url = value or None
            elif key == "provider_timeout_ms":
                cfg.provider_timeout_ms = int(value)
            elif key == "log_path":
                cfg.log_path = value or None
            else:
                raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{path}: line {lineno}: bad value for {key!r}: {value!r}") from exc
    cfg.validate()
    return cfg


def apply_env_overrides(cfg: ServiceConfig) -> ServiceConfig:
    port = os.environ.get("KWAME_PORT")
    if port:
        cfg.port = int(port)
    return cfg
