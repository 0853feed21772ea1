from .config import ConfigError, ServiceConfig, load_config, parse_config_file
from .runtime import Runtime, build_providers, build_runtime, parse_bib_works, resolve_references

__all__ = [
    "ConfigError",
    "Runtime",
    "ServiceConfig",
    "build_providers",
    "build_runtime",
    "load_config",
    "parse_bib_works",
    "parse_config_file",
    "resolve_references",
]
