"""Build/serve configuration with file, environment, and CLI layering.

Precedence (lowest to highest): defaults, JSON config file, ``MSS_*``
environment variables, explicit CLI overrides.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .embed import METHODS

ENV_PREFIX = "MSS_"


@dataclass
class BuildConfig:
    input_path: str = ""
    output_dir: str = "artifacts"
    bucket_width: int = 3600
    method: str = "fgsd"
    dims: int = 128
    epochs: int = 250
    wl_iterations: int = 2
    hist_bins: int = 200
    hist_range: float = 20.0
    seed: int = 0
    layout_algorithm: str = "fruchterman_reingold"
    # edge schema
    source_col: str | int = 0
    target_col: str | int = 1
    timestamp_col: str | int = 2
    sign_col: str | int | None = None
    delimiter: str = "\t"
    has_header: bool = False
    # serving
    host: str = "127.0.0.1"
    port: int = 8040
    session_ttl: float = 1800.0

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown embedding method {self.method!r}")
        if self.bucket_width <= 0:
            raise ValueError("bucket_width must be positive")
        if self.dims <= 0 or self.epochs <= 0 or self.hist_bins <= 0:
            raise ValueError("dims, epochs and hist_bins must be positive")
        if self.hist_range <= 0:
            raise ValueError("hist_range must be positive")
        if self.layout_algorithm not in ("fruchterman_reingold", "kamada_kawai"):
            raise ValueError(f"unknown layout algorithm {self.layout_algorithm!r}")


_FIELDS = {f.name: f for f in dataclasses.fields(BuildConfig)}


def _coerce(name: str, raw):
    f = _FIELDS[name]
    if not isinstance(raw, str):
        return raw
    if f.type in ("int", int):
        return int(raw)
    if f.type in ("float", float):
        return float(raw)
    if f.type in ("bool", bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in str(f.type) and raw.lstrip("-").isdigit():  # str | int columns
        return int(raw)
    return raw


def load_config(path=None, env=None, overrides=None) -> BuildConfig:
    cfg = BuildConfig()
    if path is not None:
        data = json.loads(open(path).read())
        for k, v in data.items():
            if k not in _FIELDS:
                raise ValueError(f"unknown config key {k!r} in {path}")
            setattr(cfg, k, _coerce(k, v))
    env = os.environ if env is None else env
    for k in _FIELDS:
        raw = env.get(ENV_PREFIX + k.upper())
        if raw is not None:
            setattr(cfg, k, _coerce(k, raw))
    for k, v in (overrides or {}).items():
        if v is not None:
            setattr(cfg, k, _coerce(k, v))
    cfg.validate()
    return cfg
