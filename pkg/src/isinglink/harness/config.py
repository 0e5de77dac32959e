"""Experiment configuration: flat key=value files, overrides, and hashing.

Schema (all keys optional, defaults below; lists are comma-separated):

    mode            uplink_sweep | downlink_sweep | heatmap | bench
    n_r, n_t        antenna / user counts
    modulation      QAM order: 4, 16, 64, 256
    snr_grid_db     e.g. "10, 15, 20, 25, 30"
    n_trials        Monte-Carlo trials per grid point
    detectors       subset of: mmse, mmse_sic, ml, cim, cim_multi
    n_stages        stages for cim_multi and vpp
    channel_model   iid | identity (identity is a deterministic test hook)
    power           downlink total transmit power; 0 means one unit per user
    n_workers       worker processes
    seed            master seed; every random draw derives from it
    output_path     CSV (sweeps, heatmap) or JSON (bench) destination
    dt_grid, fmvm_grid, n_instances, budget      heatmap controls
    batch_size, worker_grid                      bench controls
    cac.<field>     solver parameter overrides, e.g. cac.dt = 0.02
                    (cac.eps = auto selects per-problem scaling)

The config hash covers every field except ``output_path`` and
``n_workers``, so re-runs of the same experiment are comparable no matter
where they write or how they are parallelized.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields

from ..solver import CacParams

__all__ = [
    "ExperimentConfig",
    "parse_kv_text",
    "build_config",
    "format_config",
    "config_hash",
]

MODES = ("uplink_sweep", "downlink_sweep", "heatmap", "bench")

DETECTOR_NAMES = ("mmse", "mmse_sic", "ml", "cim", "cim_multi")

_HASH_EXCLUDED = ("output_path", "n_workers")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "uplink_sweep"
    n_r: int = 8
    n_t: int = 8
    modulation: int = 16
    snr_grid_db: tuple = (10.0, 15.0, 20.0, 25.0, 30.0)
    n_trials: int = 200
    detectors: tuple = ("mmse", "cim")
    n_stages: int = 1
    channel_model: str = "iid"
    power: float = 0.0
    n_workers: int = 1
    seed: int = 1
    output_path: str = ""
    # heatmap
    dt_grid: tuple = (0.01, 0.02, 0.04, 0.08, 0.16)
    fmvm_grid: tuple = (1, 2, 4, 8)
    n_instances: int = 1000
    budget: float = 2.56
    # bench
    batch_size: int = 4096
    worker_grid: tuple = (1, 2, 4)
    cac: CacParams = field(default_factory=CacParams)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, not {self.mode!r}")
        if not (self.n_r >= 1 and self.n_t >= 1):
            raise ValueError("n_r and n_t must be >= 1")
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must be non-empty")
        if self.n_trials < 1 or self.n_instances < 1 or self.batch_size < 1:
            raise ValueError("trial/instance/batch counts must be >= 1")
        if not self.detectors:
            raise ValueError("detectors must be non-empty")
        for name in self.detectors:
            if name not in DETECTOR_NAMES:
                raise ValueError(
                    f"unknown detector {name!r}; valid: {DETECTOR_NAMES}"
                )
        if self.channel_model not in ("iid", "identity"):
            raise ValueError("channel_model must be iid or identity")
        if self.n_stages < 1:
            raise ValueError("n_stages must be >= 1")
        if self.n_workers < 1 or not self.worker_grid:
            raise ValueError("worker counts must be >= 1")
        if not self.dt_grid or not self.fmvm_grid:
            raise ValueError("heatmap grids must be non-empty")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        self.cac.validate()


def parse_kv_text(text: str) -> dict:
    """Parse 'key = value' lines; '#' starts a comment; blanks ignored."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    return pairs


def _coerce_scalar(kind, raw: str):
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def _coerce(name: str, example, raw: str):
    if isinstance(example, tuple):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if not items:
            return ()
        kind = type(example[0]) if example else str
        return tuple(_coerce_scalar(kind, s) for s in items)
    if isinstance(example, bool):
        return raw.lower() in ("1", "true", "yes")
    if example is None:
        # optional float (cac.eps): "auto"/"none" selects per-problem scaling
        return None if raw.lower() in ("auto", "none") else float(raw)
    if isinstance(example, float):
        return float(raw)
    if isinstance(example, int):
        return int(raw)
    return raw


def build_config(pairs: dict) -> ExperimentConfig:
    """Build a validated config from string key/value pairs."""
    base = ExperimentConfig()
    kwargs = {}
    cac_kwargs = {}
    cfg_fields = {f.name: getattr(base, f.name) for f in fields(base) if f.name != "cac"}
    cac_fields = {f.name: getattr(base.cac, f.name) for f in fields(CacParams)}
    for key, raw in pairs.items():
        if key.startswith("cac."):
            sub = key[4:]
            if sub not in cac_fields:
                raise ValueError(f"unknown solver parameter {key!r}")
            cac_kwargs[sub] = _coerce(sub, cac_fields[sub], raw)
        elif key in cfg_fields:
            kwargs[key] = _coerce(key, cfg_fields[key], raw)
        else:
            raise ValueError(f"unknown config key {key!r}")
    cfg = dataclasses.replace(
        base, cac=dataclasses.replace(base.cac, **cac_kwargs), **kwargs
    )
    cfg.validate()
    return cfg


def _format_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: ExperimentConfig, include_excluded: bool = True) -> str:
    """Canonical text form (also a valid config file)."""
    lines = []
    for f in sorted(fields(cfg), key=lambda f: f.name):
        if f.name == "cac":
            continue
        if not include_excluded and f.name in _HASH_EXCLUDED:
            continue
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}")
    for f in sorted(fields(CacParams), key=lambda f: f.name):
        lines.append(f"cac.{f.name} = {_format_value(getattr(cfg.cac, f.name))}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 over the canonical form, minus output path and worker count."""
    text = format_config(cfg, include_excluded=False)
    return hashlib.sha256(text.encode()).hexdigest()
