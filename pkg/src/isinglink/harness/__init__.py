"""Experiment harness: configs, paired sweeps, heatmaps, scaling benchmarks."""

from .bench import physical_cpu_count, run_bench
from .config import (
    DETECTOR_NAMES,
    ExperimentConfig,
    build_config,
    config_hash,
    format_config,
    parse_kv_text,
)
from .heatmap import HeatmapCell, run_integration_heatmap
from .sweeps import SweepRow, make_uplink_instance, run_detection_sweep, run_precoding_sweep
from .workers import partition_blocks

__all__ = [
    "DETECTOR_NAMES",
    "ExperimentConfig",
    "HeatmapCell",
    "SweepRow",
    "build_config",
    "config_hash",
    "format_config",
    "make_uplink_instance",
    "parse_kv_text",
    "partition_blocks",
    "physical_cpu_count",
    "run_bench",
    "run_detection_sweep",
    "run_integration_heatmap",
    "run_precoding_sweep",
]
