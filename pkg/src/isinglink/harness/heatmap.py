"""Integration-fidelity heatmap over step size and coupling-refresh period.

Each random problem is integrated once per (dt, f_mvm) cell from the same
initial state (the anneal seed is shared, so the uniform draw is identical)
with the step count chosen to keep dt * n_steps at the fixed budget.  The
(dt = 0.01, f_mvm = 1) run is the high-fidelity reference; a cell's error
rate is the fraction of state variables whose final sign disagrees with it,
averaged over problems where neither run diverged.  The divergence rate
counts all problems.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from ..linear import detect_mmse
from ..solver import derive_seed, integrate_anneal
from ..transform import build_ising
from .config import ExperimentConfig, config_hash
from .sweeps import make_uplink_instance, write_csv
from .workers import partition_blocks, run_blocks

__all__ = ["HeatmapCell", "run_integration_heatmap", "REFERENCE_DT", "REFERENCE_FMVM"]

_DOM_HEATMAP = 3

REFERENCE_DT = 0.01
REFERENCE_FMVM = 1


@dataclass(frozen=True)
class HeatmapCell:
    dt: float
    f_mvm: int
    p_diverge: float
    p_error_mean: float
    n_instances: int


def _steps_for(budget: float, dt: float) -> int:
    return max(1, round(budget / dt))


def _heatmap_block(payload):
    cfg, start, stop = payload
    cells = [(dt, f) for dt in cfg.dt_grid for f in cfg.fmvm_grid]
    div = np.zeros(len(cells), dtype=np.int64)
    err_sum = np.zeros(len(cells))
    err_n = np.zeros(len(cells), dtype=np.int64)
    ref_div = 0

    ref_params = dataclasses.replace(
        cfg.cac,
        dt=REFERENCE_DT,
        f_mvm=REFERENCE_FMVM,
        n_steps=_steps_for(cfg.budget, REFERENCE_DT),
    )
    heat_cfg = dataclasses.replace(cfg, snr_grid_db=(cfg.snr_grid_db[0],))
    for i in range(start, stop):
        inst = make_uplink_instance(heat_cfg, 0, i)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        seed = derive_seed(cfg.seed, _DOM_HEATMAP, i)
        ref = integrate_anneal(si, ref_params, seed)
        if ref.diverged:
            ref_div += 1
        ref_spins = ref.spins.to_array()
        for k, (dt, f_mvm) in enumerate(cells):
            params = dataclasses.replace(
                cfg.cac, dt=dt, f_mvm=f_mvm, n_steps=_steps_for(cfg.budget, dt)
            )
            run = integrate_anneal(si, params, seed)
            if run.diverged:
                div[k] += 1
            elif not ref.diverged:
                err_sum[k] += float(np.mean(run.spins.to_array() != ref_spins))
                err_n[k] += 1
    return div, err_sum, err_n, ref_div


def run_integration_heatmap(cfg: ExperimentConfig) -> list:
    """Sweep the (dt, f_mvm) grid; returns cells and writes the CSV if asked."""
    cfg.validate()
    if cfg.mode != "heatmap":
        raise ValueError(f"config mode is {cfg.mode!r}, expected heatmap")
    blocks = partition_blocks(cfg.n_instances, cfg.n_workers)
    parts = run_blocks(_heatmap_block, [(cfg, a, b) for a, b in blocks])

    cells = [(dt, f) for dt in cfg.dt_grid for f in cfg.fmvm_grid]
    div = np.sum([p[0] for p in parts], axis=0)
    err_sum = np.sum([p[1] for p in parts], axis=0)
    err_n = np.sum([p[2] for p in parts], axis=0)

    rows = [
        HeatmapCell(
            dt=float(dt),
            f_mvm=int(f_mvm),
            p_diverge=float(div[k] / cfg.n_instances),
            p_error_mean=float(err_sum[k] / err_n[k]) if err_n[k] else 1.0,
            n_instances=cfg.n_instances,
        )
        for k, (dt, f_mvm) in enumerate(cells)
    ]
    if cfg.output_path:
        write_csv(cfg.output_path, rows, config_hash(cfg))
    return rows
