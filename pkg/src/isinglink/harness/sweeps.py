"""Paired Monte-Carlo SNR sweeps for uplink detection and downlink precoding.

Every detector (or precoder) in a sweep sees byte-identical problem
instances: channels, symbols, and noise derive from the master seed and the
(grid point, trial) position only.  Workers process contiguous trial blocks
and return per-trial arrays, which the parent concatenates in block order
before reducing, so all data columns are independent of the worker count.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, fields

import numpy as np

from ..channel import (
    MimoInstance,
    bit_errors,
    make_qam,
    project_to_constellation,
    sample_channel,
    symbol_errors,
    transmit,
)
from ..detector import detect_cim, detect_cim_multi
from ..linear import detect_ml, detect_mmse, detect_mmse_sic
from ..precoder import default_tau, fold_mod_tau, precode_vpp, zf_matrix
from ..solver import derive_seed
from .config import ExperimentConfig, config_hash
from .workers import partition_blocks, run_blocks

__all__ = [
    "SweepRow",
    "run_detection_sweep",
    "run_precoding_sweep",
    "make_uplink_instance",
    "write_csv",
]

_DOM_UPLINK = 1
_DOM_DOWNLINK = 2


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    detector: str
    ser: float
    ber: float
    mean_energy: float
    mean_diverged: float
    wall_time_s: float
    n_trials: int


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str, rows: list, cfg_hash: str) -> None:
    """Write dataclass rows with a header and a config-hash footer line."""
    if not rows:
        raise ValueError("no rows to write")
    names = [f.name for f in fields(rows[0])]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            writer.writerow([_fmt(getattr(row, n)) for n in names])
            fh.flush()
        fh.write(f"# config_hash={cfg_hash}\n")


def _channel_for(cfg: ExperimentConfig, seed: int) -> np.ndarray:
    if cfg.channel_model == "identity":
        n = max(cfg.n_r, cfg.n_t)
        return np.eye(n, dtype=complex)[: cfg.n_r, : cfg.n_t]
    return sample_channel(cfg.n_r, cfg.n_t, seed)


def make_uplink_instance(
    cfg: ExperimentConfig, snr_idx: int, trial: int
) -> MimoInstance:
    """The (grid point, trial) instance every uplink detector shares."""
    const = make_qam(cfg.modulation)
    H = _channel_for(cfg, derive_seed(cfg.seed, _DOM_UPLINK, snr_idx, trial, 0))
    rng = np.random.default_rng(derive_seed(cfg.seed, _DOM_UPLINK, snr_idx, trial, 1))
    x = const.points[rng.integers(0, const.order, cfg.n_t)]
    y, noise_var = transmit(
        H, x, cfg.snr_grid_db[snr_idx], derive_seed(cfg.seed, _DOM_UPLINK, snr_idx, trial, 2)
    )
    return MimoInstance(H=H, y=y, constellation=const, noise_var=noise_var, truth=x)


def _detect_one(name: str, inst: MimoInstance, cfg: ExperimentConfig, seed: int):
    if name == "mmse":
        return detect_mmse(inst)
    if name == "mmse_sic":
        return detect_mmse_sic(inst)
    if name == "ml":
        return detect_ml(inst)
    if name == "cim":
        return detect_cim(inst, cfg.cac, seed)
    if name == "cim_multi":
        return detect_cim_multi(inst, cfg.cac, cfg.n_stages, seed)
    raise ValueError(f"unknown detector {name!r}")


def _detect_block(payload):
    """Per-worker uplink kernel: all grid points for one trial block."""
    cfg, start, stop = payload
    n = stop - start
    out = {}
    for snr_idx in range(len(cfg.snr_grid_db)):
        for det in cfg.detectors:
            out[(snr_idx, det)] = {
                "sym": np.zeros(n, dtype=np.int64),
                "bit": np.zeros(n, dtype=np.int64),
                "energy": np.zeros(n),
                "diverged": np.zeros(n, dtype=np.int64),
                "time": 0.0,
            }
    for snr_idx in range(len(cfg.snr_grid_db)):
        for j, trial in enumerate(range(start, stop)):
            inst = make_uplink_instance(cfg, snr_idx, trial)
            det_seed = derive_seed(cfg.seed, _DOM_UPLINK, snr_idx, trial, 3)
            for det in cfg.detectors:
                t0 = time.perf_counter()
                res = _detect_one(det, inst, cfg, det_seed)
                cell = out[(snr_idx, det)]
                cell["time"] += time.perf_counter() - t0
                cell["sym"][j] = symbol_errors(inst.truth, res.x_hard)
                cell["bit"][j] = bit_errors(inst.truth, res.x_hard, inst.constellation)
                cell["energy"][j] = res.energy
                cell["diverged"][j] = res.diverged_count
    return out


def run_detection_sweep(cfg: ExperimentConfig) -> list:
    """Run the paired uplink sweep; returns rows and writes the CSV if asked."""
    cfg.validate()
    if cfg.mode != "uplink_sweep":
        raise ValueError(f"config mode is {cfg.mode!r}, expected uplink_sweep")
    const = make_qam(cfg.modulation)
    blocks = partition_blocks(cfg.n_trials, cfg.n_workers)
    results = run_blocks(_detect_block, [(cfg, a, b) for a, b in blocks])

    rows = []
    n_sym = cfg.n_trials * cfg.n_t
    n_bit = n_sym * const.bits_per_symbol
    for snr_idx, snr_db in enumerate(cfg.snr_grid_db):
        for det in cfg.detectors:
            parts = [r[(snr_idx, det)] for r in results]
            sym = np.concatenate([p["sym"] for p in parts])
            bit = np.concatenate([p["bit"] for p in parts])
            energy = np.concatenate([p["energy"] for p in parts])
            diverged = np.concatenate([p["diverged"] for p in parts])
            rows.append(
                SweepRow(
                    snr_db=float(snr_db),
                    detector=det,
                    ser=float(np.sum(sym) / n_sym),
                    ber=float(np.sum(bit) / n_bit),
                    mean_energy=float(np.sum(energy) / cfg.n_trials),
                    mean_diverged=float(np.sum(diverged) / cfg.n_trials),
                    wall_time_s=float(sum(p["time"] for p in parts)),
                    n_trials=cfg.n_trials,
                )
            )
    if cfg.output_path:
        write_csv(cfg.output_path, rows, config_hash(cfg))
    return rows


def _precode_block(payload):
    """Per-worker downlink kernel: ZF and VPP on identical (H, u, noise)."""
    cfg, start, stop = payload
    const = make_qam(cfg.modulation)
    tau = default_tau(const)
    P = cfg.power if cfg.power > 0 else float(cfg.n_r)
    n = stop - start
    out = {}
    for snr_idx in range(len(cfg.snr_grid_db)):
        for det in ("zf", "vpp"):
            out[(snr_idx, det)] = {
                "sym": np.zeros(n, dtype=np.int64),
                "bit": np.zeros(n, dtype=np.int64),
                "energy": np.zeros(n),
                "diverged": np.zeros(n, dtype=np.int64),
                "time": 0.0,
            }
    for snr_idx in range(len(cfg.snr_grid_db)):
        sigma2 = 10.0 ** (-cfg.snr_grid_db[snr_idx] / 10.0)
        for j, trial in enumerate(range(start, stop)):
            H = _channel_for(cfg, derive_seed(cfg.seed, _DOM_DOWNLINK, snr_idx, trial, 0))
            rng = np.random.default_rng(
                derive_seed(cfg.seed, _DOM_DOWNLINK, snr_idx, trial, 1)
            )
            u = const.points[rng.integers(0, const.order, cfg.n_r)]
            noise = (
                rng.standard_normal(cfg.n_r) + 1j * rng.standard_normal(cfg.n_r)
            ) * np.sqrt(sigma2 / 2.0)
            W = zf_matrix(H)
            w_u = W @ u
            zf_power = float(np.real(np.vdot(w_u, w_u)))

            t0 = time.perf_counter()
            counters = {}
            res = precode_vpp(
                H,
                u,
                P=P,
                tau=tau,
                params=cfg.cac,
                seed=derive_seed(cfg.seed, _DOM_DOWNLINK, snr_idx, trial, 3),
                n_stages=cfg.n_stages,
                counters=counters,
            )
            out[(snr_idx, "vpp")]["time"] += time.perf_counter() - t0

            for det, x_tx, power in (
                ("zf", np.sqrt(P) * w_u / np.linalg.norm(w_u), zf_power),
                ("vpp", res.x_transmit, res.unnormalized_power),
            ):
                gain = np.sqrt(P / power)
                z = fold_mod_tau((H @ x_tx + noise) / gain, tau)
                u_hat = project_to_constellation(z, const)
                cell = out[(snr_idx, det)]
                cell["sym"][j] = symbol_errors(u, u_hat)
                cell["bit"][j] = bit_errors(u, u_hat, const)
                cell["energy"][j] = power
            out[(snr_idx, "vpp")]["diverged"][j] = counters.get("diverged", 0)
    return out


def run_precoding_sweep(cfg: ExperimentConfig) -> list:
    """Paired downlink sweep: ZF vs VPP through a modulo-tau receiver.

    The per-row mean_energy column is the mean unnormalized transmit power
    ||W(u + tau*v)||^2 (v = 0 for ZF), the quantity VPP minimizes.
    """
    cfg.validate()
    if cfg.mode != "downlink_sweep":
        raise ValueError(f"config mode is {cfg.mode!r}, expected downlink_sweep")
    if cfg.n_r > cfg.n_t:
        raise ValueError("downlink requires n_r <= n_t")
    const = make_qam(cfg.modulation)
    blocks = partition_blocks(cfg.n_trials, cfg.n_workers)
    results = run_blocks(_precode_block, [(cfg, a, b) for a, b in blocks])

    rows = []
    n_sym = cfg.n_trials * cfg.n_r
    n_bit = n_sym * const.bits_per_symbol
    for snr_idx, snr_db in enumerate(cfg.snr_grid_db):
        for det in ("zf", "vpp"):
            parts = [r[(snr_idx, det)] for r in results]
            sym = np.concatenate([p["sym"] for p in parts])
            bit = np.concatenate([p["bit"] for p in parts])
            energy = np.concatenate([p["energy"] for p in parts])
            diverged = np.concatenate([p["diverged"] for p in parts])
            rows.append(
                SweepRow(
                    snr_db=float(snr_db),
                    detector=det,
                    ser=float(np.sum(sym) / n_sym),
                    ber=float(np.sum(bit) / n_bit),
                    mean_energy=float(np.sum(energy) / cfg.n_trials),
                    mean_diverged=float(np.sum(diverged) / cfg.n_trials),
                    wall_time_s=float(sum(p["time"] for p in parts)),
                    n_trials=cfg.n_trials,
                )
            )
    if cfg.output_path:
        write_csv(cfg.output_path, rows, config_hash(cfg))
    return rows
