"""Worker-scaling and kernel benchmarks over a fixed detection batch.

A batch of independent problems is pre-generated once (instance generation
is excluded from all timings), split into contiguous blocks, and detected
under each worker count in the configured grid.  Outputs are collected per
instance and compared bitwise across worker counts.  The report also times
the per-instance critical path (one problem, and one anneal — the floor if
all anneals ran in parallel) and, when both integration kernels are
importable, compares the compiled and pure-Python backends head to head.
"""

from __future__ import annotations

import dataclasses
import json
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import psutil

from ..channel import MimoInstance, make_qam
from ..detector import detect_cim
from ..solver import available_kernels, derive_seed, integrate_anneal, kernel_backend, use_kernel
from ..transform import build_ising
from ..linear import detect_mmse
from .config import ExperimentConfig, config_hash
from .sweeps import make_uplink_instance
from .workers import partition_blocks

__all__ = ["run_bench", "physical_cpu_count"]

_DOM_BENCH = 4

_TIMING_REPEATS = 2


def physical_cpu_count() -> int:
    count = psutil.cpu_count(logical=False)
    return count if count else 1


def _bench_instances(cfg: ExperimentConfig) -> list:
    bench_cfg = cfg
    if len(cfg.snr_grid_db) > 1:
        bench_cfg = dataclasses.replace(cfg, snr_grid_db=(cfg.snr_grid_db[0],))
    return [make_uplink_instance(bench_cfg, 0, t) for t in range(cfg.batch_size)]


def _pack_instances(instances: list) -> dict:
    """Stack the batch into flat arrays: cheap to ship to worker processes."""
    return {
        "H": np.stack([inst.H for inst in instances]),
        "y": np.stack([inst.y for inst in instances]),
        "noise_var": np.array([inst.noise_var for inst in instances]),
        "order": instances[0].constellation.order,
    }


def _bench_block(payload):
    cfg, packed, start, stop = payload
    const = make_qam(packed["order"])
    out = []
    for i in range(start, stop):
        inst = MimoInstance(
            H=packed["H"][i],
            y=packed["y"][i],
            constellation=const,
            noise_var=float(packed["noise_var"][i]),
        )
        res = detect_cim(inst, cfg.cac, derive_seed(cfg.seed, _DOM_BENCH, i))
        out.append((res.x_hard.tobytes(), res.energy))
    return out


def _warmup(_):
    return None


def _timed_partitioned_run(payloads: list) -> tuple[list, float]:
    """Detect the batch with one process per payload; pool startup is warmed
    up outside the timed window.  The single-payload path runs inline."""
    if len(payloads) == 1:
        t0 = time.perf_counter()
        out = [_bench_block(payloads[0])]
        return out, time.perf_counter() - t0
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=len(payloads), mp_context=ctx) as pool:
        list(pool.map(_warmup, range(len(payloads))))
        t0 = time.perf_counter()
        out = list(pool.map(_bench_block, payloads))
        elapsed = time.perf_counter() - t0
    return out, elapsed


def _critical_path(cfg: ExperimentConfig, instances: list, n_probe: int = 32) -> dict:
    """Mean per-instance and per-anneal solve times on a probe subset."""
    probe = instances[:n_probe]
    t0 = time.perf_counter()
    for i, inst in enumerate(probe):
        detect_cim(inst, cfg.cac, derive_seed(cfg.seed, _DOM_BENCH, i))
    per_instance = (time.perf_counter() - t0) / len(probe)

    t0 = time.perf_counter()
    for i, inst in enumerate(probe):
        si = build_ising(inst, detect_mmse(inst).x_hard)
        integrate_anneal(si, cfg.cac, derive_seed(cfg.seed, _DOM_BENCH, i, 0))
    per_anneal = (time.perf_counter() - t0) / len(probe)
    return {
        "per_instance_s": per_instance,
        "per_anneal_path_s": per_anneal,
        "n_probe": len(probe),
    }


def _kernel_comparison(cfg: ExperimentConfig, instances: list, n_probe: int = 64):
    """Time both kernels on the same problems and check output agreement."""
    kernels = available_kernels()
    if len(kernels) < 2:
        return None
    probe = instances[:n_probe]
    timings = {}
    outputs = {}
    for name in sorted(kernels):
        with use_kernel(name):
            t0 = time.perf_counter()
            res = [
                detect_cim(inst, cfg.cac, derive_seed(cfg.seed, _DOM_BENCH, i))
                for i, inst in enumerate(probe)
            ]
            timings[name] = (time.perf_counter() - t0) / len(probe)
            outputs[name] = res
    agree = sum(
        np.array_equal(a.x_hard, b.x_hard)
        for a, b in zip(outputs["ext"], outputs["python"])
    )
    return {
        "ext_per_instance_s": timings["ext"],
        "python_per_instance_s": timings["python"],
        "speedup": timings["python"] / timings["ext"],
        "output_agreement": agree / len(probe),
        "n_probe": len(probe),
    }


def run_bench(cfg: ExperimentConfig) -> dict:
    """Scaling report over cfg.worker_grid; writes JSON if output_path set."""
    cfg.validate()
    if cfg.mode != "bench":
        raise ValueError(f"config mode is {cfg.mode!r}, expected bench")
    instances = _bench_instances(cfg)
    packed = _pack_instances(instances)

    scaling = []
    reference_outputs = None
    outputs_identical = True
    t_serial = None
    for n_workers in cfg.worker_grid:
        blocks = partition_blocks(cfg.batch_size, n_workers)
        payloads = [(cfg, packed, a, b) for a, b in blocks]
        elapsed = float("inf")
        for _ in range(_TIMING_REPEATS):
            results, once = _timed_partitioned_run(payloads)
            elapsed = min(elapsed, once)
        outputs = [item for block in results for item in block]
        if reference_outputs is None:
            reference_outputs = outputs
            t_serial = elapsed if n_workers == 1 else None
        elif outputs != reference_outputs:
            outputs_identical = False
        if n_workers == 1 and t_serial:
            speedup, efficiency = 1.0, 1.0
        elif t_serial:
            speedup = t_serial / elapsed
            efficiency = speedup / n_workers
        else:
            speedup = efficiency = float("nan")
        scaling.append(
            {
                "n_workers": n_workers,
                "wall_time_s": elapsed,
                "speedup": speedup,
                "efficiency": efficiency,
            }
        )

    report = {
        "config_hash": config_hash(cfg),
        "backend": kernel_backend(),
        "batch_size": cfg.batch_size,
        "n_anneals": cfg.cac.n_anneals,
        "physical_cores": physical_cpu_count(),
        "scaling": scaling,
        "outputs_identical": outputs_identical,
        "critical_path": _critical_path(cfg, instances),
        "kernel_comparison": _kernel_comparison(cfg, instances),
    }
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    return report
