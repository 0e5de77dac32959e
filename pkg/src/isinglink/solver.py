"""Batched explicit-Euler solver for the structured Ising problems.

The hot loop lives in a compiled extension (``isinglink._kernel``) with a
NumPy fallback (``isinglink._kernel_py``); the active one is chosen at
import time and can be forced with the ``ISINGLINK_KERNEL`` environment
variable (``auto``, ``ext``, or ``python``).  Everything around the loop —
seeding, energy evaluation, winner selection — is shared Python code, so a
backend only influences results through the integration arithmetic itself.
"""

from __future__ import annotations

import contextlib
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .transform import SpinVector, StructuredIsing

__all__ = [
    "CacParams",
    "AnnealResult",
    "kernel_backend",
    "available_kernels",
    "use_kernel",
    "derive_seed",
    "structured_mvm",
    "integrate_anneal",
    "solve_batch",
]


def _load_kernel():
    choice = os.environ.get("ISINGLINK_KERNEL", "auto").lower()
    if choice not in ("auto", "ext", "python"):
        raise ValueError(f"ISINGLINK_KERNEL must be auto|ext|python, not {choice!r}")
    if choice in ("auto", "ext"):
        try:
            from . import _kernel

            return _kernel
        except ImportError:
            if choice == "ext":
                raise
    from . import _kernel_py

    return _kernel_py


_impl = _load_kernel()


def kernel_backend() -> str:
    """Name of the active integration kernel: "ext" or "python"."""
    return _impl.BACKEND_NAME


def available_kernels() -> dict:
    """All importable kernel modules, keyed by backend name."""
    from . import _kernel_py

    kernels = {_kernel_py.BACKEND_NAME: _kernel_py}
    try:
        from . import _kernel

        kernels[_kernel.BACKEND_NAME] = _kernel
    except ImportError:
        pass
    return kernels


@contextlib.contextmanager
def use_kernel(name: str):
    """Temporarily swap the active kernel (benchmark/test tool, not
    thread-safe)."""
    global _impl
    previous = _impl
    _impl = available_kernels()[name]
    try:
        yield
    finally:
        _impl = previous


@dataclass(frozen=True)
class CacParams:
    """Integration configuration for the amplitude-controlled dynamics.

    ``eps=None`` auto-scales the coupling strength per problem to
    1/sqrt(lambda_max(G) * spin_count).  The defaults put the decoupled
    fixed points at +-sqrt(p - 1) = +-sqrt(a) and spend a total integration
    time of dt * n_steps = 2.56.
    """

    p: float = 1.5
    a: float = 0.5
    zeta: float = 1.0
    eps: float | None = None
    dt: float = 0.02
    f_mvm: int = 2
    n_steps: int = 128
    n_anneals: int = 32
    diverge_threshold: float = 10.0
    e_floor: float = 1e-6
    init_amplitude: float = 0.1

    def validate(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.f_mvm < 1 or self.n_steps < 1 or self.n_anneals < 1:
            raise ValueError("f_mvm, n_steps and n_anneals must be >= 1")
        if not self.e_floor > 0:
            raise ValueError("e_floor must be positive")
        if self.init_amplitude <= 0:
            raise ValueError("init_amplitude must be positive")
        if self.eps is not None and not self.eps > 0:
            raise ValueError("eps must be positive or None for auto scaling")
        floor = math.sqrt(max(self.a, self.p - 1.0, 0.0))
        if not self.diverge_threshold > floor:
            raise ValueError(
                f"diverge_threshold must exceed sqrt(max(a, p - 1)) = {floor:.3g}"
            )


@dataclass(frozen=True)
class AnnealResult:
    """Outcome of one anneal; a diverged result must not enter selection."""

    spins: SpinVector = field(repr=False)
    energy: float
    diverged: bool
    anneal_index: int


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from a tuple of integers.

    Built on NumPy's SeedSequence so independent streams (anneals, chains,
    sweep trials) stay decorrelated and reproducible across platforms.
    """
    state = np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


def structured_mvm(
    si: StructuredIsing, x1: np.ndarray, x2: np.ndarray, xa: float
) -> np.ndarray:
    """Product of the implicit (2N+1)-dimensional coefficient matrix with
    [x1; x2; xa], computed from the half-size block only:

        m = G (x1 + x2)
        out_1 = m - g_diag * x1 + b * xa
        out_2 = m - g_diag * x2 + b * xa
        out_last = b . (x1 + x2)
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != (si.n_dim,) or x2.shape != (si.n_dim,):
        raise ValueError("x1/x2 must have length n_dim")
    v = x1 + x2
    m = si.G @ v
    out = np.empty(si.spin_count)
    out[: si.n_dim] = m - si.g_diag * x1 + si.b * xa
    out[si.n_dim : 2 * si.n_dim] = m - si.g_diag * x2 + si.b * xa
    out[2 * si.n_dim] = si.b @ v
    return out


def _energy_of_spins(si: StructuredIsing, s_arr: np.ndarray) -> float:
    n = si.n_dim
    u = (s_arr[:n] + s_arr[n : 2 * n]).astype(np.float64)
    aux = float(s_arr[2 * n])
    return float(u @ (si.G @ u) - 2.0 * si.g_diag.sum() + 2.0 * aux * (si.b @ u))


def _resolved_eps(si: StructuredIsing, params: CacParams) -> float:
    return si.eps_scale if params.eps is None else params.eps


def _initial_states(si: StructuredIsing, params: CacParams, seeds) -> np.ndarray:
    x0 = np.empty((len(seeds), si.spin_count))
    for i, seed in enumerate(seeds):
        rng = np.random.default_rng(seed)
        x0[i] = rng.uniform(-params.init_amplitude, params.init_amplitude, si.spin_count)
    return x0


def _run(si: StructuredIsing, params: CacParams, x0: np.ndarray):
    return _impl.run_anneals(
        np.ascontiguousarray(si.G),
        np.ascontiguousarray(si.g_diag),
        np.ascontiguousarray(si.b),
        np.ascontiguousarray(x0),
        params.dt,
        params.p,
        params.a,
        params.zeta,
        _resolved_eps(si, params),
        params.e_floor,
        params.f_mvm,
        params.n_steps,
        params.diverge_threshold,
    )


def _note(counters: dict | None, diverged, steps, mvms) -> None:
    if counters is None:
        return
    counters["anneals"] = counters.get("anneals", 0) + len(steps)
    counters["diverged"] = counters.get("diverged", 0) + int(np.sum(diverged))
    counters["steps"] = counters.get("steps", 0) + int(np.sum(steps))
    counters["mvm_updates"] = counters.get("mvm_updates", 0) + int(np.sum(mvms))


def integrate_anneal(
    si: StructuredIsing, params: CacParams, seed: int, counters: dict | None = None
) -> AnnealResult:
    """Run a single anneal from a seeded random initial state.

    The state starts uniform in [-init_amplitude, +init_amplitude] with unit
    error variables; integration halts immediately on divergence and the
    result is flagged.  Bit-identical for identical (problem, params, seed).
    """
    params.validate()
    x0 = _initial_states(si, params, [seed])
    spins, diverged, steps, mvms = _run(si, params, x0)
    _note(counters, diverged, steps, mvms)
    return AnnealResult(
        spins=SpinVector.from_array(spins[0]),
        energy=_energy_of_spins(si, spins[0]),
        diverged=bool(diverged[0]),
        anneal_index=0,
    )


def solve_batch(
    si: StructuredIsing,
    params: CacParams,
    fallback_energy: float,
    base_seed: int,
    counters: dict | None = None,
) -> tuple[AnnealResult | None, int]:
    """Run ``n_anneals`` independent anneals and pick the best survivor.

    Anneal ``i`` is seeded with ``derive_seed(base_seed, i)``, so the outcome
    does not depend on execution order or batching.  Diverged anneals are
    discarded; ties go to the lowest anneal index.  Returns ``(None, k)``
    when every anneal diverged or the best Ising energy (plus the problem
    offset) exceeds ``fallback_energy`` — the caller's fallback wins.
    """
    params.validate()
    seeds = [derive_seed(base_seed, i) for i in range(params.n_anneals)]
    x0 = _initial_states(si, params, seeds)
    spins, diverged, steps, mvms = _run(si, params, x0)
    _note(counters, diverged, steps, mvms)
    diverged_count = int(np.sum(diverged))

    best_i = -1
    best_e = np.inf
    for i in range(params.n_anneals):
        if diverged[i]:
            continue
        e = _energy_of_spins(si, spins[i])
        if e < best_e:
            best_e = e
            best_i = i
    if best_i < 0 or best_e + si.offset > fallback_energy:
        return None, diverged_count
    return (
        AnnealResult(
            spins=SpinVector.from_array(spins[best_i]),
            energy=best_e,
            diverged=False,
            anneal_index=best_i,
        ),
        diverged_count,
    )
