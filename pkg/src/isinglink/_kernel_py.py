"""Pure-NumPy integration kernel (fallback for the compiled extension).

Both kernels implement the same contract: explicit-Euler integration of the
amplitude-controlled Ising dynamics for a batch of independent anneals over
one shared read-only problem, with the coupling matrix-vector product
refreshed every ``f_mvm`` steps and reused in between.  An anneal halts the
moment any state magnitude crosses the divergence threshold or goes
non-finite; its state is frozen there and it is flagged.

The fallback vectorizes across the anneal batch, so each anneal's arithmetic
matches the scalar loop of the compiled kernel except for the summation
order inside the half-size matrix product (BLAS vs. a plain C loop).
Results are therefore reproducible per backend, and agree across backends
to floating-point accumulation accuracy rather than bit-exactly.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def run_anneals(
    G: np.ndarray,
    g_diag: np.ndarray,
    b: np.ndarray,
    x0: np.ndarray,
    dt: float,
    p: float,
    a: float,
    zeta: float,
    eps: float,
    e_floor: float,
    f_mvm: int,
    n_steps: int,
    diverge_threshold: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Integrate a batch of anneals; returns (spins, diverged, steps, mvms).

    ``x0`` is (n_anneals, 2N+1); spins come back as int8 with sign(0) = +1.
    """
    n_batch, n_spins = x0.shape
    n = G.shape[0]

    x = x0.astype(np.float64, copy=True)
    e = np.ones_like(x)
    coupling = np.zeros_like(x)
    active = np.ones(n_batch, dtype=bool)
    steps = np.full(n_batch, n_steps, dtype=np.int64)
    mvms = np.zeros(n_batch, dtype=np.int64)

    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(n_steps):
            if step % f_mvm == 0:
                x1 = x[:, :n]
                x2 = x[:, n : 2 * n]
                xa = x[:, 2 * n : 2 * n + 1]
                v = x1 + x2
                # per-row products keep every anneal's arithmetic independent
                # of how the batch is composed (order-independence contract)
                m = np.empty_like(v)
                for r in range(n_batch):
                    m[r] = v[r] @ G
                    coupling[r, 2 * n] = v[r] @ b
                coupling[:, :n] = m - x1 * g_diag + b * xa
                coupling[:, n : 2 * n] = m - x2 * g_diag + b * xa
                mvms += active

            # simultaneous explicit Euler; the minus sign makes the coupling
            # term descend the quadratic energy
            dx = (p - 1.0) * x - x * x * x - eps * e * coupling
            de = -zeta * (x * x - a) * e
            mask = active[:, None]
            x = np.where(mask, x + dt * dx, x)
            e = np.where(mask, np.maximum(e_floor, e + dt * de), e)

            bad = (
                (np.abs(x) > diverge_threshold).any(axis=1)
                | (~np.isfinite(x)).any(axis=1)
                | (~np.isfinite(e)).any(axis=1)
            )
            newly = active & bad
            if newly.any():
                steps[newly] = step + 1
                active &= ~bad
                if not active.any():
                    break

    spins = np.where(x >= 0.0, 1, -1).astype(np.int8)
    diverged = np.logical_not(active)
    return spins, diverged, steps, mvms


def run_anneal_traced(
    G: np.ndarray,
    g_diag: np.ndarray,
    b: np.ndarray,
    x0: np.ndarray,
    dt: float,
    p: float,
    a: float,
    zeta: float,
    eps: float,
    e_floor: float,
    f_mvm: int,
    n_steps: int,
    diverge_threshold: float,
) -> dict:
    """Single-anneal variant that records the full (x, e) trajectory.

    Test/debug helper: mirrors run_anneals for a batch of one and returns the
    per-step history so invariants (error-variable floor, halt-on-divergence)
    can be checked directly.
    """
    x = x0.reshape(1, -1)
    n = G.shape[0]
    x_hist = [x[0].copy()]
    e_hist = [np.ones(x.shape[1])]
    xr = x.astype(np.float64, copy=True)
    e = np.ones_like(xr)
    coupling = np.zeros_like(xr)
    diverged = False
    steps_run = n_steps
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(n_steps):
            if step % f_mvm == 0:
                x1, x2, xa = xr[:, :n], xr[:, n : 2 * n], xr[:, 2 * n : 2 * n + 1]
                v = x1 + x2
                m = (v[0] @ G)[None, :]
                coupling[:, :n] = m - x1 * g_diag + b * xa
                coupling[:, n : 2 * n] = m - x2 * g_diag + b * xa
                coupling[:, 2 * n] = v[0] @ b
            dx = (p - 1.0) * xr - xr * xr * xr - eps * e * coupling
            de = -zeta * (xr * xr - a) * e
            xr = xr + dt * dx
            e = np.maximum(e_floor, e + dt * de)
            x_hist.append(xr[0].copy())
            e_hist.append(e[0].copy())
            if (
                (np.abs(xr) > diverge_threshold).any()
                or not np.isfinite(xr).all()
                or not np.isfinite(e).all()
            ):
                diverged = True
                steps_run = step + 1
                break
    return {
        "spins": np.where(xr[0] >= 0.0, 1, -1).astype(np.int8),
        "diverged": diverged,
        "steps": steps_run,
        "x_hist": np.array(x_hist),
        "e_hist": np.array(e_hist),
    }
