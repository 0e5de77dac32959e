"""Linear baseline detectors: MMSE, MMSE-SIC, and brute-force ML.

All three are deterministic functions of the instance.  The MMSE and
MMSE-SIC hard decisions double as initial guesses for the Ising-machine
detector, so their outputs are always projected onto the constellation
before the residual energy is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import MimoInstance, project_to_constellation

__all__ = [
    "DetectionResult",
    "residual_energy",
    "mmse_soft",
    "detect_mmse",
    "detect_mmse_sic",
    "detect_ml",
]

# enumeration guard for detect_ml: n_t * bits_per_symbol must not exceed this
ML_MAX_BITS = 24

_ML_CHUNK = 8192


@dataclass(frozen=True)
class DetectionResult:
    """Hard decision plus its residual energy and provenance."""

    x_hard: np.ndarray
    energy: float
    source: str            # "mmse" | "mmse_sic" | "ml" | "anneal"
    anneal_index: int = -1  # winning anneal when source == "anneal"
    diverged_count: int = 0


def residual_energy(H: np.ndarray, y: np.ndarray, x: np.ndarray) -> float:
    """Squared residual norm ||y - Hx||^2, the ML objective."""
    r = y - H @ x
    return float(np.real(np.vdot(r, r)))


def _check_tall(inst: MimoInstance) -> None:
    if inst.n_r < inst.n_t:
        raise ValueError("uplink detection requires n_r >= n_t")


def mmse_soft(inst: MimoInstance) -> np.ndarray:
    """Regularized least-squares estimate (H^H H + rho I)^-1 H^H y.

    rho is the noise variance over the (unit) symbol energy.  The solve goes
    through a Cholesky factorization of the regularized normal matrix; a
    singular matrix at rho = 0 surfaces as a LinAlgError.
    """
    _check_tall(inst)
    H, y = inst.H, inst.y
    rho = inst.noise_var
    A = H.conj().T @ H + rho * np.eye(inst.n_t)
    return cho_solve(cho_factor(A), H.conj().T @ y)


def detect_mmse(inst: MimoInstance) -> DetectionResult:
    x_hard = project_to_constellation(mmse_soft(inst), inst.constellation)
    return DetectionResult(
        x_hard=x_hard,
        energy=residual_energy(inst.H, inst.y, x_hard),
        source="mmse",
    )


def detect_mmse_sic(inst: MimoInstance) -> DetectionResult:
    """MMSE with ordered successive interference cancellation.

    Each round equalizes the remaining users, hard-decides the one with the
    best post-equalization SINR (smallest diagonal of the inverse regularized
    normal matrix), subtracts its contribution, and shrinks the channel.
    """
    _check_tall(inst)
    H, y = inst.H, inst.y
    rho = inst.noise_var
    remaining = list(range(inst.n_t))
    y_res = y.copy()
    x_hard = np.zeros(inst.n_t, dtype=complex)
    while remaining:
        Hs = H[:, remaining]
        A = Hs.conj().T @ Hs + rho * np.eye(len(remaining))
        cf = cho_factor(A)
        A_inv = cho_solve(cf, np.eye(len(remaining)))
        x_soft = cho_solve(cf, Hs.conj().T @ y_res)
        k = int(np.argmin(A_inv.real.diagonal()))
        sym = project_to_constellation(x_soft[k : k + 1], inst.constellation)[0]
        user = remaining.pop(k)
        x_hard[user] = sym
        y_res = y_res - H[:, user] * sym
    return DetectionResult(
        x_hard=x_hard,
        energy=residual_energy(H, y, x_hard),
        source="mmse_sic",
    )


def detect_ml(inst: MimoInstance) -> DetectionResult:
    """Exhaustive maximum-likelihood search over the symbol alphabet.

    Ties are broken toward the lexicographically smallest symbol-index
    vector (user 0 most significant).  Refuses search spaces beyond
    ``ML_MAX_BITS`` bits.
    """
    const = inst.constellation
    n_t = inst.n_t
    bits = n_t * const.bits_per_symbol
    if bits > ML_MAX_BITS:
        raise ValueError(
            f"ML search space of {bits} bits exceeds the {ML_MAX_BITS}-bit guard"
        )
    M = const.order
    total = M**n_t
    best_e = np.inf
    best_k = -1
    weights = M ** np.arange(n_t - 1, -1, -1)  # user 0 most significant
    for start in range(0, total, _ML_CHUNK):
        ks = np.arange(start, min(start + _ML_CHUNK, total))
        digits = (ks[:, None] // weights[None, :]) % M
        X = const.points[digits]  # (chunk, n_t)
        R = inst.y[None, :] - X @ inst.H.T
        energies = np.sum(R.real**2 + R.imag**2, axis=1)
        i = int(np.argmin(energies))
        if energies[i] < best_e:
            best_e = float(energies[i])
            best_k = int(ks[i])
    digits = (best_k // weights) % M
    x_best = const.points[digits]
    return DetectionResult(
        x_hard=x_best,
        energy=residual_energy(inst.H, inst.y, x_best),
        source="ml",
    )
