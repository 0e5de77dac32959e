"""Constellations, random MIMO channels, and noisy transmission.

Conventions used throughout the package:

* symbols have unit average energy, so the per-complex-dimension noise
  variance at a given SNR is ``sigma2 = n_t / 10**(snr_db / 10)`` (average
  received signal power per antenna over noise power, with i.i.d. unit
  channels);
* channels are i.i.d. circularly-symmetric complex Gaussian with unit
  variance per entry;
* bit counting uses a Gray code per PAM dimension.

Everything here is a pure function of its arguments (and seed), so it is
safe to call from any number of worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Constellation",
    "MimoInstance",
    "make_qam",
    "sample_channel",
    "transmit",
    "project_to_constellation",
    "bit_errors",
    "symbol_errors",
]

_SUPPORTED_QAM = (4, 16, 64, 256)


@dataclass(frozen=True)
class Constellation:
    """A product alphabet built from one list of PAM levels per dimension.

    ``points[i * len(pam_levels) + q] = pam_levels[i] + 1j * pam_levels[q]``
    (real index major), so the point ordering is deterministic.  Square QAM
    alphabets from :func:`make_qam` additionally have unit average energy.
    """

    order: int
    points: np.ndarray = field(repr=False)      # (order,) complex128
    pam_levels: np.ndarray = field(repr=False)  # ascending float64
    spacing: float

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.order)))

    @property
    def bits_per_dim(self) -> int:
        return int(round(math.log2(len(self.pam_levels))))


@dataclass(frozen=True)
class MimoInstance:
    """One detection problem: channel, observation, alphabet, noise level."""

    H: np.ndarray
    y: np.ndarray
    constellation: Constellation
    noise_var: float
    truth: np.ndarray | None = None

    def __post_init__(self):
        if self.H.ndim != 2 or self.y.shape != (self.H.shape[0],):
            raise ValueError("channel/observation dimensions are inconsistent")
        if self.truth is not None and self.truth.shape != (self.H.shape[1],):
            raise ValueError("truth length must match the channel column count")
        if self.noise_var < 0:
            raise ValueError("noise_var must be nonnegative")

    @property
    def n_r(self) -> int:
        return self.H.shape[0]

    @property
    def n_t(self) -> int:
        return self.H.shape[1]


def make_qam(order: int) -> Constellation:
    """Build a unit-average-energy square QAM constellation.

    Supported orders are 4, 16, 64 and 256; anything else raises ValueError.
    """
    if order not in _SUPPORTED_QAM:
        raise ValueError(
            f"unsupported QAM order {order}; expected one of {_SUPPORTED_QAM}"
        )
    m = math.isqrt(order)
    raw = np.arange(-(m - 1), m, 2, dtype=np.float64)  # odd integers
    # average symbol energy of the raw grid is 2*(m^2 - 1)/3
    norm = math.sqrt(2.0 * (m * m - 1) / 3.0)
    pam = raw / norm
    points = (pam[:, None] + 1j * pam[None, :]).reshape(-1)
    return Constellation(
        order=order,
        points=points,
        pam_levels=pam,
        spacing=float(2.0 / norm),
    )


def sample_channel(n_r: int, n_t: int, rng_seed: int) -> np.ndarray:
    """Draw an i.i.d. CN(0, 1) channel matrix, deterministic in the seed."""
    if not n_r >= n_t >= 1:
        raise ValueError(f"need n_r >= n_t >= 1, got ({n_r}, {n_t})")
    rng = np.random.default_rng(rng_seed)
    re = rng.standard_normal((n_r, n_t))
    im = rng.standard_normal((n_r, n_t))
    return (re + 1j * im) * np.sqrt(0.5)


def transmit(
    H: np.ndarray, x: np.ndarray, snr_db: float, rng_seed: int
) -> tuple[np.ndarray, float]:
    """Pass ``x`` through ``H`` and add white noise for the requested SNR.

    Returns ``(y, noise_var)`` where ``noise_var`` is the per-complex-dimension
    variance ``n_t / 10**(snr_db / 10)``.  ``snr_db = inf`` disables the noise
    exactly.
    """
    n_r, n_t = H.shape
    if x.shape != (n_t,):
        raise ValueError("transmit vector length must match channel columns")
    sigma2 = float(n_t / (10.0 ** (snr_db / 10.0)))
    rng = np.random.default_rng(rng_seed)
    noise = (rng.standard_normal(n_r) + 1j * rng.standard_normal(n_r)) * math.sqrt(
        sigma2 / 2.0
    )
    return H @ x + noise, sigma2


def _nearest_level_indices(values: np.ndarray, levels: np.ndarray) -> np.ndarray:
    # Midpoint thresholds; searchsorted(side="left") sends exact midpoints to
    # the smaller level.
    mids = (levels[:-1] + levels[1:]) / 2.0
    return np.searchsorted(mids, values, side="left")


def project_to_constellation(x_soft: np.ndarray, c: Constellation) -> np.ndarray:
    """Round each entry to the nearest constellation point, per dimension.

    Idempotent on constellation points; midpoint ties go to the smaller level.
    """
    x_soft = np.asarray(x_soft)
    levels = c.pam_levels
    re = levels[_nearest_level_indices(x_soft.real, levels)]
    im = levels[_nearest_level_indices(x_soft.imag, levels)]
    return re + 1j * im


_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def _gray(idx: np.ndarray) -> np.ndarray:
    return np.bitwise_xor(idx, idx >> 1)


def symbol_errors(x_true: np.ndarray, x_hat: np.ndarray) -> int:
    """Count entries that differ (exact complex comparison)."""
    return int(np.count_nonzero(x_true != x_hat))


def bit_errors(x_true: np.ndarray, x_hat: np.ndarray, c: Constellation) -> int:
    """Count bit errors under Gray-coded PAM labels in each dimension."""
    levels = c.pam_levels
    n = 0
    for part in ("real", "imag"):
        a = _nearest_level_indices(getattr(np.asarray(x_true), part), levels)
        b = _nearest_level_indices(getattr(np.asarray(x_hat), part), levels)
        n += int(_POPCOUNT[np.bitwise_xor(_gray(a), _gray(b))].sum())
    return n
