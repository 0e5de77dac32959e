"""Shared fixtures and independent reference implementations.

The dense-matrix builder here is the oracle for everything the factored
Ising representation claims: it materializes the full coefficient matrix
the production code must never form, so the two sides stay independent.
"""

import itertools

import numpy as np
import pytest

from isinglink import (
    MimoInstance,
    SpinVector,
    derive_seed,
    make_qam,
    sample_channel,
    transmit,
)


def dense_coefficient_matrix(si) -> np.ndarray:
    """Materialized (2N+1) x (2N+1) layout: the test-side reference.

    Diagonal blocks G - diag(G), off-diagonal blocks G, and the linear
    vector b along the last row/column beside each half.
    """
    n = si.n_dim
    m = np.zeros((si.spin_count, si.spin_count))
    core = si.G - np.diag(si.g_diag)
    m[:n, :n] = core
    m[n : 2 * n, n : 2 * n] = core
    m[:n, n : 2 * n] = si.G
    m[n : 2 * n, :n] = si.G
    m[:n, 2 * n] = si.b
    m[n : 2 * n, 2 * n] = si.b
    m[2 * n, :n] = si.b
    m[2 * n, n : 2 * n] = si.b
    return m


def dense_energy(si, s_arr: np.ndarray) -> float:
    return float(s_arr @ dense_coefficient_matrix(si) @ s_arr)


def all_spin_vectors(spin_count: int):
    """Every +-1 assignment, as float arrays (use only for small counts)."""
    for bits in itertools.product((-1.0, 1.0), repeat=spin_count):
        yield np.array(bits)


def spin_vector_from(arr: np.ndarray) -> SpinVector:
    return SpinVector.from_array(np.asarray(arr))


def random_instance(
    n_r: int,
    n_t: int,
    order: int,
    snr_db: float,
    tag: int,
    trial: int = 0,
) -> MimoInstance:
    """Deterministic random instance; the same (tag, trial) always matches."""
    const = make_qam(order)
    H = sample_channel(n_r, n_t, derive_seed(tag, trial, 0))
    rng = np.random.default_rng(derive_seed(tag, trial, 1))
    x = const.points[rng.integers(0, const.order, n_t)]
    y, noise_var = transmit(H, x, snr_db, derive_seed(tag, trial, 2))
    return MimoInstance(H=H, y=y, constellation=const, noise_var=noise_var, truth=x)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
