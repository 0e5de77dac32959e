# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled integration kernel for the amplitude-controlled Ising dynamics.

Same contract as ``_kernel_py.run_anneals``; this version runs each anneal
as a tight scalar loop with the half-size coupling product written out by
hand, which is where essentially all solver time goes.
"""

import numpy as np

from libc.math cimport fabs, isfinite

BACKEND_NAME = "ext"


def run_anneals(
    const double[:, ::1] G,
    const double[::1] g_diag,
    const double[::1] b,
    const double[:, ::1] x0,
    double dt,
    double p,
    double a,
    double zeta,
    double eps,
    double e_floor,
    int f_mvm,
    int n_steps,
    double diverge_threshold,
):
    """Integrate a batch of anneals; returns (spins, diverged, steps, mvms)."""
    cdef Py_ssize_t n_batch = x0.shape[0]
    cdef Py_ssize_t n_spins = x0.shape[1]
    cdef Py_ssize_t n = G.shape[0]

    spins_arr = np.empty((n_batch, n_spins), dtype=np.int8)
    diverged_arr = np.zeros(n_batch, dtype=np.uint8)
    steps_arr = np.full(n_batch, n_steps, dtype=np.int64)
    mvms_arr = np.zeros(n_batch, dtype=np.int64)
    x_arr = np.empty(n_spins, dtype=np.float64)
    e_arr = np.empty(n_spins, dtype=np.float64)
    c_arr = np.zeros(n_spins, dtype=np.float64)
    v_arr = np.empty(n, dtype=np.float64)

    cdef signed char[:, ::1] spins = spins_arr
    cdef unsigned char[::1] diverged = diverged_arr
    cdef long long[::1] steps = steps_arr
    cdef long long[::1] mvms = mvms_arr
    cdef double[::1] x = x_arr
    cdef double[::1] e = e_arr
    cdef double[::1] coupling = c_arr
    cdef double[::1] v = v_arr

    cdef Py_ssize_t batch, step, i, j
    cdef double xi, ei, dxi, dei, xa, acc, bdot
    cdef bint bad

    with nogil:
        for batch in range(n_batch):
            for i in range(n_spins):
                x[i] = x0[batch, i]
                e[i] = 1.0
                coupling[i] = 0.0
            for step in range(n_steps):
                if step % f_mvm == 0:
                    xa = x[2 * n]
                    bdot = 0.0
                    for i in range(n):
                        v[i] = x[i] + x[n + i]
                        bdot += b[i] * v[i]
                    for i in range(n):
                        acc = 0.0
                        for j in range(n):
                            acc += G[i, j] * v[j]
                        coupling[i] = acc - g_diag[i] * x[i] + b[i] * xa
                        coupling[n + i] = acc - g_diag[i] * x[n + i] + b[i] * xa
                    coupling[2 * n] = bdot
                    mvms[batch] += 1

                bad = False
                for i in range(n_spins):
                    xi = x[i]
                    ei = e[i]
                    dxi = (p - 1.0) * xi - xi * xi * xi - eps * ei * coupling[i]
                    dei = -zeta * (xi * xi - a) * ei
                    xi = xi + dt * dxi
                    ei = ei + dt * dei
                    if ei < e_floor:
                        ei = e_floor
                    x[i] = xi
                    e[i] = ei
                    if fabs(xi) > diverge_threshold or not isfinite(xi) or not isfinite(ei):
                        bad = True
                if bad:
                    diverged[batch] = 1
                    steps[batch] = step + 1
                    break

            for i in range(n_spins):
                spins[batch, i] = 1 if x[i] >= 0.0 else -1

    return spins_arr, diverged_arr.astype(bool), steps_arr, mvms_arr
