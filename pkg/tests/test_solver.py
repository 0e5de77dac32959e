import dataclasses
import math

import numpy as np
import pytest

from isinglink import (
    CacParams,
    build_ising,
    derive_seed,
    detect_mmse,
    integrate_anneal,
    ising_energy,
    solve_batch,
    structured_mvm,
)
from isinglink import _kernel_py
from conftest import dense_coefficient_matrix, random_instance


def problem(tag=3000, trial=0, n=8, order=16, snr=20.0):
    inst = random_instance(n, n, order, snr, tag=tag, trial=trial)
    return inst, build_ising(inst, detect_mmse(inst).x_hard)


class TestCacParams:
    def test_defaults_valid_and_budgeted(self):
        p = CacParams()
        p.validate()
        assert p.dt * p.n_steps == pytest.approx(2.56)
        assert p.f_mvm == 2 and p.n_anneals == 32

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dt": 0.0},
            {"f_mvm": 0},
            {"n_steps": 0},
            {"n_anneals": 0},
            {"e_floor": 0.0},
            {"init_amplitude": 0.0},
            {"eps": -1.0},
            {"diverge_threshold": 0.5},  # below sqrt(max(a, p-1)) at defaults
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            dataclasses.replace(CacParams(), **kwargs).validate()

    def test_tiny_threshold_legal_when_dynamics_allow(self):
        # p = 1, a = 0 puts the invariant floor at zero
        dataclasses.replace(
            CacParams(), p=1.0, a=0.0, diverge_threshold=0.001
        ).validate()


class TestDeriveSeed:
    def test_deterministic_and_distinct(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        seeds = {derive_seed(1, i) for i in range(1000)}
        assert len(seeds) == 1000

    def test_order_sensitive(self):
        assert derive_seed(1, 2) != derive_seed(2, 1)


class TestStructuredMvm:
    def test_zero_problem(self):
        _, si = problem()
        zeroed = dataclasses.replace(
            si,
            G=np.zeros_like(si.G),
            g_diag=np.zeros_like(si.g_diag),
            b=np.zeros_like(si.b),
        )
        out = structured_mvm(zeroed, np.ones(si.n_dim), np.ones(si.n_dim), 1.0)
        assert np.all(out == 0)

    def test_isolates_linear_column(self):
        _, si = problem()
        out = structured_mvm(si, np.zeros(si.n_dim), np.zeros(si.n_dim), 1.0)
        assert np.array_equal(out[: si.n_dim], si.b)
        assert np.array_equal(out[si.n_dim : 2 * si.n_dim], si.b)
        assert out[2 * si.n_dim] == 0.0

    @pytest.mark.parametrize("n_t", [2, 8, 16, 32])
    def test_matches_dense_product(self, n_t, rng):
        inst = random_instance(n_t, n_t, 4, 15.0, tag=3001 + n_t)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        dense = dense_coefficient_matrix(si)
        for _ in range(10):
            x = rng.standard_normal(si.spin_count)
            got = structured_mvm(x1=x[: si.n_dim], x2=x[si.n_dim : 2 * si.n_dim], xa=x[-1], si=si)
            assert np.max(np.abs(got - dense @ x)) < 1e-12

    def test_dimension_check(self):
        _, si = problem()
        with pytest.raises(ValueError):
            structured_mvm(si, np.zeros(3), np.zeros(si.n_dim), 0.0)


class TestIntegrateAnneal:
    def test_decoupled_flow_preserves_signs(self):
        # with no couplings the cubic fixed points are +-sqrt(p - 1)
        _, si = problem()
        free = dataclasses.replace(
            si,
            G=np.zeros_like(si.G),
            g_diag=np.zeros_like(si.g_diag),
            b=np.zeros_like(si.b),
        )
        params = CacParams(eps=0.1, n_steps=400)
        seed = 77
        res = integrate_anneal(free, params, seed)
        x0 = np.random.default_rng(seed).uniform(
            -params.init_amplitude, params.init_amplitude, si.spin_count
        )
        assert not res.diverged
        assert np.array_equal(res.spins.to_array(), np.where(x0 >= 0, 1.0, -1.0))

    def test_huge_step_diverges(self):
        _, si = problem()
        params = CacParams(dt=10.0, n_steps=64)
        for seed in range(5):
            assert integrate_anneal(si, params, seed).diverged

    def test_bit_identical_reruns(self):
        _, si = problem()
        a = integrate_anneal(si, CacParams(), 5)
        b = integrate_anneal(si, CacParams(), 5)
        assert np.array_equal(a.spins.to_array(), b.spins.to_array())
        assert a.energy == b.energy and a.diverged == b.diverged

    def test_energy_is_ising_energy_of_spins(self):
        _, si = problem()
        res = integrate_anneal(si, CacParams(), 3)
        assert res.energy == ising_energy(si, res.spins)

    def test_mvm_refresh_cost_model(self):
        _, si = problem()
        for n_steps, f_mvm in [(128, 2), (100, 3), (7, 8), (64, 1)]:
            counters = {}
            params = CacParams(n_steps=n_steps, f_mvm=f_mvm)
            res = integrate_anneal(si, params, 11, counters=counters)
            assert not res.diverged
            assert counters["mvm_updates"] == math.ceil(n_steps / f_mvm)
            assert counters["steps"] == n_steps
            assert counters["anneals"] == 1


class TestErrorVariables:
    def test_floor_holds_throughout(self):
        _, si = problem()
        params = CacParams(e_floor=1e-4, n_steps=200)
        x0 = np.random.default_rng(9).uniform(-0.1, 0.1, si.spin_count)
        trace = _kernel_py.run_anneal_traced(
            si.G,
            si.g_diag,
            si.b,
            x0,
            params.dt,
            params.p,
            params.a,
            params.zeta,
            si.eps_scale,
            params.e_floor,
            params.f_mvm,
            params.n_steps,
            params.diverge_threshold,
        )
        assert not trace["diverged"]
        assert np.all(trace["e_hist"] >= params.e_floor)

    def test_halts_on_divergence(self):
        _, si = problem()
        x0 = np.random.default_rng(9).uniform(-0.1, 0.1, si.spin_count)
        trace = _kernel_py.run_anneal_traced(
            si.G, si.g_diag, si.b, x0, 10.0, 1.5, 0.5, 1.0, si.eps_scale,
            1e-6, 2, 64, 10.0,
        )
        assert trace["diverged"]
        assert trace["steps"] < 64
        assert trace["x_hist"].shape[0] == trace["steps"] + 1


class TestSolveBatch:
    def test_single_anneal_matches_integrate(self):
        _, si = problem()
        params = CacParams(n_anneals=1)
        best, diverged = solve_batch(si, params, math.inf, base_seed=42)
        solo = integrate_anneal(si, params, derive_seed(42, 0))
        assert best is not None and not solo.diverged
        assert np.array_equal(best.spins.to_array(), solo.spins.to_array())
        assert best.energy == solo.energy
        assert diverged == 0

    def test_order_independence(self):
        # a batched run and one-at-a-time runs pick the same winner, bitwise
        _, si = problem()
        params = CacParams(n_anneals=8)
        best, _ = solve_batch(si, params, math.inf, base_seed=6)
        solo = [integrate_anneal(si, params, derive_seed(6, i)) for i in range(8)]
        alive = [r for r in solo if not r.diverged]
        ref = min(alive, key=lambda r: r.energy)
        assert best.energy == ref.energy
        assert np.array_equal(best.spins.to_array(), ref.spins.to_array())

    def test_all_divergent_falls_back(self):
        _, si = problem()
        params = CacParams(p=1.0, a=0.0, diverge_threshold=0.001, n_anneals=8)
        best, diverged = solve_batch(si, params, math.inf, base_seed=0)
        assert best is None
        assert diverged == 8

    def test_fallback_threshold(self):
        _, si = problem()
        params = CacParams(n_anneals=4)
        best, _ = solve_batch(si, params, math.inf, base_seed=1)
        assert best is not None
        # an unbeatable fallback forces the caller's solution to win
        worse, _ = solve_batch(si, params, best.energy + si.offset - 1e-6, base_seed=1)
        assert worse is None

    def test_deterministic(self):
        _, si = problem()
        a, da = solve_batch(si, CacParams(), math.inf, base_seed=9)
        b, db = solve_batch(si, CacParams(), math.inf, base_seed=9)
        assert da == db and a.energy == b.energy
        assert a.anneal_index == b.anneal_index
        assert np.array_equal(a.spins.to_array(), b.spins.to_array())


class TestFidelityTradeoff:
    def test_coarse_step_sign_agreement(self):
        # halving the refresh rate at doubled step size stays faithful to the
        # fine-grained run for the vast majority of state variables
        mismatch = total = 0
        for trial in range(100):
            _, si = problem(tag=3100, trial=trial, n=4, order=4, snr=15.0)
            seed = derive_seed(3100, trial)
            fine = integrate_anneal(
                si, CacParams(dt=0.01, f_mvm=1, n_steps=256), seed
            )
            coarse = integrate_anneal(
                si, CacParams(dt=0.02, f_mvm=2, n_steps=128), seed
            )
            assert not fine.diverged and not coarse.diverged
            mismatch += np.sum(fine.spins.to_array() != coarse.spins.to_array())
            total += si.spin_count
        assert mismatch / total < 0.05
