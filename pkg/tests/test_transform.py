import numpy as np
import pytest

from isinglink import (
    MimoInstance,
    build_ising,
    decode_spins,
    detect_ml,
    detect_mmse,
    ising_energy,
    make_qam,
    real_decompose,
    residual_energy,
    spin_perturbation,
)
from conftest import (
    all_spin_vectors,
    dense_energy,
    random_instance,
    spin_vector_from,
)


class TestRealDecomposition:
    @pytest.mark.parametrize("trial", range(10))
    def test_residual_norm_preserved(self, trial):
        inst = random_instance(6, 4, 16, 15.0, tag=2000, trial=trial)
        guess = detect_mmse(inst).x_hard
        dec = real_decompose(inst.H, inst.y, guess)
        direct = residual_energy(inst.H, inst.y, guess)
        assert float(dec.r_R @ dec.r_R) == pytest.approx(direct, rel=1e-12)

    def test_block_structure(self):
        inst = random_instance(4, 3, 4, 15.0, tag=2001)
        dec = real_decompose(inst.H, inst.y, np.zeros(3, dtype=complex))
        x = np.random.default_rng(0).standard_normal(3) + 1j * np.random.default_rng(
            1
        ).standard_normal(3)
        lifted = dec.H_R @ np.concatenate([x.real, x.imag])
        assert np.allclose(lifted, np.concatenate([(inst.H @ x).real, (inst.H @ x).imag]))


class TestBuildIsing:
    def test_spin_count(self):
        inst = random_instance(2, 2, 4, 15.0, tag=2002)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        assert si.spin_count == 9 == 4 * inst.n_t + 1
        assert si.n_dim == 4

    def test_zero_channel_is_flat(self):
        const = make_qam(4)
        inst = MimoInstance(
            H=np.zeros((3, 2), dtype=complex),
            y=np.ones(3, dtype=complex),
            constellation=const,
            noise_var=0.0,
        )
        si = build_ising(inst, np.zeros(2, dtype=complex))
        assert np.all(si.G == 0) and np.all(si.b == 0)
        energies = {ising_energy(si, spin_vector_from(s)) for s in all_spin_vectors(9)}
        assert energies == {0.0}

    def test_rejects_nonfinite_guess(self):
        inst = random_instance(2, 2, 4, 15.0, tag=2003)
        with pytest.raises(ValueError):
            build_ising(inst, np.array([np.nan + 0j, 0j]))

    def test_g_symmetric(self):
        inst = random_instance(8, 8, 64, 20.0, tag=2004)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        assert np.array_equal(si.G, si.G.T)


class TestEnergyEquivalence:
    @pytest.mark.parametrize("trial", range(50))
    def test_exhaustive_residual_equivalence(self, trial):
        # every one of the 2^9 assignments must reproduce the true residual
        inst = random_instance(2, 2, 4, 18.0, tag=2005, trial=trial)
        guess = detect_mmse(inst).x_hard
        si = build_ising(inst, guess)
        for s_arr in all_spin_vectors(si.spin_count):
            s = spin_vector_from(s_arr)
            lhs = ising_energy(si, s) + si.offset
            rhs = residual_energy(inst.H, inst.y, guess + spin_perturbation(si, s))
            assert abs(lhs - rhs) <= 1e-9 * (1.0 + abs(rhs))

    @pytest.mark.parametrize("trial", range(20))
    def test_matches_dense_reference(self, trial, rng):
        inst = random_instance(4, 4, 16, 15.0, tag=2006, trial=trial)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        for _ in range(20):
            s_arr = rng.choice([-1.0, 1.0], size=si.spin_count)
            assert ising_energy(si, spin_vector_from(s_arr)) == pytest.approx(
                dense_energy(si, s_arr), abs=1e-12 * (1 + abs(dense_energy(si, s_arr)))
            )

    def test_minimum_shifted_energy_nonnegative(self):
        inst = random_instance(2, 2, 4, 10.0, tag=2007)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        smallest = min(
            ising_energy(si, spin_vector_from(s)) + si.offset
            for s in all_spin_vectors(si.spin_count)
        )
        assert smallest >= -1e-9

    def test_dimension_mismatch_raises(self):
        inst = random_instance(2, 2, 4, 10.0, tag=2008)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        bad = spin_vector_from(np.ones(7))
        with pytest.raises(ValueError):
            ising_energy(si, bad)


class TestSymmetries:
    def test_global_flip_exact(self, rng):
        inst = random_instance(4, 4, 16, 15.0, tag=2009)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        for _ in range(50):
            s_arr = rng.choice([-1.0, 1.0], size=si.spin_count)
            s, s_neg = spin_vector_from(s_arr), spin_vector_from(-s_arr)
            assert ising_energy(si, s) == ising_energy(si, s_neg)
            assert np.array_equal(
                decode_spins(si, s, inst.constellation),
                decode_spins(si, s_neg, inst.constellation),
            )

    def test_swap_halves_exact(self, rng):
        inst = random_instance(4, 4, 4, 15.0, tag=2010)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        for _ in range(50):
            s_arr = rng.choice([-1.0, 1.0], size=si.spin_count)
            n = si.n_dim
            swapped = np.concatenate([s_arr[n : 2 * n], s_arr[:n], s_arr[2 * n :]])
            s, s_sw = spin_vector_from(s_arr), spin_vector_from(swapped)
            assert ising_energy(si, s) == ising_energy(si, s_sw)
            assert np.array_equal(
                decode_spins(si, s, inst.constellation),
                decode_spins(si, s_sw, inst.constellation),
            )


class TestDecode:
    def test_opposed_halves_decode_to_guess(self):
        inst = random_instance(3, 3, 16, 15.0, tag=2011)
        guess = detect_mmse(inst).x_hard
        si = build_ising(inst, guess)
        n = si.n_dim
        s_arr = np.concatenate([np.ones(n), -np.ones(n), [1.0]])
        decoded = decode_spins(si, spin_vector_from(s_arr), inst.constellation)
        assert np.array_equal(decoded, guess)

    def test_step_alphabet(self):
        inst = random_instance(2, 2, 16, 15.0, tag=2012)
        si = build_ising(inst, detect_mmse(inst).x_hard)
        for s_arr in all_spin_vectors(si.spin_count):
            d = spin_perturbation(si, spin_vector_from(s_arr))
            steps = np.concatenate([d.real, d.imag]) / si.c
            assert set(np.round(steps, 9)) <= {-2.0, 0.0, 2.0}

    @pytest.mark.parametrize("trial", range(30))
    def test_spin_minimum_matches_ml_when_reachable(self, trial):
        # when the ML point is one step away in every real dimension, the
        # best spin assignment must decode exactly to it
        inst = random_instance(2, 2, 4, 14.0, tag=2013, trial=trial)
        guess = detect_mmse(inst).x_hard
        si = build_ising(inst, guess)
        ml = detect_ml(inst)
        gap = ml.x_hard - guess
        step = inst.constellation.spacing
        reachable = np.all(np.abs(gap.real) <= step + 1e-9) and np.all(
            np.abs(gap.imag) <= step + 1e-9
        )
        if not reachable:
            pytest.skip("ML beyond single-step reach for this draw")
        best = min(
            all_spin_vectors(si.spin_count),
            key=lambda s: ising_energy(si, spin_vector_from(s)),
        )
        decoded = decode_spins(si, spin_vector_from(best), inst.constellation)
        assert np.array_equal(decoded, ml.x_hard)
