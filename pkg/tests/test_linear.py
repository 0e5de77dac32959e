import numpy as np
import pytest

from isinglink import (
    MimoInstance,
    detect_ml,
    detect_mmse,
    detect_mmse_sic,
    make_qam,
    mmse_soft,
    residual_energy,
    sample_channel,
)
from conftest import random_instance


def identity_instance(order=4, n=4, seed=0):
    const = make_qam(order)
    rng = np.random.default_rng(seed)
    x = const.points[rng.integers(0, const.order, n)]
    return MimoInstance(
        H=np.eye(n, dtype=complex), y=x.copy(), constellation=const, noise_var=0.0, truth=x
    )


class TestMmse:
    def test_identity_noiseless(self):
        inst = identity_instance()
        res = detect_mmse(inst)
        assert np.array_equal(res.x_hard, inst.truth)
        assert res.energy == 0.0
        assert res.source == "mmse"

    def test_zero_regularizer_is_least_squares(self):
        inst = random_instance(6, 4, 16, 20.0, tag=1000)
        inst0 = MimoInstance(
            H=inst.H, y=inst.y, constellation=inst.constellation, noise_var=0.0
        )
        soft = mmse_soft(inst0)
        ls, *_ = np.linalg.lstsq(inst.H, inst.y, rcond=None)
        assert np.allclose(soft, ls, atol=1e-10)

    @pytest.mark.parametrize("trial", range(20))
    def test_normal_equations(self, trial):
        inst = random_instance(8, 8, 16, 15.0, tag=1001, trial=trial)
        soft = mmse_soft(inst)
        lhs = (inst.H.conj().T @ inst.H + inst.noise_var * np.eye(8)) @ soft
        rhs = inst.H.conj().T @ inst.y
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(rhs)

    def test_ml_dominates_mmse(self):
        # sigma^2 = 0.1 on 2x2 QPSK: brute force can only be at least as good
        for trial in range(50):
            inst = random_instance(2, 2, 4, 13.0, tag=1002, trial=trial)
            assert detect_ml(inst).energy <= detect_mmse(inst).energy + 1e-12

    def test_requires_tall_channel(self):
        const = make_qam(4)
        inst = MimoInstance(
            H=sample_channel(4, 2, 0).T.copy(),
            y=np.zeros(2, dtype=complex),
            constellation=const,
            noise_var=0.1,
        )
        with pytest.raises(ValueError):
            detect_mmse(inst)

    def test_energy_matches_recomputation(self):
        inst = random_instance(8, 8, 16, 18.0, tag=1003)
        for res in (detect_mmse(inst), detect_mmse_sic(inst)):
            again = residual_energy(inst.H, inst.y, res.x_hard)
            assert res.energy == pytest.approx(again, rel=1e-9)
            assert np.all(np.isin(res.x_hard, inst.constellation.points))


class TestMmseSic:
    def test_identity_matches_mmse(self):
        inst = identity_instance(order=16, n=6, seed=3)
        assert np.array_equal(detect_mmse_sic(inst).x_hard, detect_mmse(inst).x_hard)

    def test_single_user_degenerates_to_mmse(self):
        for trial in range(10):
            inst = random_instance(3, 1, 16, 12.0, tag=1004, trial=trial)
            a = detect_mmse(inst)
            b = detect_mmse_sic(inst)
            assert np.array_equal(a.x_hard, b.x_hard)
            assert a.energy == b.energy

    def test_sic_beats_mmse_on_average(self):
        # interference cancellation dominates plain MMSE over a batch
        e_sic = e_mmse = 0.0
        for trial in range(1000):
            inst = random_instance(4, 4, 4, 15.0, tag=1005, trial=trial)
            e_sic += detect_mmse_sic(inst).energy
            e_mmse += detect_mmse(inst).energy
        assert e_sic <= e_mmse

    def test_deterministic(self):
        inst = random_instance(8, 8, 16, 15.0, tag=1006)
        a = detect_mmse_sic(inst)
        b = detect_mmse_sic(inst)
        assert np.array_equal(a.x_hard, b.x_hard) and a.energy == b.energy


class TestMl:
    def test_identity_noiseless(self):
        inst = identity_instance()
        res = detect_ml(inst)
        assert np.array_equal(res.x_hard, inst.truth)
        assert res.energy == 0.0

    def test_zero_noise_consistency(self):
        for trial in range(20):
            inst = random_instance(2, 2, 4, 200.0, tag=1007, trial=trial)
            res = detect_ml(inst)
            assert np.array_equal(res.x_hard, inst.truth)

    def test_enumeration_guard(self):
        const = make_qam(64)
        H = sample_channel(16, 16, 0)
        inst = MimoInstance(
            H=H, y=np.zeros(16, dtype=complex), constellation=const, noise_var=0.1
        )
        with pytest.raises(ValueError, match="guard"):
            detect_ml(inst)

    def test_deterministic(self):
        inst = random_instance(3, 3, 4, 10.0, tag=1008)
        a = detect_ml(inst)
        b = detect_ml(inst)
        assert np.array_equal(a.x_hard, b.x_hard) and a.energy == b.energy
