"""Multipath channel application, fading draws and noise injection."""

import io

import numpy as np
import pytest

from ddlink import (
    GridConfig,
    PathSet,
    add_awgn,
    apply_channel,
    draw_veha,
    dzt,
    ground_truth_heff,
    idzt,
    load_paths,
    make_path,
    make_pilot_frame,
    save_paths,
)
from ddlink.channel import VEHA_DELAYS_US, VEHA_POWERS_DB


def pilot_time(cfg):
    return idzt(make_pilot_frame(cfg), cfg)


class TestApplyChannel:
    def test_identity_path_passes_signal_through(self):
        gc = GridConfig(16, 8)
        rng = np.random.default_rng(0)
        x = rng.normal(size=gc.size) + 1j * rng.normal(size=gc.size)
        pset = PathSet((make_path(1.0, 0.0, 0.0, gc),))
        np.testing.assert_allclose(apply_channel(x, pset, gc), x, atol=1e-12)

    def test_pure_delay_is_circular_shift(self):
        gc = GridConfig(16, 8)
        rng = np.random.default_rng(1)
        x = rng.normal(size=gc.size) + 1j * rng.normal(size=gc.size)
        pset = PathSet((make_path(1.0, 3.0 / gc.B, 0.0, gc),))
        np.testing.assert_allclose(apply_channel(x, pset, gc), np.roll(x, 3), atol=1e-12)

    def test_pure_doppler_is_phase_ramp(self):
        gc = GridConfig(16, 8)
        rng = np.random.default_rng(2)
        x = rng.normal(size=gc.size) + 1j * rng.normal(size=gc.size)
        nu = 2.0 * gc.delta_nu
        pset = PathSet((make_path(1.0, 0.0, nu, gc),))
        i = np.arange(gc.size)
        want = x * np.exp(2j * np.pi * nu * i / gc.B)
        np.testing.assert_allclose(apply_channel(x, pset, gc), want, atol=1e-12)

    def test_linear_in_paths(self):
        gc = GridConfig(16, 8)
        rng = np.random.default_rng(3)
        x = rng.normal(size=gc.size) + 1j * rng.normal(size=gc.size)
        p1 = make_path(0.7 + 0.1j, 2.0 / gc.B, 500.0, gc)
        p2 = make_path(0.2 - 0.4j, 5.0 / gc.B, -300.0, gc)
        both = apply_channel(x, PathSet((p1, p2)), gc)
        split = apply_channel(x, PathSet((p1,)), gc) + apply_channel(x, PathSet((p2,)), gc)
        np.testing.assert_allclose(both, split, atol=1e-12)

    def test_integer_doppler_moves_pilot_one_bin(self):
        # shift by one Doppler bin: the received pilot impulse lands one bin
        # over, scaled by a unit-magnitude phase
        gc = GridConfig(16, 8)
        pset = PathSet((make_path(1.0, 0.0, gc.delta_nu, gc),))
        Y = dzt(apply_channel(pilot_time(gc), pset, gc), gc)
        mags = np.abs(Y)
        k0, l0 = gc.K0, gc.L0
        peak = np.unravel_index(np.argmax(mags), mags.shape)
        assert peak == (k0, (l0 + 1) % gc.N)
        amp = np.sqrt(gc.size)
        assert mags[peak] == pytest.approx(amp, rel=1e-9)
        others = mags.copy()
        others[peak] = 0.0
        assert others.max() < 1e-9 * amp


class TestMakePath:
    def test_delay_bin_rounding(self):
        gc = GridConfig(16, 8)
        p = make_path(1.0, 2.6 / gc.B, 0.0, gc)
        assert p.delay_bin == 3

    def test_rejects_delay_beyond_grid(self):
        gc = GridConfig(16, 8)
        with pytest.raises(ValueError):
            make_path(1.0, 17.0 / gc.B, 0.0, gc)

    def test_rejects_doppler_beyond_half_grid(self):
        gc = GridConfig(16, 8)
        with pytest.raises(ValueError):
            make_path(1.0, 0.0, 5.0 * gc.delta_nu, gc)


class TestVehA:
    def test_profile_constants(self):
        assert VEHA_DELAYS_US == (0.0, 0.31, 0.71, 1.09, 1.73, 2.51)
        assert VEHA_POWERS_DB == (0.0, -1.0, -9.0, -10.0, -15.0, -20.0)

    def test_delay_bins_at_full_bandwidth(self):
        # 3.84 MHz of bandwidth resolves the six taps into distinct bins
        gc = GridConfig(128, 32)
        pset = draw_veha(100.0, gc, np.random.default_rng(0))
        assert [p.delay_bin for p in pset.paths] == [0, 1, 3, 4, 7, 10]

    def test_unit_total_power(self):
        gc = GridConfig(32, 32)
        for seed in range(5):
            pset = draw_veha(100.0, gc, np.random.default_rng(seed))
            assert pset.total_power() == pytest.approx(1.0)

    def test_power_profile_magnitudes(self):
        gc = GridConfig(128, 32)
        pset = draw_veha(0.0, gc, np.random.default_rng(1))
        mags = np.array([abs(p.gain) for p in pset.paths])
        rel = mags / mags[0]
        want = 10.0 ** (np.array(VEHA_POWERS_DB) / 20.0)
        np.testing.assert_allclose(rel, want, rtol=1e-12)

    def test_zero_nu_max_means_static(self):
        gc = GridConfig(32, 32)
        pset = draw_veha(0.0, gc, np.random.default_rng(2))
        assert all(p.doppler_hz == 0.0 for p in pset.paths)

    def test_doppler_bounded_by_nu_max(self):
        gc = GridConfig(32, 32)
        for seed in range(10):
            pset = draw_veha(700.0, gc, np.random.default_rng(seed))
            assert all(abs(p.doppler_hz) <= 700.0 for p in pset.paths)

    def test_phases_vary_between_draws(self):
        gc = GridConfig(32, 32)
        a = draw_veha(100.0, gc, np.random.default_rng(3))
        b = draw_veha(100.0, gc, np.random.default_rng(4))
        assert a.paths[0].gain != b.paths[0].gain

    def test_rejects_grid_too_short_for_delay_spread(self):
        # delay period is 1/delta_f; at 500 kHz spacing it is 2 us, which
        # cannot hold the 2.51 us Veh-A tail
        gc = GridConfig(2, 32, delta_f=500e3)
        with pytest.raises(ValueError):
            draw_veha(100.0, gc, np.random.default_rng(0))


class TestAwgn:
    def test_noise_power_matches_snr(self):
        rng = np.random.default_rng(0)
        x = np.exp(2j * np.pi * rng.random(200_000))
        y = add_awgn(x, 10.0, rng)
        noise_power = np.mean(np.abs(y - x) ** 2)
        assert noise_power == pytest.approx(0.1, rel=0.02)

    def test_noise_is_circular(self):
        rng = np.random.default_rng(1)
        x = np.ones(200_000, dtype=complex)
        n = add_awgn(x, 0.0, rng) - x
        assert np.mean(n.real**2) == pytest.approx(0.5, rel=0.03)
        assert np.mean(n.imag**2) == pytest.approx(0.5, rel=0.03)
        assert abs(np.mean(n.real * n.imag)) < 0.01

    def test_infinite_snr_is_noiseless(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=64) + 1j * rng.normal(size=64)
        np.testing.assert_array_equal(add_awgn(x, float("inf"), rng), x)

    def test_scales_with_signal_power(self):
        rng = np.random.default_rng(3)
        x = 3.0 * np.ones(100_000, dtype=complex)
        y = add_awgn(x, 20.0, rng)
        assert np.mean(np.abs(y - x) ** 2) == pytest.approx(0.09, rel=0.03)


class TestGroundTruth:
    def test_single_integer_path_lands_on_absolute_grid(self):
        gc = GridConfig(16, 8)
        pset = PathSet((make_path(0.5j, 3.0 / gc.B, 2 * gc.delta_nu, gc),))
        gt = ground_truth_heff(pset, gc)
        assert gt[(gc.K0 + 3) % 16, (gc.L0 + 2) % 8] == pytest.approx(0.5j)
        assert np.count_nonzero(gt) == 1

    def test_colliding_paths_accumulate(self):
        gc = GridConfig(16, 8)
        p1 = make_path(0.5, 3.0 / gc.B, 0.0, gc)
        p2 = make_path(0.25, 3.0 / gc.B, 0.0, gc)
        gt = ground_truth_heff(PathSet((p1, p2)), gc)
        assert gt[gc.K0 + 3, gc.L0] == pytest.approx(0.75)

    def test_pilot_response_matches_ground_truth_for_integer_channel(self):
        gc = GridConfig(32, 16)
        paths = (
            make_path(0.8, 0.0, 0.0, gc),
            make_path(0.3 - 0.2j, 4.0 / gc.B, -2 * gc.delta_nu, gc),
        )
        pset = PathSet(paths)
        Y = dzt(apply_channel(pilot_time(gc), pset, gc), gc)
        gt = ground_truth_heff(pset, gc)
        amp = np.sqrt(gc.size)
        on = np.abs(gt) > 0
        np.testing.assert_allclose(np.abs(Y[on]) / amp, np.abs(gt[on]), atol=1e-9)
        assert np.max(np.abs(Y[~on])) < 1e-9 * amp


class TestSerialization:
    def test_save_load_round_trip(self):
        gc = GridConfig(32, 32)
        pset = draw_veha(250.0, gc, np.random.default_rng(9))
        buf = io.StringIO()
        save_paths(pset, buf)
        buf.seek(0)
        again = load_paths(buf, gc)
        assert again.P == pset.P
        for a, b in zip(pset.paths, again.paths):
            assert a.gain == pytest.approx(b.gain)
            assert a.delay_s == pytest.approx(b.delay_s)
            assert a.doppler_hz == pytest.approx(b.doppler_hz)
            assert a.delay_bin == b.delay_bin
