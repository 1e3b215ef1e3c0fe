"""Cyclic-prefix baseline: structure, loopback and the closed-form
AWGN reference."""

import numpy as np
import pytest

import uwofdm as uw
from uwofdm import channel as chan
from uwofdm import cpref, fec, harness


@pytest.fixture(scope="module")
def cp_cfg():
    return cpref.CpConfig()


class TestStructure:
    def test_carrier_counts(self, cp_cfg):
        assert cp_cfg.data_count == 48
        assert len(cp_cfg.pilot_bins) == 4
        assert cp_cfg.symbol_samples == 80

    def test_guard_duration(self, cp_cfg):
        assert cp_cfg.cp_length / 20e6 == pytest.approx(800e-9)

    def test_sets_disjoint(self, cp_cfg):
        all_bins = (set(cp_cfg.zero_bins) | set(cp_cfg.pilot_bins)
                    | set(cp_cfg.data_bins.tolist()))
        assert len(all_bins) == 64

    def test_prefix_copies_tail(self, cp_cfg):
        rng = np.random.default_rng(90)
        d = uw.qpsk_map(rng.integers(0, 2, 96))
        x = cpref.cp_encode_symbol(d, cp_cfg)
        np.testing.assert_array_equal(x[:16], x[64:])

    def test_zero_data_leaves_pilot_energy(self, cp_cfg):
        x = cpref.cp_encode_symbol(np.zeros(48, dtype=complex), cp_cfg)
        pilot = cpref.pilot_time_signal(cp_cfg)
        expect = np.sum(np.abs(pilot) ** 2) + np.sum(np.abs(pilot[-16:]) ** 2)
        assert np.sum(np.abs(x) ** 2) == pytest.approx(expect, rel=1e-12)

    def test_pilot_share_of_window_energy(self, cp_cfg):
        """In the DFT window the pilot share is exactly 4/52 of the mean
        active-carrier energy, the parity target for the UW system."""
        pilot_energy = len(cp_cfg.pilot_bins) / 64
        data_energy = cp_cfg.data_count / 64
        assert pilot_energy / (pilot_energy + data_energy) == pytest.approx(4 / 52)

    def test_mean_symbol_energy_empirical(self, cp_cfg):
        rng = np.random.default_rng(91)
        d = uw.qpsk_map(rng.integers(0, 2, (50_000, 96)))
        x = cpref.cp_encode_symbol(d, cp_cfg)
        measured = float(np.mean(np.sum(np.abs(x) ** 2, axis=1)))
        assert measured == pytest.approx(cpref.mean_symbol_energy(cp_cfg), rel=0.01)


class TestLoopback:
    def test_flat_noiseless_exact(self, cp_cfg):
        rng = np.random.default_rng(92)
        ch = chan._realization_from_taps(np.array([1.0 + 0j]), 20e6, 1e-7, 64, 16)
        d = uw.qpsk_map(rng.integers(0, 2, 96))
        x = cpref.cp_encode_symbol(d, cp_cfg)
        y = cpref.cp_apply_channel(x, ch, 0.0, rng)
        est, _ = cpref.cp_decode_symbol(y, ch, 0.0, cp_cfg)
        np.testing.assert_allclose(est, d, atol=1e-9)

    def test_multipath_noiseless_recovery(self, cp_cfg):
        """17 taps exactly fill the prefix; recovery must be exact."""
        rng = np.random.default_rng(93)
        ch = uw.sample_channel(rng, tap_count=17, guard_length=16)
        d = uw.qpsk_map(rng.integers(0, 2, (10, 96)))
        x = cpref.cp_encode_symbol(d, cp_cfg)
        y = cpref.cp_apply_channel(x, ch, 0.0, rng)
        est, _ = cpref.cp_decode_symbol(y, ch, 0.0, cp_cfg)
        np.testing.assert_allclose(est, d, atol=1e-8)

    def test_channel_longer_than_prefix_rejected(self, cp_cfg):
        rng = np.random.default_rng(94)
        ch = uw.sample_channel(rng, tap_count=18)
        with pytest.raises(ValueError, match="exceeds"):
            cpref.cp_decode_symbol(np.zeros(80, dtype=complex), ch, 0.0, cp_cfg)

    def test_variances_match_formula(self, cp_cfg):
        rng = np.random.default_rng(95)
        ch = uw.sample_channel(rng)
        sigma2 = 0.03
        _, variances = cpref.cp_decode_symbol(
            np.zeros(80, dtype=complex), ch, sigma2, cp_cfg)
        h = ch.freq_response[cp_cfg.data_bins]
        np.testing.assert_allclose(variances, 64 * sigma2 / np.abs(h) ** 2,
                                   rtol=1e-12)

    def test_decode_returns_only_data_carriers(self, cp_cfg):
        """Pilots must never reach the bit decisions."""
        rng = np.random.default_rng(96)
        ch = chan._realization_from_taps(np.array([1.0 + 0j]), 20e6, 1e-7, 64, 16)
        est, variances = cpref.cp_decode_symbol(
            cpref.cp_encode_symbol(np.zeros(48, dtype=complex), cp_cfg),
            ch, 0.0, cp_cfg)
        assert est.shape == (48,)
        assert variances.shape == (48,)
        # pilots were transmitted, data estimate is still all-zero
        np.testing.assert_allclose(est, 0, atol=1e-12)


def test_uncoded_awgn_tracks_closed_form(cp_cfg, ref_config):
    """Quick two-point version of the flat-channel sanity criterion; the
    full 0.2 dB scan over BER 1e-2..1e-5 runs in the acceptance suite."""
    flat = chan._realization_from_taps(np.array([1.0 + 0j]), 20e6, 1e-7, 64, 16)
    rng = np.random.default_rng(97)
    for ebn0_db in (6.0, 8.0):
        eb = cpref.mean_symbol_energy(cp_cfg) / 96
        sigma2 = eb / 10 ** (ebn0_db / 10)
        bits = rng.integers(0, 2, (30_000, 96)).astype(np.uint8)
        x = cpref.cp_encode_symbol(fec.qpsk_map(bits), cp_cfg)
        y = cpref.cp_apply_channel(x, flat, sigma2, rng)
        est, _ = cpref.cp_decode_symbol(y, flat, sigma2, cp_cfg)
        ber = float(np.mean(fec.qpsk_hard_bits(est) != bits))
        expect = harness.analytic_cp_uncoded_ber(ebn0_db, cp_cfg)
        assert ber == pytest.approx(expect, rel=0.08)
