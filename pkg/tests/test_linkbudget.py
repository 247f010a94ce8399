"""Tests for the bistatic and monostatic budgets."""

import math
import random

import numpy as np
import pytest

from zedlink.errors import ConfigError, ModeError
from zedlink.linkbudget import (
    BistaticLink,
    NodeProfile,
    SrsConfig,
    ZedProfile,
    bistatic_backscatter_snr,
    max_zed_reading_distance,
    monostatic_max_range,
    monostatic_received_power,
    monostatic_receiver_threshold,
    per_re_noise_dbm,
    processing_gain_db,
    srs_snr_at_bs,
    ue_power_control,
)
from zedlink.propagation import (
    SPEED_OF_LIGHT_M_S,
    invert_free_space_path_loss,
    invert_okumura_hata_suburban,
    noise_floor_dbm,
)

BS = NodeProfile(role="bs", noise_figure_db=5.0, height_m=30.0)
UE = NodeProfile(role="ue", tx_power_max_dbm=23.0, height_m=1.5)
ZED = ZedProfile()  # 6 dB modulation loss, 0 dBi legs, 1.5 dB required
SRS_10MHZ = SrsConfig()  # 9 MHz occupied / 15 kHz / comb-2 / 2 rx / 2 symbols
SRS_20MHZ = SrsConfig(bandwidth_hz=18e6)


class TestProfiles:
    def test_ue_cap_enforced(self):
        with pytest.raises(ConfigError):
            NodeProfile(role="ue", tx_power_max_dbm=26.0)

    def test_zed_exactly_one_model(self):
        with pytest.raises(ConfigError):
            ZedProfile(leg_antenna_gain_dbi=0.0, rcs_dbsm=-10.0)
        with pytest.raises(ConfigError):
            ZedProfile(leg_antenna_gain_dbi=None, rcs_dbsm=None)

    def test_srs_pilot_count_must_divide(self):
        with pytest.raises(ConfigError):
            SrsConfig(bandwidth_hz=10e6, comb_factor=4)  # 666 % 4 != 0


class TestPowerControl:
    def test_uncapped_at_100db_loss(self):
        # noise/RE at 15 kHz, NF 5 dB = -127.239 dBm; target 15 dB at
        # 100 dB loss needs -127.239 + 15 + 100 = -12.239 dBm.
        d = invert_okumura_hata_suburban(100.0, 768e6)
        power, capped = ue_power_control(d, 768e6, BS)
        assert not capped
        assert power == pytest.approx(-12.239, abs=1e-3)
        assert srs_snr_at_bs(d, 768e6, BS, UE) == pytest.approx(15.0, abs=1e-9)

    def test_cap_distance_768mhz(self):
        # Hata inversion for loss = 23 + 127.239 - 15 = 135.239 dB -> 3.737 km
        noise = per_re_noise_dbm(15e3, BS.noise_figure_db)
        d_cap = invert_okumura_hata_suburban(23.0 - 15.0 - noise, 768e6)
        assert d_cap == pytest.approx(3.737, abs=1e-3)
        assert not ue_power_control(0.999 * d_cap, 768e6, BS).capped
        assert ue_power_control(1.001 * d_cap, 768e6, BS).capped

    def test_capped_power_is_exactly_the_cap(self):
        for d in (4.0, 6.0, 10.0, 20.0):
            power, capped = ue_power_control(d, 768e6, BS)
            assert capped and power == 23.0


class TestSrsSnr:
    def test_flat_at_target_within_cap(self):
        for d in (0.1, 0.5, 1.0, 3.0):
            assert srs_snr_at_bs(d, 768e6, BS, UE) == pytest.approx(15.0, abs=1e-9)

    def test_drops_by_hata_slope_beyond_cap(self):
        # One distance doubling past the cap: 15 - 35.225*log10(2) = 4.396 dB
        noise = per_re_noise_dbm(15e3, BS.noise_figure_db)
        d_cap = invert_okumura_hata_suburban(23.0 - 15.0 - noise, 768e6)
        assert srs_snr_at_bs(2 * d_cap, 768e6, BS, UE) == pytest.approx(4.396, abs=1e-3)

    def test_non_increasing_everywhere(self):
        ds = np.geomspace(0.05, 50.0, 200)
        snrs = [srs_snr_at_bs(d, 768e6, BS, UE) for d in ds]
        assert all(b <= a + 1e-12 for a, b in zip(snrs, snrs[1:]))


class TestProcessingGain:
    def test_preset_values(self):
        # 300 pilots x 2 rx x 2 symbols = 1200 -> 30.79 dB (~31 dB)
        assert SRS_10MHZ.pilot_count == 300
        assert processing_gain_db(SRS_10MHZ) == pytest.approx(30.79, abs=0.01)
        # 600 x 2 x 2 = 2400 -> 33.80 dB (~34 dB)
        assert processing_gain_db(SRS_20MHZ) == pytest.approx(33.80, abs=0.01)

    def test_single_resource(self):
        cfg = SrsConfig(
            bandwidth_hz=15e3, comb_factor=1, rx_antennas=1, symbols_per_zed_symbol=1
        )
        assert processing_gain_db(cfg) == 0.0


class TestBistaticChain:
    def test_chain_arithmetic(self):
        # effective = direct SNR - Friis(UE-tag) + 2*legs - Lmod + Gp
        b = bistatic_backscatter_snr(1.0, 2.62, 768e6, BS, UE, ZED, SRS_10MHZ)
        expected = (
            b.per_re_snr_direct_db
            - b.ue_zed_loss_db
            - ZED.modulation_loss_db
            + b.processing_gain_db
        )
        assert b.effective_snr_db == pytest.approx(expected, abs=1e-12)
        assert b.per_re_snr_direct_db == pytest.approx(15.0, abs=1e-9)
        # Friis at 768 MHz / 2.62 m is 38.52 dB; with the ~31 dB combining
        # gain the chain lands near the 1.5 dB requirement.
        assert b.effective_snr_db == pytest.approx(1.271, abs=1e-3)

    def test_identity_chain(self):
        # No modulation loss, single combinable resource, zero Friis loss:
        # effective SNR collapses onto the direct SNR.
        zed = ZedProfile(modulation_loss_db=0.0, leg_antenna_gain_dbi=0.0)
        srs = SrsConfig(
            bandwidth_hz=15e3, comb_factor=1, rx_antennas=1, symbols_per_zed_symbol=1
        )
        d0 = invert_free_space_path_loss(0.0, 768e6)
        b = bistatic_backscatter_snr(1.0, d0, 768e6, BS, UE, zed, srs)
        assert b.effective_snr_db == pytest.approx(b.per_re_snr_direct_db, abs=1e-9)

    def test_audit_and_monotonicity(self):
        prev = None
        for d in np.geomspace(0.1, 30.0, 50):
            b = bistatic_backscatter_snr(1.0, d, 768e6, BS, UE, ZED, SRS_10MHZ)
            assert b.recompute_effective_snr_db() == pytest.approx(
                b.effective_snr_db, abs=1e-9
            )
            if prev is not None:
                assert b.effective_snr_db < prev
            prev = b.effective_snr_db

    def test_mode_error(self):
        mmwave = ZedProfile(leg_antenna_gain_dbi=None, rcs_dbsm=-10.0)
        with pytest.raises(ModeError):
            bistatic_backscatter_snr(1.0, 2.0, 768e6, BS, UE, mmwave, SRS_10MHZ)


def _bisect_reading_distance(link: BistaticLink, lo=1e-6, hi=1e6, tol=1e-6):
    """Independent oracle: bisection on the margin sign change."""
    if link.breakdown(lo).margin_db < 0:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if link.breakdown(mid).margin_db >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.mark.filterwarnings("ignore::zedlink.propagation.HataValidityWarning")
class TestReadingDistance:
    def test_values_and_oracle(self):
        # Friis budget 15 - 6 + 30.79 - 1.5 = 38.29 dB inverted per carrier.
        expected = {450e6: 4.355, 768e6: 2.552, 1920e6: 1.021}
        for f, want in expected.items():
            link = BistaticLink(1.0, f, BS, UE, ZED, SRS_10MHZ)
            d = link.reading_distance_m()
            assert d == pytest.approx(want, abs=1e-3)
            oracle = _bisect_reading_distance(link)
            assert abs(d - oracle) <= 1e-3  # 1 mm

    def test_ordering_and_band(self):
        ds = [
            BistaticLink(1.0, f, BS, UE, ZED, SRS_10MHZ).reading_distance_m()
            for f in (450e6, 768e6, 1920e6)
        ]
        assert ds[0] > ds[1] > ds[2]
        assert all(0.5 <= d <= 10.0 for d in ds)

    def test_margin_zero_at_reading_distance(self):
        link = BistaticLink(1.0, 768e6, BS, UE, ZED, SRS_10MHZ)
        d = link.reading_distance_m()
        assert abs(link.breakdown(d).margin_db) <= 1e-6

    def test_non_increasing_in_ue_bs_distance(self):
        prev = None
        for d_bs in (0.5, 2.0, 3.737, 5.0, 8.0, 15.0):
            d = BistaticLink(d_bs, 768e6, BS, UE, ZED, SRS_10MHZ).reading_distance_m()
            if prev is not None:
                assert d <= prev + 1e-12
            prev = d

    def test_non_increasing_in_frequency(self):
        prev = None
        for f in np.linspace(450e6, 2000e6, 20):
            d = BistaticLink(1.0, f, BS, UE, ZED, SRS_10MHZ).reading_distance_m()
            if prev is not None:
                assert d < prev
            prev = d


MMWAVE_ZED = ZedProfile(leg_antenna_gain_dbi=None, rcs_dbsm=-10.0)


class TestMonostatic:
    def test_threshold_value(self):
        assert monostatic_receiver_threshold(100e6, 7.0, 5.0) == pytest.approx(
            -82.0, abs=1e-12
        )
        assert monostatic_receiver_threshold(100e6, 7.0, 0.0) == pytest.approx(
            -87.0, abs=1e-12
        )

    def test_threshold_additivity(self):
        base = monostatic_receiver_threshold(100e6, 7.0, 5.0)
        for x in (1.0, 3.5, 12.0):
            assert monostatic_receiver_threshold(100e6, 7.0, 5.0 + x) == pytest.approx(
                base + x, abs=1e-12
            )

    def test_threshold_identity(self):
        assert monostatic_receiver_threshold(100e6, 7.0, 5.0) - noise_floor_dbm(
            100e6, 7.0
        ) == pytest.approx(5.0, abs=1e-12)

    def test_reference_range(self):
        # Radar-equation inversion: EIRP 75, rx 25 dBi, Lmod 6, threshold
        # -82 dBm at 28 GHz with -10 dBsm -> 218.99 m (> 100 m).
        d = monostatic_max_range(75.0, 25.0, 28e9, MMWAVE_ZED, -82.0)
        assert d == pytest.approx(218.99, abs=0.01)
        assert d > 100.0

    def test_threshold_shift_scales_range(self):
        d0 = monostatic_max_range(75.0, 25.0, 28e9, MMWAVE_ZED, -82.0)
        d1 = monostatic_max_range(75.0, 25.0, 28e9, MMWAVE_ZED, -82.0 + 12.0)
        assert d1 / d0 == pytest.approx(10 ** (-12 / 40), rel=1e-12)

    def test_boundary_construction(self):
        # Pick the rx gain that puts the received power at 100 m exactly on
        # the threshold; the range must then be exactly 100 m.
        threshold = -82.0
        base = monostatic_received_power(75.0, 0.0, 28e9, MMWAVE_ZED, 100.0)
        gain = threshold - base
        got = monostatic_max_range(75.0, gain, 28e9, MMWAVE_ZED, threshold)
        assert got == pytest.approx(100.0, rel=1e-9)

    def test_matches_brute_force_grid(self):
        # Independent oracle: 1 mm grid search on the radar equation.
        rng = random.Random(23)
        for _ in range(100):
            eirp = rng.uniform(50, 80)
            gain = rng.uniform(5, 30)
            f = rng.uniform(24e9, 40e9)
            rcs = rng.uniform(-25, 0)
            lmod = rng.uniform(0, 10)
            thr = monostatic_receiver_threshold(
                rng.uniform(20e6, 400e6), rng.uniform(3, 10), rng.uniform(0, 10)
            )
            zed = ZedProfile(
                modulation_loss_db=lmod, leg_antenna_gain_dbi=None, rcs_dbsm=rcs
            )
            closed = monostatic_max_range(eirp, gain, f, zed, thr)
            grid = np.arange(max(0.7 * closed, 1e-3), 1.3 * closed, 1e-3)
            lam = SPEED_OF_LIGHT_M_S / f
            loss = -10 * np.log10(
                lam**2 * 10 ** (rcs / 10) / ((4 * np.pi) ** 3 * grid**4)
            )
            rx = eirp + gain - loss - lmod
            brute = grid[np.nonzero(rx >= thr)[0][-1]]
            assert abs(closed - brute) <= 1.0001e-3

    def test_mode_error(self):
        with pytest.raises(ModeError):
            monostatic_max_range(75.0, 25.0, 28e9, ZED, -82.0)
        with pytest.raises(ModeError):
            monostatic_received_power(75.0, 25.0, 28e9, ZED, 100.0)


def test_power_in_dbm_losses_in_db_sanity():
    b = bistatic_backscatter_snr(1.0, 2.0, 768e6, BS, UE, ZED, SRS_10MHZ)
    assert b.direct_rx_power_dbm == pytest.approx(
        b.tx_power_dbm - b.direct_loss_db, abs=1e-12
    )
    assert b.backscatter_rx_power_dbm < b.direct_rx_power_dbm
    assert math.isfinite(b.margin_db)
