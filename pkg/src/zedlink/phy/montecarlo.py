"""End-to-end bit-error Monte Carlo and detector calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigError, DomainError
from .grid import CarrierConfig, synthesize_ambient_frame
from .receiver import detect_zed_symbols, estimate_direct_channel
from .waveform import ChannelPair, FskConfig, apply_backscatter_channel, zed_fsk_waveform

CODES = ("none", "repetition2")


@dataclass(frozen=True)
class PhyScenario:
    """Everything one trial of the full chain needs.

    ``per_re_snr_db`` is the noise level relative to the direct path;
    ``backscatter_to_direct_db`` is the received power of the modulated
    component relative to the direct path (as recorded by the budget).
    """

    carrier: CarrierConfig
    fsk: FskConfig
    per_re_snr_db: float
    backscatter_to_direct_db: float
    code: str = "none"
    bits_per_trial: int = 32

    def __post_init__(self) -> None:
        if self.code not in CODES:
            raise ConfigError(f"code must be one of {CODES}, got {self.code!r}")
        if self.bits_per_trial < 1:
            raise ConfigError("bits_per_trial must be >= 1")
        if self.fsk.sample_rate_hz != self.carrier.pilot_occasion_rate_hz:
            raise ConfigError(
                "tag waveform sample rate must equal the pilot occasion rate"
            )
        if self.fsk.subcarrier_spacing_hz != self.carrier.subcarrier_spacing_hz:
            raise ConfigError("tag and carrier subcarrier spacings disagree")

    @property
    def code_rate(self) -> float:
        return 0.5 if self.code == "repetition2" else 1.0

    @property
    def coded_symbols_per_trial(self) -> int:
        return self.bits_per_trial * (2 if self.code == "repetition2" else 1)

    @property
    def combined_resources(self) -> int:
        return (
            self.carrier.pilots_per_symbol
            * self.carrier.rx_antennas
            * self.fsk.samples_per_symbol
        )

    @property
    def predicted_effective_snr_db(self) -> float:
        """Per-symbol detection SNR: per-RE backscatter SNR plus combining."""
        return (
            self.per_re_snr_db
            + self.backscatter_to_direct_db
            + 10.0 * math.log10(self.combined_resources)
        )


@dataclass
class BerResult:
    n_bits: int
    n_errors: int
    ber: float
    ci_low: float
    ci_high: float
    sim_duration_s: float
    info_bit_rate_bps: float


def wilson_interval(errors: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise DomainError("need at least one trial for an interval")
    p = errors / n
    denom = 1.0 + z**2 / n
    center = (p + z**2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def _decode(report_energy: np.ndarray, code: str) -> np.ndarray:
    if code == "none":
        return (report_energy[:, 1] > report_energy[:, 0]).astype(np.int8)
    # repetition2: square-law combine the two copies of each info bit.
    combined = report_energy.reshape(-1, 2, 2).sum(axis=1)
    return (combined[:, 1] > combined[:, 0]).astype(np.int8)


def ber_monte_carlo(
    scenario: PhyScenario, n_trials: int, seed: Optional[int] = None
) -> BerResult:
    """Full chain: synthesize -> modulate -> channel -> estimate -> detect.

    Each trial draws fresh bits, a fresh global channel phase, and fresh
    noise from a per-trial child seed, so results are reproducible under
    the root seed and independent of evaluation order.
    """
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    coded = scenario.coded_symbols_per_trial
    grid = synthesize_ambient_frame(
        scenario.carrier, coded, symbol_rate_hz=scenario.fsk.symbol_rate_hz
    )
    children = np.random.SeedSequence(seed).spawn(n_trials)
    total_errors = 0
    total_bits = 0
    duration = 0.0
    for child in children:
        rng = np.random.default_rng(child)
        bits = rng.integers(0, 2, size=scenario.bits_per_trial).astype(np.int8)
        coded_bits = (
            np.repeat(bits, 2) if scenario.code == "repetition2" else bits
        )
        waveform = zed_fsk_waveform(coded_bits, scenario.fsk)
        channel = ChannelPair.from_power_ratio(
            scenario.carrier.n_subcarriers,
            scenario.carrier.rx_antennas,
            scenario.backscatter_to_direct_db,
            scenario.fsk.amplitude,
            phase_rad=rng.uniform(0.0, 2.0 * math.pi),
        )
        received = apply_backscatter_channel(
            grid, channel, waveform, scenario.per_re_snr_db, rng=rng
        )
        estimate = estimate_direct_channel(
            received, window_occasions=scenario.fsk.samples_per_symbol
        )
        report = detect_zed_symbols(estimate.residual, scenario.fsk)
        decided = _decode(report.stat_energy, scenario.code)
        total_errors += int(np.count_nonzero(decided != bits))
        total_bits += scenario.bits_per_trial
        duration += coded / scenario.fsk.symbol_rate_hz
    low, high = wilson_interval(total_errors, total_bits)
    return BerResult(
        n_bits=total_bits,
        n_errors=total_errors,
        ber=total_errors / total_bits,
        ci_low=low,
        ci_high=high,
        sim_duration_s=duration,
        info_bit_rate_bps=total_bits / duration,
    )


def detector_ber_calibration(
    effective_snr_db: float,
    n_bits: int,
    config: FskConfig,
    seed: Optional[int] = None,
    batch: int = 100_000,
) -> BerResult:
    """Uncoded noncoherent BFSK error rate at a calibrated symbol SNR.

    Synthesizes residual sequences directly (unit tone, random phase per
    symbol, white noise sized so the post-correlation SNR equals the
    request) and runs the production detector on them. The analytic
    reference is 0.5*exp(-snr/2).
    """
    if n_bits < 1:
        raise DomainError("n_bits must be >= 1")
    length = config.samples_per_symbol
    templates = config.templates()
    snr_lin = 10.0 ** (effective_snr_db / 10.0)
    sigma2 = length / snr_lin  # per-sample noise power for unit tone amplitude
    rng = np.random.default_rng(seed)
    errors = 0
    remaining = n_bits
    while remaining > 0:
        n = min(batch, remaining)
        bits = rng.integers(0, 2, size=n).astype(np.int8)
        phases = np.exp(2j * math.pi * rng.random(n))
        rows = templates[bits] * phases[:, None]
        noise = math.sqrt(sigma2 / 2.0) * (
            rng.standard_normal((n, length)) + 1j * rng.standard_normal((n, length))
        )
        report = detect_zed_symbols((rows + noise).reshape(-1), config, expected_bits=bits)
        errors += report.bit_errors
        remaining -= n
    low, high = wilson_interval(errors, n_bits)
    duration = n_bits / config.symbol_rate_hz
    return BerResult(
        n_bits=n_bits,
        n_errors=errors,
        ber=errors / n_bits,
        ci_low=low,
        ci_high=high,
        sim_duration_s=duration,
        info_bit_rate_bps=n_bits / duration,
    )


def noncoherent_bfsk_ber(effective_snr_db: float) -> float:
    """Closed-form orthogonal noncoherent BFSK bit error rate."""
    return 0.5 * math.exp(-(10.0 ** (effective_snr_db / 10.0)) / 2.0)
