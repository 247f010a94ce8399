"""Baseband Monte Carlo of in-band ambient backscatter."""

from .grid import CarrierConfig, PilotGrid, occasions_per_symbol, synthesize_ambient_frame
from .montecarlo import (
    BerResult,
    PhyScenario,
    ber_monte_carlo,
    detector_ber_calibration,
    noncoherent_bfsk_ber,
    wilson_interval,
)
from .receiver import (
    ChannelEstimate,
    DetectionReport,
    detect_zed_symbols,
    estimate_direct_channel,
)
from .spectrum import SpectrumEstimate, psd_of_backscatter
from .waveform import (
    ChannelPair,
    FskConfig,
    ZedWaveform,
    apply_backscatter_channel,
    zed_fsk_waveform,
)

__all__ = [
    "BerResult",
    "CarrierConfig",
    "ChannelEstimate",
    "ChannelPair",
    "DetectionReport",
    "FskConfig",
    "PhyScenario",
    "PilotGrid",
    "SpectrumEstimate",
    "ZedWaveform",
    "apply_backscatter_channel",
    "ber_monte_carlo",
    "detect_zed_symbols",
    "detector_ber_calibration",
    "estimate_direct_channel",
    "noncoherent_bfsk_ber",
    "occasions_per_symbol",
    "psd_of_backscatter",
    "synthesize_ambient_frame",
    "wilson_interval",
    "zed_fsk_waveform",
]
