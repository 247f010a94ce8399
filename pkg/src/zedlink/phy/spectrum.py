"""Sideband spectrum of the modulated grid.

Because the tag toggles far below the subcarrier spacing, its spectrum
repeats around every occupied subcarrier. We therefore estimate the PSD
of each pilot subcarrier's occasion sequence and average across
subcarriers and antennas (a Welch-style ensemble average); offsets are
relative to the subcarrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigError
from .grid import PilotGrid


@dataclass
class SpectrumEstimate:
    offset_hz: np.ndarray
    power_db: np.ndarray
    peaks_hz: np.ndarray  # detected sideband offsets, strongest first
    noise_floor_db: float
    total_power: float
    bin_hz: float


def psd_of_backscatter(
    grid: PilotGrid,
    segment_occasions: Optional[int] = None,
    peak_threshold_db: float = 10.0,
) -> SpectrumEstimate:
    """Averaged periodogram across pilot subcarriers and antennas.

    Detected peaks are local maxima more than ``peak_threshold_db`` above
    the median bin (the noise floor), DC excluded.
    """
    n_occ = grid.n_occasions
    if n_occ == 0:
        raise ConfigError("grid holds no occasions")
    seg = n_occ if segment_occasions is None else int(segment_occasions)
    if seg < 2:
        raise ConfigError("segment must span at least 2 occasions")
    if seg > n_occ:
        raise ConfigError(
            f"window of {seg} occasions is longer than the {n_occ}-occasion signal"
        )
    n_seg = n_occ // seg
    v = grid.samples[grid.pilot_mask, : n_seg * seg, :]  # (n_pilot, used, n_ant)
    v = v.reshape(v.shape[0], n_seg, seg, v.shape[2])
    spectra = np.fft.fft(v, axis=2)
    psd = (np.abs(spectra) ** 2).mean(axis=(0, 1, 3)) / seg**2
    total_power = float((np.abs(v) ** 2).mean(axis=(0, 1, 3)).sum() / seg)
    rate = grid.carrier.pilot_occasion_rate_hz
    offsets = np.fft.fftshift(np.fft.fftfreq(seg, d=1.0 / rate))
    psd = np.fft.fftshift(psd)
    with np.errstate(divide="ignore"):
        power_db = 10.0 * np.log10(psd)
    dc = int(np.argmin(np.abs(offsets)))
    off_dc = np.delete(power_db, dc)
    finite = off_dc[np.isfinite(off_dc)]
    floor_db = float(np.median(finite)) if finite.size else -math.inf
    peaks = []
    for i in range(len(psd)):
        if i == dc or not math.isfinite(power_db[i]):
            continue
        if power_db[i] <= floor_db + peak_threshold_db:
            continue
        left = power_db[i - 1] if i > 0 else -math.inf
        right = power_db[i + 1] if i < len(psd) - 1 else -math.inf
        if power_db[i] >= left and power_db[i] >= right:
            peaks.append(i)
    peaks.sort(key=lambda i: power_db[i], reverse=True)
    return SpectrumEstimate(
        offset_hz=offsets,
        power_db=power_db,
        peaks_hz=offsets[peaks],
        noise_floor_db=floor_db,
        total_power=total_power,
        bin_hz=rate / seg,
    )
