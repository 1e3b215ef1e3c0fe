"""Cyclic-prefix OFDM baseline shaped on the IEEE 802.11a data path:
64-point DFT, 48 data carriers, 4 BPSK pilots, 16-sample cyclic prefix,
per-carrier zero forcing.  Pilots are transmitted (so the energy split
matches the standard) but ignored at the receiver since channel
knowledge is perfect.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, complex_noise
from .errors import NearSingularChannelError
from .numerics import DftPlan, forward_dft, inverse_dft
from .rxchain import ZF_ABS_FLOOR, ZF_REL_FLOOR

# 802.11a layout in FFT-bin terms: DC and bins 27..37 are zero, pilots
# sit at logical carriers -21, -7, 7, 21 with fixed signs 1, 1, 1, -1.
_PILOT_BINS = (7, 21, 43, 57)
_PILOT_VALUES = (1.0, -1.0, 1.0, 1.0)
_ZERO_BINS = tuple([0] + list(range(27, 38)))


@dataclass(frozen=True)
class CpConfig:
    dft_size: int = 64
    cp_length: int = 16
    pilot_bins: tuple = _PILOT_BINS
    pilot_values: tuple = _PILOT_VALUES
    zero_bins: tuple = _ZERO_BINS
    data_symbol_variance: float = 1.0
    data_bins: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        occupied = set(self.zero_bins) | set(self.pilot_bins)
        if len(occupied) != len(self.zero_bins) + len(self.pilot_bins):
            raise ValueError("pilot and zero bins overlap")
        data = np.array([i for i in range(self.dft_size) if i not in occupied],
                        dtype=int)
        object.__setattr__(self, "data_bins", data)

    @property
    def data_count(self) -> int:
        return len(self.data_bins)

    @property
    def symbol_samples(self) -> int:
        return self.dft_size + self.cp_length

    @property
    def plan(self) -> DftPlan:
        return DftPlan(self.dft_size)


def pilot_time_signal(cfg: CpConfig) -> np.ndarray:
    spectrum = np.zeros(cfg.dft_size, dtype=complex)
    spectrum[list(cfg.pilot_bins)] = cfg.pilot_values
    return inverse_dft(spectrum, cfg.plan)


def mean_symbol_energy(cfg: CpConfig) -> float:
    """Expected transmit energy of one 80-sample symbol (window + CP).

    The data contribution is uniform per time sample; the deterministic
    pilot waveform contributes its exact window plus CP-tail energy.
    """
    n, cp = cfg.dft_size, cfg.cp_length
    data_energy = cfg.data_symbol_variance * cfg.data_count * (n + cp) / n ** 2
    pilot = pilot_time_signal(cfg)
    pilot_energy = float(np.sum(np.abs(pilot) ** 2)
                         + np.sum(np.abs(pilot[n - cp:]) ** 2))
    return data_energy + pilot_energy


def cp_encode_symbol(data: np.ndarray, cfg: CpConfig) -> np.ndarray:
    """Map data symbols to carriers, add pilots, inverse transform and
    prepend the cyclic prefix.  Accepts (..., data_count)."""
    data = np.asarray(data, dtype=complex)
    if data.shape[-1] != cfg.data_count:
        raise ValueError(
            f"expected {cfg.data_count} data symbols, got {data.shape[-1]}")
    spectrum = np.zeros(data.shape[:-1] + (cfg.dft_size,), dtype=complex)
    spectrum[..., cfg.data_bins] = data
    spectrum[..., list(cfg.pilot_bins)] = np.asarray(cfg.pilot_values, dtype=complex)
    time = inverse_dft(spectrum, cfg.plan)
    return np.concatenate([time[..., -cfg.cp_length:], time], axis=-1)


def cp_apply_channel(symbols: np.ndarray, ch: ChannelRealization,
                     noise_variance: float, rng: np.random.Generator) -> np.ndarray:
    """Per-symbol linear convolution with the channel plus white noise.

    Each 80-sample symbol is convolved in isolation; spill from a
    preceding symbol would fall entirely inside the discarded prefix
    whenever the channel fits the guard, so the isolated model is exact
    for the decoded window.
    """
    symbols = np.asarray(symbols)
    out = np.zeros_like(symbols, dtype=complex)
    for m, h in enumerate(ch.taps):
        if m == 0:
            out += h * symbols
        else:
            out[..., m:] += h * symbols[..., :-m]
    return out + complex_noise(rng, out.shape, noise_variance)


def cp_decode_symbol(received: np.ndarray, ch: ChannelRealization,
                     noise_variance: float, cfg: CpConfig,
                     floor_response: bool = False
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Drop the prefix, transform and zero-force the data carriers.

    Returns (data estimates, per-carrier noise variances) with shapes
    (..., data_count) and (data_count,).
    """
    received = np.asarray(received)
    if received.shape[-1] != cfg.symbol_samples:
        raise ValueError(
            f"expected {cfg.symbol_samples} samples, got {received.shape[-1]}")
    if ch.tap_count > cfg.cp_length + 1:
        raise ValueError(
            f"channel with {ch.tap_count} taps exceeds the {cfg.cp_length}-sample prefix")
    h = ch.freq_response[cfg.data_bins]
    mags = np.abs(h)
    if floor_response:
        floor = ZF_REL_FLOOR * np.abs(ch.freq_response).max()
        weak = mags < floor
        if np.any(weak):
            h = h.copy()
            phases = np.where(mags[weak] > 0, h[weak] / mags[weak], 1.0)
            h[weak] = phases * floor
            mags = np.abs(h)
    elif np.any(mags < ZF_ABS_FLOOR):
        raise NearSingularChannelError(
            "channel response below threshold on data carrier(s); "
            "zero forcing undefined")
    window = received[..., cfg.cp_length:]
    spectrum = forward_dft(window, cfg.plan)
    estimates = spectrum[..., cfg.data_bins] / h
    variances = cfg.dft_size * noise_variance / mags ** 2
    return estimates, variances
