"""Multipath channel model: tapped delay line with exponentially decaying
power profile, Rayleigh tap magnitudes and uniform phases.

Two application modes are provided.  ``apply_channel_cyclic`` is the
per-symbol receive model (cyclic convolution plus white noise) that the
receiver algebra assumes.  ``apply_channel_stream`` linearly convolves a
whole symbol stream; because every symbol ends in the same unique word,
the steady-state per-symbol windows of the stream coincide with the
cyclic model whenever the channel fits in the guard.  Tests exercise
that equivalence, the harness uses the cyclic model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import DftPlan, forward_dft

DEFAULT_RMS_DELAY_SPREAD_S = 100e-9
DEFAULT_TAP_COUNT = 16


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the tapped-delay-line channel.

    ``freq_response`` is the unnormalized DFT of the zero-padded taps;
    tap spacing is one sample at ``sample_rate_hz``.  ``guard_exceeded``
    flags draws whose delay spread the guard interval cannot absorb.
    """

    taps: np.ndarray
    freq_response: np.ndarray
    sample_rate_hz: float
    rms_delay_spread_s: float
    guard_exceeded: bool = False

    @property
    def tap_count(self) -> int:
        return len(self.taps)

    def active_response(self, active_indices: np.ndarray) -> np.ndarray:
        """Frequency response restricted to the given subcarrier indices."""
        return self.freq_response[np.asarray(active_indices, dtype=int)]


@dataclass(frozen=True)
class NoiseSpec:
    """Circular complex white Gaussian noise, per-sample variance."""

    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError(f"noise variance must be >= 0, got {self.variance}")


def power_delay_profile(tap_count: int, rms_delay_spread_s: float,
                        sample_rate_hz: float) -> np.ndarray:
    """Exponential tap powers p_k proportional to exp(-k*T_s/tau), normalized
    to unit total so the ensemble-average channel energy is one."""
    if tap_count < 1:
        raise ValueError(f"tap_count must be >= 1, got {tap_count}")
    if rms_delay_spread_s <= 0:
        raise ValueError(f"rms delay spread must be > 0, got {rms_delay_spread_s}")
    k = np.arange(tap_count)
    profile = np.exp(-k / (rms_delay_spread_s * sample_rate_hz))
    return profile / profile.sum()


def sample_channel(rng: np.random.Generator,
                   rms_delay_spread_s: float = DEFAULT_RMS_DELAY_SPREAD_S,
                   sample_rate_hz: float = 20e6,
                   tap_count: int = DEFAULT_TAP_COUNT,
                   dft_size: int = 64,
                   guard_length: int = 16) -> ChannelRealization:
    """Draw one channel realization from the given RNG stream."""
    profile = power_delay_profile(tap_count, rms_delay_spread_s, sample_rate_hz)
    gains = (rng.standard_normal(tap_count) + 1j * rng.standard_normal(tap_count)) \
        / np.sqrt(2.0)
    taps = np.sqrt(profile) * gains
    return _realization_from_taps(taps, sample_rate_hz, rms_delay_spread_s,
                                  dft_size, guard_length)


def _realization_from_taps(taps: np.ndarray, sample_rate_hz: float,
                           rms_delay_spread_s: float, dft_size: int,
                           guard_length: int) -> ChannelRealization:
    taps = np.asarray(taps, dtype=complex)
    padded = np.concatenate([taps, np.zeros(dft_size - len(taps), dtype=complex)])
    freq = forward_dft(padded, DftPlan(dft_size))
    return ChannelRealization(
        taps=taps,
        freq_response=freq,
        sample_rate_hz=sample_rate_hz,
        rms_delay_spread_s=rms_delay_spread_s,
        guard_exceeded=len(taps) - 1 > guard_length,
    )


def cyclic_convolve(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Cyclic convolution over the last axis, computed directly in time
    domain (the frequency-domain identity is left to the tests)."""
    x = np.asarray(x)
    out = np.zeros_like(x, dtype=complex)
    for m, h in enumerate(taps):
        out += h * np.roll(x, m, axis=-1)
    return out


def complex_noise(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    if variance == 0:
        return np.zeros(shape, dtype=complex)
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def apply_channel_cyclic(x: np.ndarray, ch: ChannelRealization,
                         noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Per-symbol receive model: cyclic convolution plus white noise.

    Accepts a single symbol (length N) or a batch (..., N).
    """
    y = cyclic_convolve(x, ch.taps)
    return y + complex_noise(rng, y.shape, noise.variance)


def apply_channel_stream(symbols: np.ndarray, ch: ChannelRealization,
                         noise: NoiseSpec, rng: np.random.Generator,
                         uw_samples: np.ndarray | None = None) -> np.ndarray:
    """Linear convolution of a concatenated symbol stream plus noise.

    ``symbols`` is (count, N); all symbols must carry the same tail
    (checked against ``uw_samples`` when given).  Returns the stream of
    length count*N (the convolution tail beyond the last symbol is
    dropped).
    """
    symbols = np.atleast_2d(np.asarray(symbols, dtype=complex))
    if uw_samples is not None:
        tail = symbols[:, -len(uw_samples):]
        if not np.allclose(tail, uw_samples[None, :], atol=1e-9):
            raise ValueError("all symbols in a stream must carry the same unique word")
    stream = symbols.reshape(-1)
    out = np.convolve(stream, ch.taps)[:len(stream)]
    return out + complex_noise(rng, out.shape, noise.variance)


def stream_symbol_windows(stream: np.ndarray, dft_size: int) -> np.ndarray:
    """Per-symbol receiver windows of a stream, shape (count, dft_size)."""
    count = len(stream) // dft_size
    return np.asarray(stream[:count * dft_size]).reshape(count, dft_size)


# ---------------------------------------------------------------------------
# Pinned snapshot fixtures

def notch_predicate(active_indices: np.ndarray, depth_db: float = -15.0,
                    min_notches: int = 2):
    """Predicate matching realizations with at least ``min_notches`` active
    carriers whose power lies ``depth_db`` below the active-carrier mean."""
    active = np.asarray(active_indices, dtype=int)

    def predicate(ch: ChannelRealization) -> bool:
        power = np.abs(ch.active_response(active)) ** 2
        return int(np.sum(power <= power.mean() * 10 ** (depth_db / 10.0))) >= min_notches

    return predicate


def pinned_snapshot(seed: int, predicate,
                    rms_delay_spread_s: float = DEFAULT_RMS_DELAY_SPREAD_S,
                    sample_rate_hz: float = 20e6,
                    tap_count: int = DEFAULT_TAP_COUNT,
                    dft_size: int = 64,
                    guard_length: int = 16,
                    max_draws: int = 100_000
                    ) -> tuple[ChannelRealization, int]:
    """Deterministically search seeded draws until ``predicate`` holds.

    Each draw uses its own counter-derived stream, so (seed, draw index)
    pins the realization bit-for-bit regardless of search history.
    Returns (realization, draw_index).
    """
    for draw in range(max_draws):
        rng = np.random.default_rng([seed, draw])
        ch = sample_channel(rng, rms_delay_spread_s, sample_rate_hz,
                            tap_count, dft_size, guard_length)
        if predicate(ch):
            return ch, draw
    raise RuntimeError(
        f"no channel draw satisfied the predicate within {max_draws} attempts")


def save_snapshot(path, ch: ChannelRealization, seed: int, draw: int,
                  dft_size: int = 64) -> None:
    """Write a snapshot fixture: metadata comments plus one tap per line
    as full-precision real/imag pairs."""
    lines = [
        "# uw-ofdm channel snapshot fixture",
        f"# seed = {seed}",
        f"# draw = {draw}",
        f"# tap_count = {ch.tap_count}",
        f"# sample_rate_hz = {ch.sample_rate_hz!r}",
        f"# rms_delay_spread_s = {ch.rms_delay_spread_s!r}",
        f"# dft_size = {dft_size}",
    ]
    lines += [f"{float(tap.real)!r} {float(tap.imag)!r}" for tap in ch.taps]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_snapshot(path, guard_length: int = 16) -> ChannelRealization:
    """Load a snapshot fixture written by ``save_snapshot``."""
    meta: dict[str, str] = {}
    taps = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            re_part, im_part = line.split()
            taps.append(complex(float(re_part), float(im_part)))
    return _realization_from_taps(
        np.array(taps, dtype=complex),
        sample_rate_hz=float(meta.get("sample_rate_hz", 20e6)),
        rms_delay_spread_s=float(meta.get("rms_delay_spread_s",
                                          DEFAULT_RMS_DELAY_SPREAD_S)),
        dft_size=int(meta.get("dft_size", 64)),
        guard_length=guard_length,
    )
