"""UW-OFDM receiver: DFT, unique-word removal, zero-forcing equalization
and the subcarrier-correlation (LMMSE) smoother.

Zero forcing whitens the channel but multiplies the noise on carrier i
by 1/|H(f_i)|^2, which is disastrous in spectral notches.  Because the
redundant carriers are a deterministic linear function of the data, the
active-carrier word has a known rank-deficient covariance; the smoother
``W = C_ss (C_ss + C_vv)^-1`` projects the noisy zero-forced word back
toward that signal subspace, with per-carrier residual error covariance
``C_ee = (I - W) C_ss``.  Both equalizer stages and their analytic
error statistics are exposed for the Monte-Carlo probes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import ChannelRealization, NoiseSpec, apply_channel_cyclic
from .errors import NearSingularChannelError
from .frame import RedundancyGenerator, SubcarrierMap
from .fec import qpsk_map
from .numerics import forward_dft
from .txchain import UniqueWord, encode_batch

#: Zero forcing is refused below this absolute response magnitude.
ZF_ABS_FLOOR = 1e-9
#: Optional regularization floor, relative to the largest active response.
ZF_REL_FLOOR = 1e-6


@dataclass(frozen=True)
class WienerEqualizer:
    """Per-(channel, noise variance) receive operator.

    ``combined`` applies zero forcing and smoothing in one matrix; the
    diagonals of ``noise_covariance`` (after ZF) and ``error_covariance``
    (after smoothing) are the analytic per-carrier error statistics.
    """

    map: SubcarrierMap
    noise_variance: float
    inv_response: np.ndarray        # diagonal of the ZF operator
    noise_covariance: np.ndarray    # diagonal of C_vv (real)
    smoother: np.ndarray            # W, full matrix
    error_covariance: np.ndarray    # C_ee, full matrix
    combined: np.ndarray            # W @ diag(inv_response)

    @property
    def error_variances(self) -> np.ndarray:
        """Real per-carrier error variances after smoothing, active order."""
        return np.real(np.diag(self.error_covariance))

    @property
    def data_error_variances(self) -> np.ndarray:
        """Error variances on the data carriers, in data order (soft input
        for the decoder)."""
        return self.error_variances[self.map.data_positions]

    @property
    def data_noise_variances(self) -> np.ndarray:
        """ZF-only noise variances on the data carriers, in data order."""
        return self.noise_covariance[self.map.data_positions]


@dataclass(frozen=True)
class RxSymbolResult:
    smoothed: np.ndarray              # estimate of the active-carrier word
    data: np.ndarray                  # data-carrier estimates
    data_noise_variances: np.ndarray  # diag(C_ee) on the data carriers


def _checked_response(ch: ChannelRealization, smap: SubcarrierMap,
                      floor_response: bool) -> np.ndarray:
    h = ch.active_response(smap.active_carriers)
    mags = np.abs(h)
    if floor_response:
        floor = ZF_REL_FLOOR * mags.max()
        weak = mags < floor
        if np.any(weak):
            h = h.copy()
            # keep the phase; a exactly-zero entry gets a real floor
            phases = np.where(mags[weak] > 0, h[weak] / mags[weak], 1.0)
            h[weak] = phases * floor
        return h
    if np.any(mags < ZF_ABS_FLOOR):
        raise NearSingularChannelError(
            f"channel response below {ZF_ABS_FLOOR} on active carrier(s) "
            f"{list(np.nonzero(mags < ZF_ABS_FLOOR)[0])}; zero forcing undefined")
    return h


def build_equalizer(ch: ChannelRealization, gen: RedundancyGenerator,
                    noise_variance: float,
                    floor_response: bool = False) -> WienerEqualizer:
    """Assemble the ZF + smoothing operator for one channel realization.

    The signal covariance comes precomputed from the generator; only the
    noise covariance and the smoother depend on the channel draw.
    """
    smap = gen.map
    n = smap.config.dft_size
    h = _checked_response(ch, smap, floor_response)
    inv_h = 1.0 / h
    cvv_diag = n * noise_variance * np.abs(inv_h) ** 2
    css = gen.symbol_covariance

    if noise_variance == 0:
        dim = css.shape[0]
        smoother = np.eye(dim, dtype=complex)
        error_cov = np.zeros_like(css)
    else:
        # W = C_ss (C_ss + C_vv)^-1; both factors Hermitian, C_ss + C_vv
        # positive definite, so solve via Cholesky and conjugate back.
        a = css + np.diag(cvv_diag).astype(complex)
        cho = scipy.linalg.cho_factor(a, lower=True)
        smoother = scipy.linalg.cho_solve(cho, css).conj().T
        error_cov = (np.eye(css.shape[0]) - smoother) @ css

    return WienerEqualizer(
        map=smap,
        noise_variance=noise_variance,
        inv_response=inv_h,
        noise_covariance=cvv_diag,
        smoother=smoother,
        error_covariance=error_cov,
        combined=smoother * inv_h[None, :],
    )


def _active_spectrum(y_time: np.ndarray, smap: SubcarrierMap) -> np.ndarray:
    """DFT of received samples restricted to the active carriers."""
    return forward_dft(np.asarray(y_time), smap.plan)[..., smap.active_carriers]


def equalize_symbol(y_time: np.ndarray, eq: WienerEqualizer,
                    uw: UniqueWord) -> RxSymbolResult:
    """Full receive path for one symbol: DFT, UW removal, ZF, smoothing,
    data extraction."""
    smap = eq.map
    y_time = np.asarray(y_time)
    if y_time.shape != (smap.config.dft_size,):
        raise ValueError(
            f"expected {smap.config.dft_size} samples, got shape {y_time.shape}")
    smoothed = equalize_batch(y_time[None, :], eq, uw)[0]
    return RxSymbolResult(
        smoothed=smoothed,
        data=smoothed[smap.data_positions],
        data_noise_variances=eq.data_error_variances,
    )


def equalize_batch(y_time: np.ndarray, eq: WienerEqualizer,
                   uw: UniqueWord) -> np.ndarray:
    """Smoothed active-carrier words for (batch, dft_size) samples.

    The UW spectrum is subtracted after zero forcing; removing it before
    (scaled by the channel) is algebraically identical and covered by
    tests.
    """
    smap = eq.map
    spectrum = _active_spectrum(y_time, smap)
    uw_active = uw.spectrum[smap.active_carriers]
    zero_forced = spectrum * eq.inv_response - uw_active
    return zero_forced @ eq.smoother.T


def equalize_symbol_uw_first(y_time: np.ndarray, eq: WienerEqualizer,
                             uw: UniqueWord) -> np.ndarray:
    """Order-exchanged variant: subtract the channel-scaled UW from the
    raw spectrum, then zero-force and smooth."""
    smap = eq.map
    spectrum = _active_spectrum(y_time, smap)
    uw_active = uw.spectrum[smap.active_carriers]
    h = 1.0 / eq.inv_response
    return eq.combined @ (spectrum - h * uw_active)


def zf_only_symbol(y_time: np.ndarray, eq: WienerEqualizer,
                   uw: UniqueWord) -> np.ndarray:
    """Zero-forced, UW-free word(s) without smoothing: the transmitted
    active word plus enhanced noise.  Used for error probes and as the
    conventional-OFDM-like reference path."""
    smap = eq.map
    spectrum = _active_spectrum(y_time, smap)
    uw_active = uw.spectrum[smap.active_carriers]
    return spectrum * eq.inv_response - uw_active


def measure_subcarrier_mse(gen: RedundancyGenerator, eq: WienerEqualizer,
                           uw: UniqueWord, ch: ChannelRealization,
                           rng: np.random.Generator, n_symbols: int,
                           mode: str = "post",
                           batch: int = 4096) -> np.ndarray:
    """Empirical per-carrier squared error against the matched transmit
    word, before ('pre') or after ('post') smoothing."""
    if mode not in ("pre", "post"):
        raise ValueError(f"mode must be 'pre' or 'post', got {mode!r}")
    smap = gen.map
    nd = smap.config.data_count
    noise = NoiseSpec(eq.noise_variance)
    total = np.zeros(len(smap.active_carriers))
    done = 0
    while done < n_symbols:
        count = min(batch, n_symbols - done)
        bits = rng.integers(0, 2, size=(count, 2 * nd))
        data = qpsk_map(bits)
        sent = data @ gen.code_matrix.T
        x = encode_batch(data, gen, smap, uw)
        y = apply_channel_cyclic(x, ch, noise, rng)
        if mode == "post":
            est = equalize_batch(y, eq, uw)
        else:
            est = zf_only_symbol(y, eq, uw)
        total += np.sum(np.abs(est - sent) ** 2, axis=0)
        done += count
    return total / n_symbols
