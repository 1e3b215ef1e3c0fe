"""Transmit side: unique-word generation and symbol assembly.

A transmit symbol is built in two steps: first a zero-tail symbol (the
redundant carriers force the last ``uw_length`` time samples to zero),
then the deterministic unique word is added on top of that zero tail.
Equivalently the UW spectrum can be added in frequency domain before
the inverse transform; both forms are exposed and must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame import RedundancyGenerator, SubcarrierMap
from .numerics import forward_dft, inverse_dft


@dataclass(frozen=True)
class UniqueWord:
    """Deterministic guard sequence occupying the symbol tail.

    ``spectrum`` is the full-size DFT of the zero-padded word; the
    receiver subtracts it on the active carriers.
    """

    samples: np.ndarray    # length uw_length, time domain
    spectrum: np.ndarray   # length dft_size, frequency domain
    energy: float
    energy_ratio: float    # energy / mean total symbol energy


@dataclass(frozen=True)
class TxSymbol:
    data: np.ndarray          # data_count frequency-domain symbols
    active_word: np.ndarray   # data_count + uw_length active-carrier symbols
    time: np.ndarray          # dft_size samples, tail equals the unique word


def mean_data_symbol_energy(gen: RedundancyGenerator) -> float:
    """Expected energy of the zero-tail time symbol over random data.

    Under the unnormalized DFT convention, ||idft(x)||^2 = ||x||^2 / N,
    so the expectation is trace(symbol_covariance) / N.
    """
    return float(np.real(np.trace(gen.symbol_covariance))) / gen.config.dft_size


def build_unique_word(uw_length: int, target_ratio: float,
                      gen: RedundancyGenerator) -> UniqueWord:
    """Constant-magnitude polyphase word scaled to a fixed share of the
    mean transmit-symbol energy.

    ``target_ratio`` is UW energy over total mean symbol energy (data +
    redundant + UW); 0 yields the all-zero word used for receiver
    equivalence checks.
    """
    if uw_length < 1:
        raise ValueError(f"uw_length must be >= 1, got {uw_length}")
    if target_ratio < 0 or target_ratio >= 1:
        raise ValueError(f"target_ratio must lie in [0, 1), got {target_ratio}")

    n = gen.config.dft_size
    k = np.arange(uw_length)
    shape = np.exp(1j * np.pi * k ** 2 / uw_length)

    data_energy = mean_data_symbol_energy(gen)
    # ratio = e_uw / (e_data + e_uw)  =>  e_uw = ratio/(1-ratio) * e_data
    uw_energy = target_ratio / (1.0 - target_ratio) * data_energy
    samples = shape * np.sqrt(uw_energy / uw_length)
    if target_ratio == 0:
        samples = np.zeros(uw_length, dtype=complex)

    padded = np.concatenate([np.zeros(n - uw_length, dtype=complex), samples])
    spectrum = forward_dft(padded, gen.map.plan)
    total = data_energy + uw_energy
    return UniqueWord(
        samples=samples,
        spectrum=spectrum,
        energy=float(np.sum(np.abs(samples) ** 2)),
        energy_ratio=uw_energy / total if total > 0 else 0.0,
    )


def encode_symbol(data: np.ndarray, gen: RedundancyGenerator,
                  smap: SubcarrierMap, uw: UniqueWord) -> TxSymbol:
    """Assemble one transmit symbol from a data vector."""
    data = np.asarray(data, dtype=complex)
    if data.shape != (gen.config.data_count,):
        raise ValueError(
            f"expected data shape ({gen.config.data_count},), got {data.shape}")
    word = gen.encode(data)
    time = inverse_dft(word @ smap.selection.T, smap.plan)
    time = time.copy()
    time[-len(uw.samples):] += uw.samples
    return TxSymbol(data=data, active_word=word, time=time)


def encode_symbol_freq(data: np.ndarray, gen: RedundancyGenerator,
                       smap: SubcarrierMap, uw: UniqueWord) -> np.ndarray:
    """Alternate construction: add the UW spectrum before the inverse
    transform.  Must agree with ``encode_symbol`` to numerical precision."""
    word = gen.encode(np.asarray(data, dtype=complex))
    return inverse_dft(uw.spectrum + word @ smap.selection.T, smap.plan)


def encode_batch(data: np.ndarray, gen: RedundancyGenerator,
                 smap: SubcarrierMap, uw: UniqueWord) -> np.ndarray:
    """Time-domain symbols for a (batch, data_count) array of data vectors."""
    word = gen.encode(np.asarray(data, dtype=complex))
    time = inverse_dft(word @ smap.selection.T, smap.plan)
    time[..., -len(uw.samples):] += uw.samples
    return time
