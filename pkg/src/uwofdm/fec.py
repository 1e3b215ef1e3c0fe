"""Bit-level chain shared by both transceivers: the industry-standard
rate-1/2 constraint-length-7 convolutional code (generators 133/171
octal), 802.11a bit-stealing puncturing to rate 3/4, the two-step block
interleaver, Gray QPSK mapping and variance-weighted soft demapping,
and a frame-terminated soft-decision Viterbi decoder.

All operations act on the last axis, so a leading batch axis of frames
vectorizes the whole chain (the Viterbi recursion in particular runs
add-compare-select across the batch at each trellis step).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

G0_OCTAL = 0o133
G1_OCTAL = 0o171
TAIL_BITS = 6  # constraint length 7 -> 6 zero bits flush the register


def _parity(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint32)
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return (x & 1).astype(np.uint8)


@dataclass(frozen=True)
class ConvCode:
    """Rate-1/2 mother code with precomputed trellis tables.

    State is the 6 most recent input bits, newest in the MSB; the 7-bit
    register (current bit in bit 6) is masked with the octal generators,
    so the impulse response of each output branch is exactly the MSB-
    first binary expansion of its generator.
    """

    g0: int = G0_OCTAL
    g1: int = G1_OCTAL
    constraint_length: int = 7
    # trellis tables, filled in __post_init__
    next_state: np.ndarray = field(init=False, repr=False)
    out0: np.ndarray = field(init=False, repr=False)
    out1: np.ndarray = field(init=False, repr=False)
    preds: np.ndarray = field(init=False, repr=False)
    branch_w0: np.ndarray = field(init=False, repr=False)
    branch_w1: np.ndarray = field(init=False, repr=False)

    @property
    def n_states(self) -> int:
        return 1 << (self.constraint_length - 1)

    def __post_init__(self):
        n_states = self.n_states
        states = np.arange(n_states, dtype=np.uint32)
        nxt = np.zeros((n_states, 2), dtype=np.int64)
        out0 = np.zeros((n_states, 2), dtype=np.uint8)
        out1 = np.zeros((n_states, 2), dtype=np.uint8)
        for bit in (0, 1):
            reg = (bit << 6) | states
            out0[:, bit] = _parity(reg & self.g0)
            out1[:, bit] = _parity(reg & self.g1)
            nxt[:, bit] = (bit << 5) | (states >> 1)
        # Each destination state has exactly two predecessors; the input
        # bit that reaches it is its MSB.
        preds = np.zeros((n_states, 2), dtype=np.int64)
        bw0 = np.zeros((n_states, 2))
        bw1 = np.zeros((n_states, 2))
        for dst in range(n_states):
            bit = dst >> 5
            base = (dst & 31) << 1
            for k, src in enumerate((base, base + 1)):
                preds[dst, k] = src
                bw0[dst, k] = 1.0 - 2.0 * out0[src, bit]
                bw1[dst, k] = 1.0 - 2.0 * out1[src, bit]
        for name, value in (("next_state", nxt), ("out0", out0), ("out1", out1),
                            ("preds", preds), ("branch_w0", bw0), ("branch_w1", bw1)):
            object.__setattr__(self, name, value)


DEFAULT_CODE = ConvCode()


def conv_encode(bits: np.ndarray, code: ConvCode = DEFAULT_CODE) -> np.ndarray:
    """Encode info bits (last axis) at rate 1/2 with 6 appended zero tail
    bits; output interleaves the g0 and g1 streams per input bit."""
    bits = np.asarray(bits, dtype=np.uint8)
    padded = np.concatenate(
        [bits, np.zeros(bits.shape[:-1] + (TAIL_BITS,), dtype=np.uint8)], axis=-1)
    n = padded.shape[-1]
    taps0 = [i for i in range(7) if (code.g0 >> (6 - i)) & 1]
    taps1 = [i for i in range(7) if (code.g1 >> (6 - i)) & 1]
    out = np.zeros(padded.shape[:-1] + (2 * n,), dtype=np.uint8)
    stream0 = np.zeros(padded.shape, dtype=np.uint8)
    stream1 = np.zeros(padded.shape, dtype=np.uint8)
    for d in taps0:
        stream0[..., d:] ^= padded[..., :n - d] if d else padded
    for d in taps1:
        stream1[..., d:] ^= padded[..., :n - d] if d else padded
    out[..., 0::2] = stream0
    out[..., 1::2] = stream1
    return out


# 802.11a rate-3/4 bit stealing: of each group of six mother bits
# (A1 B1 A2 B2 A3 B3), B2 and A3 are dropped.
PUNCTURE_KEEP_3_4 = np.array([0, 1, 2, 5])
PUNCTURE_GROUP = 6


def puncture(coded: np.ndarray, rate: str) -> np.ndarray:
    """Drop mother bits per the standard pattern; rate '1/2' is identity."""
    if rate == "1/2":
        return np.asarray(coded)
    if rate != "3/4":
        raise ValueError(f"unsupported code rate {rate!r}")
    coded = np.asarray(coded)
    n = coded.shape[-1]
    if n % PUNCTURE_GROUP:
        raise ValueError(f"length {n} is not a multiple of {PUNCTURE_GROUP}")
    groups = coded.reshape(coded.shape[:-1] + (n // PUNCTURE_GROUP, PUNCTURE_GROUP))
    return groups[..., PUNCTURE_KEEP_3_4].reshape(coded.shape[:-1] + (n // 6 * 4,))


def depuncture(llrs: np.ndarray, rate: str) -> np.ndarray:
    """Re-insert zero LLRs at punctured positions."""
    if rate == "1/2":
        return np.asarray(llrs, dtype=float)
    if rate != "3/4":
        raise ValueError(f"unsupported code rate {rate!r}")
    llrs = np.asarray(llrs, dtype=float)
    n = llrs.shape[-1]
    if n % 4:
        raise ValueError(f"punctured length {n} is not a multiple of 4")
    groups = llrs.reshape(llrs.shape[:-1] + (n // 4, 4))
    full = np.zeros(llrs.shape[:-1] + (n // 4, PUNCTURE_GROUP))
    full[..., PUNCTURE_KEEP_3_4] = groups
    return full.reshape(llrs.shape[:-1] + (n // 4 * 6,))


@dataclass(frozen=True)
class InterleaverSpec:
    """Two-step block interleaver.

    Step one spreads adjacent coded bits across columns,
    ``i = (block_bits/columns) * (k % columns) + k // columns``; step
    two rotates within modulation symbols and is the identity for QPSK
    (s = 1).  802.11a uses 16 columns at block 96; the 72-bit block of
    the UW system keeps the same structure with 12 columns.
    """

    block_bits: int
    columns: int
    bits_per_symbol: int = 2
    forward: np.ndarray = field(init=False, repr=False)
    backward: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.block_bits % self.columns:
            raise ValueError(
                f"columns {self.columns} must divide block size {self.block_bits}")
        k = np.arange(self.block_bits)
        i = (self.block_bits // self.columns) * (k % self.columns) + k // self.columns
        s = max(self.bits_per_symbol // 2, 1)
        j = s * (i // s) + (i + self.block_bits
                            - (self.columns * i) // self.block_bits) % s
        forward = np.empty(self.block_bits, dtype=np.int64)
        forward[k] = j
        backward = np.empty(self.block_bits, dtype=np.int64)
        backward[j] = k
        object.__setattr__(self, "forward", forward)
        object.__setattr__(self, "backward", backward)


def interleave(bits: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape[-1] != spec.block_bits:
        raise ValueError(f"expected {spec.block_bits} bits, got {bits.shape[-1]}")
    out = np.empty_like(bits)
    out[..., spec.forward] = bits
    return out


def deinterleave(bits: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape[-1] != spec.block_bits:
        raise ValueError(f"expected {spec.block_bits} bits, got {bits.shape[-1]}")
    out = np.empty_like(bits)
    out[..., spec.backward] = bits
    return out


# ---------------------------------------------------------------------------
# QPSK mapping

QPSK_SCALE = np.sqrt(0.5)


def qpsk_map(bits: np.ndarray) -> np.ndarray:
    """Gray QPSK, unit average energy: bit pair (b_I, b_Q) = 00 maps to
    (+1+1j)/sqrt(2), a set bit flips the sign of its component."""
    bits = np.asarray(bits)
    if bits.shape[-1] % 2:
        raise ValueError("QPSK needs an even number of bits")
    pairs = bits.reshape(bits.shape[:-1] + (-1, 2))
    return QPSK_SCALE * ((1.0 - 2.0 * pairs[..., 0]) + 1j * (1.0 - 2.0 * pairs[..., 1]))


def qpsk_hard_bits(symbols: np.ndarray) -> np.ndarray:
    """Minimum-distance bit decisions, inverse of ``qpsk_map``."""
    symbols = np.asarray(symbols)
    bits = np.empty(symbols.shape[:-1] + (2 * symbols.shape[-1],), dtype=np.uint8)
    bits[..., 0::2] = symbols.real < 0
    bits[..., 1::2] = symbols.imag < 0
    return bits


@dataclass(frozen=True)
class SoftBits:
    """LLRs with the convention sign > 0 means bit 0; magnitude is the
    reliability used by the Viterbi path metric."""

    llrs: np.ndarray


def qpsk_soft_demap(symbols: np.ndarray, variances: np.ndarray | float) -> SoftBits:
    """Per-component LLRs 4*sqrt(1/2)*Re{s}/sigma_i^2 (Im for the
    quadrature bit), with per-symbol noise variances broadcast over the
    last axis."""
    symbols = np.asarray(symbols)
    variances = np.asarray(variances, dtype=float)
    if np.any(variances <= 0):
        raise ValueError("noise variances must be positive")
    scale = 4.0 * QPSK_SCALE / variances
    llrs = np.empty(symbols.shape[:-1] + (2 * symbols.shape[-1],))
    llrs[..., 0::2] = symbols.real * scale
    llrs[..., 1::2] = symbols.imag * scale
    return SoftBits(llrs=llrs)


# ---------------------------------------------------------------------------
# Viterbi decoding

NEG_INF = -1e30


def viterbi_decode(soft: SoftBits | np.ndarray, n_info: int,
                   code: ConvCode = DEFAULT_CODE) -> np.ndarray:
    """Maximum-likelihood decode of a zero-state-terminated frame.

    Input is the depunctured LLR stream, 2*(n_info + 6) values on the
    last axis (a leading batch axis decodes frames in parallel); output
    drops the tail bits.  The path metric is the LLR correlation, so any
    common positive LLR scaling leaves decisions unchanged.
    """
    llrs = soft.llrs if isinstance(soft, SoftBits) else np.asarray(soft, dtype=float)
    single = llrs.ndim == 1
    llrs = np.atleast_2d(llrs)
    steps = n_info + TAIL_BITS
    if llrs.shape[-1] != 2 * steps:
        raise ValueError(
            f"expected {2 * steps} LLRs for {n_info} info bits, got {llrs.shape[-1]}")
    batch = llrs.shape[0]
    n_states = code.n_states

    metrics = np.full((batch, n_states), NEG_INF)
    metrics[:, 0] = 0.0
    choices = np.empty((steps, batch, n_states), dtype=np.uint8)
    preds, bw0, bw1 = code.preds, code.branch_w0, code.branch_w1

    for t in range(steps):
        l0 = llrs[:, 2 * t, None, None]
        l1 = llrs[:, 2 * t + 1, None, None]
        cand = metrics[:, preds] + bw0 * l0 + bw1 * l1
        choice = cand[..., 1] > cand[..., 0]
        choices[t] = choice
        metrics = np.where(choice, cand[..., 1], cand[..., 0])

    # Terminated frames end in the zero state.
    state = np.zeros(batch, dtype=np.int64)
    rows = np.arange(batch)
    decoded = np.empty((batch, steps), dtype=np.uint8)
    for t in range(steps - 1, -1, -1):
        decoded[:, t] = (state >> 5).astype(np.uint8)
        state = preds[state, choices[t][rows, state]]

    out = decoded[:, :n_info]
    return out[0] if single else out
