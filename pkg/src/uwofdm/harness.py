"""Monte-Carlo engine for BER sweeps and per-carrier MSE probes.

Reproducibility model: every random quantity is drawn from a stream
derived as ``default_rng([master_seed, point_index, batch_index,
stream_id])``, with a fixed number of frames per batch and stopping
decided on the ordered batch sequence.  Results are therefore byte
identical for any worker count, and two systems swept with the same
seed and grid consume the same underlying draws at each point (paired
comparison).
"""

from __future__ import annotations

import hashlib
import math
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import channel as chan
from . import cpref, fec, frame, rxchain, txchain
from .errors import ConfigError

SYSTEMS = ("uw-lmmse", "uw-zf", "cp")
CODE_RATES = ("none", "1/2", "3/4")
RATE_VALUE = {"none": 1.0, "1/2": 0.5, "3/4": 0.75}

#: Frames simulated per batch; fixed so that stopping decisions (and
#: therefore output bytes) never depend on the worker count.
BATCH_FRAMES = 256

#: Noise variances below this fraction of the data variance are treated
#: as exactly zero (noiseless receiver, identity smoother).
NOISE_VARIANCE_EPS = 1e-13

ENV_WORKERS = "UWOFDM_WORKERS"


@dataclass(frozen=True)
class SweepSpec:
    """Complete description of one BER sweep (everything that affects
    the output bytes)."""

    config: frame.OfdmSystemConfig
    system: str
    ebn0_db: tuple
    seed: int
    code_rate: str = "none"
    channel: str = "ensemble"  # "ensemble" or "fixed:<fixture path>"
    min_error_events: int = 200
    max_bits_per_point: int = 10_000_000
    frame_symbols: int = 8
    channel_taps: int = chan.DEFAULT_TAP_COUNT
    rms_delay_spread_s: float = chan.DEFAULT_RMS_DELAY_SPREAD_S

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}, expected one of {SYSTEMS}")
        if self.code_rate not in CODE_RATES:
            raise ConfigError(f"unknown code rate {self.code_rate!r}")
        if not self.ebn0_db:
            raise ConfigError("Eb/N0 grid must not be empty")
        if not (self.channel == "ensemble" or self.channel.startswith("fixed:")):
            raise ConfigError(
                f"channel must be 'ensemble' or 'fixed:<path>', got {self.channel!r}")
        if self.min_error_events < 1 or self.max_bits_per_point < 1:
            raise ConfigError("stopping thresholds must be positive")
        if self.frame_symbols < 1:
            raise ConfigError("frame_symbols must be >= 1")


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    bits: int
    bit_errors: int
    ber: float
    ci_low: float
    ci_high: float
    frames: int
    frame_errors: int
    converged: bool


@dataclass(frozen=True)
class BerReport:
    points: tuple
    metadata: tuple  # ((key, value), ...) in emission order


def _fixture_id(channel: str) -> str:
    """Content hash of a channel fixture file ('-' for ensemble mode)."""
    if not channel.startswith("fixed:"):
        return "-"
    with open(channel[len("fixed:"):], "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:12]


def config_hash(config: frame.OfdmSystemConfig) -> str:
    canon = ";".join(f"{k}={getattr(config, k)!r}" for k in sorted(
        ("dft_size", "data_count", "uw_length", "zero_indices",
         "redundant_indices", "sample_rate_hz", "data_symbol_variance",
         "uw_energy_ratio")))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Per-system context (derived matrices, energies, frame layout)

@dataclass(frozen=True)
class _SystemContext:
    spec: SweepSpec
    kind: str                       # "uw" or "cp"
    smoothing: bool
    gen: frame.RedundancyGenerator | None
    uw: txchain.UniqueWord | None
    cp_cfg: cpref.CpConfig | None
    interleaver: fec.InterleaverSpec
    bits_per_symbol: int
    symbol_energy: float
    n_info: int                     # info bits per frame
    fixed_channel: chan.ChannelRealization | None

    def sigma2(self, ebn0_db: float) -> float:
        eb = self.symbol_energy / (self.bits_per_symbol * RATE_VALUE[self.spec.code_rate])
        return eb / 10 ** (ebn0_db / 10.0)


def uw_interleaver(data_count: int) -> fec.InterleaverSpec:
    """Block interleaver for the UW system: same two-step structure as
    the 802.11a one, column count scaled to the smaller block."""
    block = 2 * data_count
    columns = 12 if block % 12 == 0 else max(
        c for c in range(2, block + 1) if block % c == 0 and c <= 16)
    return fec.InterleaverSpec(block_bits=block, columns=columns)


def cp_interleaver(cfg: cpref.CpConfig) -> fec.InterleaverSpec:
    return fec.InterleaverSpec(block_bits=2 * cfg.data_count, columns=16)


@lru_cache(maxsize=8)
def _context(spec: SweepSpec) -> _SystemContext:
    fixed = None
    if spec.channel.startswith("fixed:"):
        path = spec.channel[len("fixed:"):]
        if not os.path.exists(path):
            raise ConfigError(f"channel fixture not found: {path}")
        fixed = chan.load_snapshot(path, guard_length=spec.config.uw_length)

    if spec.system == "cp":
        cp_cfg = cpref.CpConfig(data_symbol_variance=spec.config.data_symbol_variance)
        bits_per_symbol = 2 * cp_cfg.data_count
        ctx = _SystemContext(
            spec=spec, kind="cp", smoothing=False, gen=None, uw=None,
            cp_cfg=cp_cfg, interleaver=cp_interleaver(cp_cfg),
            bits_per_symbol=bits_per_symbol,
            symbol_energy=cpref.mean_symbol_energy(cp_cfg),
            n_info=_frame_info_bits(spec, bits_per_symbol),
            fixed_channel=fixed)
    else:
        smap = frame.build_subcarrier_map(spec.config)
        gen = frame.derive_generator(smap)
        uw = txchain.build_unique_word(spec.config.uw_length,
                                       spec.config.uw_energy_ratio, gen)
        bits_per_symbol = 2 * spec.config.data_count
        ctx = _SystemContext(
            spec=spec, kind="uw", smoothing=spec.system == "uw-lmmse",
            gen=gen, uw=uw, cp_cfg=None,
            interleaver=uw_interleaver(spec.config.data_count),
            bits_per_symbol=bits_per_symbol,
            symbol_energy=txchain.mean_data_symbol_energy(gen) + uw.energy,
            n_info=_frame_info_bits(spec, bits_per_symbol),
            fixed_channel=fixed)
    return ctx


def _frame_info_bits(spec: SweepSpec, bits_per_symbol: int) -> int:
    slots = spec.frame_symbols * bits_per_symbol
    if spec.code_rate == "none":
        return slots
    n_info = int(round(slots * RATE_VALUE[spec.code_rate])) - fec.TAIL_BITS
    if n_info < 1:
        raise ConfigError("frame too short for the chosen code rate")
    return n_info


@lru_cache(maxsize=64)
def _fixed_equalizer(spec: SweepSpec, point_idx: int) -> rxchain.WienerEqualizer:
    ctx = _context(spec)
    sigma2 = ctx.sigma2(spec.ebn0_db[point_idx])
    if sigma2 < NOISE_VARIANCE_EPS * spec.config.data_symbol_variance:
        sigma2 = 0.0
    return rxchain.build_equalizer(ctx.fixed_channel, ctx.gen, sigma2,
                                   floor_response=True)


# ---------------------------------------------------------------------------
# Frame pipelines

def _uw_frames(ctx: _SystemContext, eq: rxchain.WienerEqualizer,
               ch: chan.ChannelRealization, sigma2: float, bits: np.ndarray,
               rng_noise: np.random.Generator) -> np.ndarray:
    """Run UW frames through encode / channel / receive; returns decided
    info bits with the shape of ``bits``."""
    spec, gen, uw = ctx.spec, ctx.gen, ctx.uw
    n_frames = bits.shape[0]
    f_sym = spec.frame_symbols
    noise = chan.NoiseSpec(sigma2)

    if spec.code_rate == "none":
        tx_bits = bits.reshape(n_frames * f_sym, ctx.bits_per_symbol)
    else:
        coded = fec.conv_encode(bits)
        punctured = fec.puncture(coded, spec.code_rate)
        blocks = punctured.reshape(n_frames, f_sym, ctx.bits_per_symbol)
        tx_bits = fec.interleave(blocks, ctx.interleaver) \
            .reshape(n_frames * f_sym, ctx.bits_per_symbol)

    data = fec.qpsk_map(tx_bits)
    x = txchain.encode_batch(data, gen, gen.map, uw)
    y = chan.apply_channel_cyclic(x, ch, noise, rng_noise)
    if ctx.smoothing:
        words = rxchain.equalize_batch(y, eq, uw)
        variances = eq.data_error_variances
    else:
        words = rxchain.zf_only_symbol(y, eq, uw)
        variances = eq.data_noise_variances
    estimates = words[:, gen.map.data_positions]

    if spec.code_rate == "none":
        return fec.qpsk_hard_bits(estimates).reshape(n_frames, -1)

    llrs = fec.qpsk_soft_demap(estimates, np.maximum(variances, 1e-300)).llrs
    blocks = llrs.reshape(n_frames, f_sym, ctx.bits_per_symbol)
    stream = fec.deinterleave(blocks, ctx.interleaver).reshape(n_frames, -1)
    return fec.viterbi_decode(fec.depuncture(stream, spec.code_rate), ctx.n_info)


def _cp_frames(ctx: _SystemContext, ch: chan.ChannelRealization, sigma2: float,
               bits: np.ndarray, rng_noise: np.random.Generator) -> np.ndarray:
    spec, cfg = ctx.spec, ctx.cp_cfg
    n_frames = bits.shape[0]
    f_sym = spec.frame_symbols

    if spec.code_rate == "none":
        tx_bits = bits.reshape(n_frames * f_sym, ctx.bits_per_symbol)
    else:
        coded = fec.conv_encode(bits)
        punctured = fec.puncture(coded, spec.code_rate)
        blocks = punctured.reshape(n_frames, f_sym, ctx.bits_per_symbol)
        tx_bits = fec.interleave(blocks, ctx.interleaver) \
            .reshape(n_frames * f_sym, ctx.bits_per_symbol)

    data = fec.qpsk_map(tx_bits)
    x = cpref.cp_encode_symbol(data, cfg)
    y = cpref.cp_apply_channel(x, ch, sigma2, rng_noise)
    estimates, variances = cpref.cp_decode_symbol(y, ch, sigma2, cfg,
                                                  floor_response=True)

    if spec.code_rate == "none":
        return fec.qpsk_hard_bits(estimates).reshape(n_frames, -1)

    llrs = fec.qpsk_soft_demap(estimates, np.maximum(variances, 1e-300)).llrs
    blocks = llrs.reshape(n_frames, f_sym, ctx.bits_per_symbol)
    stream = fec.deinterleave(blocks, ctx.interleaver).reshape(n_frames, -1)
    return fec.viterbi_decode(fec.depuncture(stream, spec.code_rate), ctx.n_info)


def _run_batch(spec: SweepSpec, point_idx: int, batch_idx: int,
               n_frames: int = BATCH_FRAMES) -> tuple:
    """Simulate one batch of frames; returns (bits, errors, frames,
    frame_errors).  Top-level and argument-pure so worker processes can
    execute it independently."""
    ctx = _context(spec)
    sigma2 = ctx.sigma2(spec.ebn0_db[point_idx])
    if sigma2 < NOISE_VARIANCE_EPS * spec.config.data_symbol_variance:
        sigma2 = 0.0
    rng_bits = np.random.default_rng([spec.seed, point_idx, batch_idx, 0])
    rng_ch = np.random.default_rng([spec.seed, point_idx, batch_idx, 1])
    rng_noise = np.random.default_rng([spec.seed, point_idx, batch_idx, 2])

    bits = rng_bits.integers(0, 2, size=(n_frames, ctx.n_info)).astype(np.uint8)

    if ctx.fixed_channel is not None:
        if ctx.kind == "uw":
            eq = _fixed_equalizer(spec, point_idx)
            decided = _uw_frames(ctx, eq, ctx.fixed_channel, sigma2, bits, rng_noise)
        else:
            decided = _cp_frames(ctx, ctx.fixed_channel, sigma2, bits, rng_noise)
    else:
        # Ensemble mode: an independent channel draw per frame.
        decided = np.empty_like(bits)
        for i in range(n_frames):
            ch = chan.sample_channel(rng_ch, spec.rms_delay_spread_s,
                                     spec.config.sample_rate_hz,
                                     spec.channel_taps, spec.config.dft_size,
                                     spec.config.uw_length)
            row = bits[i:i + 1]
            if ctx.kind == "uw":
                eq = rxchain.build_equalizer(ch, ctx.gen, sigma2,
                                             floor_response=True)
                decided[i] = _uw_frames(ctx, eq, ch, sigma2, row, rng_noise)[0]
            else:
                decided[i] = _cp_frames(ctx, ch, sigma2, row, rng_noise)[0]

    wrong = decided != bits
    return (bits.size, int(wrong.sum()), n_frames, int(wrong.any(axis=1).sum()))


# ---------------------------------------------------------------------------
# Sweep driver

def _make_point(ebn0_db, bits, errors, frames, frame_errors, min_errors) -> BerPoint:
    ber = errors / bits if bits else 0.0
    half = 1.96 * math.sqrt(max(ber * (1.0 - ber), 0.0) / bits) if bits else 0.0
    return BerPoint(
        ebn0_db=float(ebn0_db), bits=bits, bit_errors=errors, ber=ber,
        ci_low=max(0.0, ber - half), ci_high=min(1.0, ber + half),
        frames=frames, frame_errors=frame_errors,
        converged=errors >= min_errors)


def default_workers() -> int:
    value = os.environ.get(ENV_WORKERS, "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def run_ber_sweep(spec: SweepSpec, workers: int | None = None) -> BerReport:
    """Run the sweep; results depend only on (spec, seed), never on the
    worker count."""
    workers = workers if workers is not None else default_workers()
    _context(spec)  # fail fast on config/fixture problems
    points = []
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for p_idx, ebn0 in enumerate(spec.ebn0_db):
            bits = errors = frames = frame_errors = 0
            next_batch = 0
            pending: deque = deque()
            while True:
                if executor is not None:
                    while len(pending) < workers:
                        pending.append(executor.submit(
                            _run_batch, spec, p_idx, next_batch))
                        next_batch += 1
                    b, e, f, fe = pending.popleft().result()
                else:
                    b, e, f, fe = _run_batch(spec, p_idx, next_batch)
                    next_batch += 1
                bits += b
                errors += e
                frames += f
                frame_errors += fe
                if errors >= spec.min_error_events or bits >= spec.max_bits_per_point:
                    break
            for fut in pending:
                fut.cancel()
            points.append(_make_point(ebn0, bits, errors, frames, frame_errors,
                                      spec.min_error_events))
    finally:
        if executor is not None:
            executor.shutdown(wait=False, cancel_futures=True)

    metadata = (
        ("system", spec.system),
        ("code_rate", spec.code_rate),
        ("channel", spec.channel),
        ("channel_fixture_id", _fixture_id(spec.channel)),
        ("seed", str(spec.seed)),
        ("config_hash", config_hash(spec.config)),
        ("min_error_events", str(spec.min_error_events)),
        ("max_bits_per_point", str(spec.max_bits_per_point)),
        ("frame_symbols", str(spec.frame_symbols)),
        ("batch_frames", str(BATCH_FRAMES)),
    )
    return BerReport(points=tuple(points), metadata=metadata)


# ---------------------------------------------------------------------------
# MSE probe

def run_mse_probe(config: frame.OfdmSystemConfig, ch: chan.ChannelRealization,
                  ebn0_db: float = 15.0, n_symbols: int = 100_000,
                  seed: int = 1) -> list:
    """Empirical and analytic per-carrier error statistics before and
    after smoothing on one channel realization.

    Returns one row per active carrier:
    (carrier_position, mse_pre, mse_post, analytic_pre, analytic_post).
    Eb follows the uncoded convention (total mean symbol energy over
    2 * data_count bits).
    """
    smap = frame.build_subcarrier_map(config)
    gen = frame.derive_generator(smap)
    uw = txchain.build_unique_word(config.uw_length, config.uw_energy_ratio, gen)
    eb = (txchain.mean_data_symbol_energy(gen) + uw.energy) / (2 * config.data_count)
    sigma2 = eb / 10 ** (ebn0_db / 10.0)
    eq = rxchain.build_equalizer(ch, gen, sigma2)

    rng_pre = np.random.default_rng([seed, 0])
    rng_post = np.random.default_rng([seed, 1])
    mse_pre = rxchain.measure_subcarrier_mse(gen, eq, uw, ch, rng_pre,
                                             n_symbols, mode="pre")
    mse_post = rxchain.measure_subcarrier_mse(gen, eq, uw, ch, rng_post,
                                              n_symbols, mode="post")
    analytic_pre = eq.noise_covariance
    analytic_post = eq.error_variances
    return [(i, float(mse_pre[i]), float(mse_post[i]),
             float(analytic_pre[i]), float(analytic_post[i]))
            for i in range(len(smap.active_carriers))]


# ---------------------------------------------------------------------------
# CSV emission

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


BER_FIELDS = ("ebn0_db", "bits", "bit_errors", "ber", "ci_low", "ci_high",
              "frames", "frame_errors", "converged")


def write_ber_csv(path, report: BerReport) -> None:
    lines = [f"# {k} = {v}" for k, v in report.metadata]
    lines.append(",".join(BER_FIELDS))
    for p in report.points:
        lines.append(",".join(_fmt(getattr(p, f)) for f in BER_FIELDS))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


MSE_FIELDS = ("carrier_index", "mse_pre", "mse_post", "analytic_pre", "analytic_post")


def write_mse_csv(path, rows, metadata=()) -> None:
    lines = [f"# {k} = {v}" for k, v in metadata]
    lines.append(",".join(MSE_FIELDS))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Closed-form reference

def qpsk_ber(ebn0_used_linear: float) -> float:
    """Uncoded Gray-QPSK bit error probability at a given per-bit SNR."""
    return 0.5 * math.erfc(math.sqrt(max(ebn0_used_linear, 0.0)))


def analytic_cp_uncoded_ber(ebn0_db: float, cfg: cpref.CpConfig) -> float:
    """Closed-form flat-channel BER of the CP system versus *total*
    Eb/N0, accounting for the energy spent on prefix and pilots (only
    the data-carrier share steers the decisions)."""
    eb_total = cpref.mean_symbol_energy(cfg) / (2 * cfg.data_count)
    sigma2 = eb_total / 10 ** (ebn0_db / 10.0)
    eb_used = cfg.data_symbol_variance / (2 * cfg.dft_size)
    return qpsk_ber(eb_used / sigma2)


def analytic_cp_required_ebn0_db(ber: float, cfg: cpref.CpConfig) -> float:
    """Invert ``analytic_cp_uncoded_ber``: total Eb/N0 needed for a BER."""
    lo, hi = -10.0, 60.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if analytic_cp_uncoded_ber(mid, cfg) > ber:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# ---------------------------------------------------------------------------
# Config file ingestion

_INT_KEYS = {"dft_size", "data_count", "uw_length", "min_error_events",
             "max_bits_per_point", "frame_symbols", "mse_symbols",
             "channel_taps"}
_FLOAT_KEYS = {"sample_rate_hz", "data_symbol_variance", "uw_energy_ratio",
               "mse_ebn0_db", "rms_delay_spread_s"}
_STR_KEYS = {"system", "code_rate", "placement_strategy"}
_INT_LIST_KEYS = {"zero_indices", "redundant_indices"}
_FLOAT_LIST_KEYS = {"ebn0_db"}
KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _INT_LIST_KEYS | _FLOAT_LIST_KEYS


def parse_config_file(path) -> dict:
    """Parse the flat key/value (+ bracketed array) config format.

    Unknown keys are rejected so typos cannot silently fall back to
    defaults.
    """
    values: dict = {}
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _STR_KEYS:
                values[key] = value
            else:
                if not (value.startswith("[") and value.endswith("]")):
                    raise ValueError("expected a bracketed array")
                items = [v.strip() for v in value[1:-1].split(",") if v.strip()]
                cast = int if key in _INT_LIST_KEYS else float
                values[key] = tuple(cast(v) for v in items)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def system_config_from(values: dict) -> frame.OfdmSystemConfig:
    """Build the OFDM system config from parsed values, falling back to
    the reference system for anything unspecified."""
    ref = frame.reference_config()
    return frame.OfdmSystemConfig(
        dft_size=values.get("dft_size", ref.dft_size),
        data_count=values.get("data_count", ref.data_count),
        uw_length=values.get("uw_length", ref.uw_length),
        zero_indices=tuple(values.get("zero_indices", ref.zero_indices)),
        redundant_indices=tuple(values.get("redundant_indices", ref.redundant_indices)),
        sample_rate_hz=values.get("sample_rate_hz", ref.sample_rate_hz),
        data_symbol_variance=values.get("data_symbol_variance", ref.data_symbol_variance),
        uw_energy_ratio=values.get("uw_energy_ratio", ref.uw_energy_ratio),
    )


def sweep_spec_from(values: dict, seed: int, channel: str) -> SweepSpec:
    return SweepSpec(
        config=system_config_from(values),
        system=values.get("system", "uw-lmmse"),
        ebn0_db=tuple(values.get("ebn0_db", (10.0, 14.0, 18.0))),
        seed=seed,
        code_rate=values.get("code_rate", "none"),
        channel=channel,
        min_error_events=values.get("min_error_events", 200),
        max_bits_per_point=values.get("max_bits_per_point", 10_000_000),
        frame_symbols=values.get("frame_symbols", 8),
        channel_taps=values.get("channel_taps", chan.DEFAULT_TAP_COUNT),
        rms_delay_spread_s=values.get("rms_delay_spread_s",
                                      chan.DEFAULT_RMS_DELAY_SPREAD_S),
    )
