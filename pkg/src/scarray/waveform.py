"""Single-carrier baseband waveforms: QPSK symbols, root-raised-cosine
pulse shaping, and per-antenna multipath propagation with filtered noise.

Grid conventions
----------------
All waveforms live on a uniform grid with spacing ``T / Q`` whose origin is
an integer number of samples before t = 0, so baud instants t = kT always
fall exactly on the grid. Transmit shaping is a plain discrete convolution
of the Q-times upsampled symbol train with the filter taps; receive
filtering approximates the convolution integral, i.e. carries a factor of
the sample period. With both conventions the transmit/receive filter
cascade reproduces the unit-peak raised-cosine response exactly (up to tap
truncation), and injected white noise of variance N0/sample_period per
sample comes out with autocorrelation N0 * g(tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.signal import fftconvolve

from .channel import ChannelRealization
from .numerics import Rng

__all__ = [
    "PulseShape",
    "SymbolStream",
    "SampledWaveform",
    "AntennaWaveforms",
    "QPSK_POINTS",
    "raised_cosine",
    "raised_cosine_grid",
    "root_raised_cosine",
    "modulate_qpsk",
    "random_qpsk",
    "shape",
    "propagate",
    "quantize_delays",
]

# Gray-mapped QPSK: bit pair (b0, b1) -> ((1-2*b0) + 1j*(1-2*b1))/sqrt(2),
# so 00 -> (+1+1j)/sqrt(2). Unit average energy.
QPSK_POINTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / math.sqrt(2.0)

# Half-width (in units of t/T) of the window around each removable
# singularity inside which the analytic limit is returned.
_SINGULARITY_WINDOW = 1e-7


def raised_cosine(t: float, beta: float, T: float) -> float:
    """Raised-cosine impulse response normalized to g(0) = 1.

    The removable singularity at |t| = T/(2*beta) is evaluated by its
    analytic limit (pi/4) * sinc(1/(2*beta)).
    """
    return float(raised_cosine_grid(np.asarray(t, dtype=float), beta, T))


def raised_cosine_grid(t: np.ndarray, beta: float, T: float) -> np.ndarray:
    """Vectorized :func:`raised_cosine` over an array of times."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"rolloff must lie in [0, 1], got {beta!r}")
    if T <= 0.0:
        raise ValueError("symbol period must be positive")
    x = np.asarray(t, dtype=float) / T
    # Nyquist zeros are exact analytically; snap arguments that are integral
    # up to roundoff so downstream identities hold to machine precision.
    nyquist_zero = (np.abs(x - np.rint(x)) < 1e-9) & (np.rint(x) != 0.0)
    if beta == 0.0:
        return np.where(nyquist_zero, 0.0, np.sinc(x))
    singular = np.abs(np.abs(x) - 0.5 / beta) < _SINGULARITY_WINDOW
    safe = np.where(singular, 0.0, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.sinc(safe) * np.cos(np.pi * beta * safe) / (1.0 - (2.0 * beta * safe) ** 2)
    values = np.where(singular, 0.25 * np.pi * np.sinc(0.5 / beta), values)
    return np.where(nyquist_zero, 0.0, values)


def root_raised_cosine(t: float, beta: float, T: float) -> float:
    """Unit-energy root-raised-cosine impulse response.

    Self-convolution equals the raised-cosine response; the removable
    singularities at t = 0 and |t| = T/(4*beta) use their analytic limits.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"rolloff must lie in [0, 1], got {beta!r}")
    if T <= 0.0:
        raise ValueError("symbol period must be positive")
    x = t / T
    scale = 1.0 / math.sqrt(T)
    if abs(x) < 1e-10:
        return scale * (1.0 - beta + 4.0 * beta / math.pi)
    if beta > 0.0 and abs(abs(x) - 0.25 / beta) < _SINGULARITY_WINDOW:
        arg = 0.25 * math.pi / beta
        return (
            scale
            * beta
            / math.sqrt(2.0)
            * ((1.0 + 2.0 / math.pi) * math.sin(arg) + (1.0 - 2.0 / math.pi) * math.cos(arg))
        )
    num = math.sin(math.pi * x * (1.0 - beta)) + 4.0 * beta * x * math.cos(math.pi * x * (1.0 + beta))
    den = math.pi * x * (1.0 - (4.0 * beta * x) ** 2)
    return scale * num / den


@dataclass(frozen=True)
class PulseShape:
    """Root-raised-cosine transmit/receive filter pair on an oversampled grid.

    ``span`` is the one-sided truncation in symbols; ``oversampling`` is the
    number of samples per symbol period.
    """

    rolloff: float
    symbol_period: float
    span: int = 16
    oversampling: int = 2

    def __post_init__(self):
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError("rolloff must lie in [0, 1]")
        if self.symbol_period <= 0.0:
            raise ValueError("symbol period must be positive")
        if self.span < 4:
            raise ValueError("span must be >= 4 symbols")
        if self.oversampling < 2:
            raise ValueError("oversampling must be >= 2")

    @property
    def sample_period(self) -> float:
        return self.symbol_period / self.oversampling

    @cached_property
    def rrc_taps(self) -> np.ndarray:
        """RRC samples on [-span*T, +span*T], one per grid step."""
        q = self.oversampling
        idx = np.arange(-self.span * q, self.span * q + 1)
        taps = np.array(
            [root_raised_cosine(i * self.sample_period, self.rolloff, self.symbol_period) for i in idx]
        )
        taps.setflags(write=False)
        return taps

    @cached_property
    def combined_taps(self) -> np.ndarray:
        """Transmit-receive cascade: sample_period * (rrc ** rrc), peak ~= 1."""
        taps = np.convolve(self.rrc_taps, self.rrc_taps) * self.sample_period
        taps.setflags(write=False)
        return taps

    def filter_taps(self, kind: str) -> np.ndarray:
        if kind == "transmit":
            return self.rrc_taps
        if kind == "combined":
            return self.combined_taps
        raise ValueError(f"unknown filter kind {kind!r}")


@dataclass(frozen=True)
class SymbolStream:
    """Complex information symbols; only QPSK is in play here."""

    symbols: np.ndarray
    modulation: str = "qpsk"

    def __post_init__(self):
        object.__setattr__(self, "symbols", np.asarray(self.symbols, dtype=complex))

    def __len__(self) -> int:
        return self.symbols.size


@dataclass(frozen=True)
class SampledWaveform:
    """Uniformly sampled complex baseband signal.

    ``origin`` is the time of samples[0] and is always an integer multiple
    of ``sample_period``.
    """

    samples: np.ndarray
    sample_period: float
    origin: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))
        if self.sample_period <= 0.0:
            raise ValueError("sample period must be positive")

    def __len__(self) -> int:
        return self.samples.size

    def index_at(self, t: float) -> int:
        """Grid index of time t; t must lie on the sample grid."""
        pos = (t - self.origin) / self.sample_period
        idx = int(round(pos))
        if abs(pos - idx) > 1e-6:
            raise ValueError(f"time {t!r} is not on the sample grid")
        if not 0 <= idx < self.samples.size:
            raise IndexError(f"time {t!r} outside the waveform extent")
        return idx

    def same_grid(self, other: "SampledWaveform") -> bool:
        return (
            self.samples.size == other.samples.size
            and abs(self.sample_period - other.sample_period) < 1e-18
            and abs(self.origin - other.origin) < 1e-12 * self.sample_period + 1e-30
        )


@dataclass(frozen=True)
class AntennaWaveforms:
    """Received waveforms for the whole array on one shared grid (M x N)."""

    samples: np.ndarray
    sample_period: float
    origin: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 2:
            raise ValueError("expected a 2-D (antennas x samples) array")

    @property
    def antenna_count(self) -> int:
        return self.samples.shape[0]

    def antenna(self, m: int) -> SampledWaveform:
        return SampledWaveform(self.samples[m], self.sample_period, self.origin)


def modulate_qpsk(bits) -> SymbolStream:
    """Gray-map a bit sequence onto unit-energy QPSK symbols."""
    bits = np.asarray(bits, dtype=int).ravel()
    if bits.size % 2:
        raise ValueError("QPSK needs an even number of bits")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    b = bits.reshape(-1, 2)
    symbols = ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / math.sqrt(2.0)
    return SymbolStream(symbols=symbols)


def random_qpsk(rng: Rng, count: int) -> SymbolStream:
    """``count`` uniformly random QPSK symbols from the given stream."""
    bits = (rng.uniform(2 * count) < 0.5).astype(int)
    return modulate_qpsk(bits)


def shape(
    symbols: SymbolStream,
    pulse: PulseShape,
    filter: str = "combined",
    pad_symbols: int = 0,
) -> SampledWaveform:
    """Pulse-shape a symbol stream with the transmit or combined filter.

    ``pad_symbols`` zero symbols are reserved on each side of the burst so
    that delayed copies and filter transients stay on the grid.
    """
    s = symbols.symbols
    if s.size == 0:
        raise ValueError("cannot shape an empty symbol stream")
    q = pulse.oversampling
    taps = pulse.filter_taps(filter)
    half = (taps.size - 1) // 2
    ups = np.zeros((s.size - 1) * q + 1, dtype=complex)
    ups[::q] = s
    body = np.convolve(ups, taps)
    pad = int(pad_symbols) * q
    samples = np.concatenate([np.zeros(pad, dtype=complex), body, np.zeros(pad, dtype=complex)])
    origin = -(pad + half) * pulse.sample_period
    return SampledWaveform(samples=samples, sample_period=pulse.sample_period, origin=origin)


def quantize_delays(delays, sample_period: float) -> np.ndarray:
    """Tap delays as integer sample offsets (nearest sample, ties round up)."""
    d = np.floor(np.asarray(delays, dtype=float) / sample_period + 0.5).astype(int)
    if np.any(d < 0):
        raise ValueError("negative tap delay after quantization")
    return d


def propagate(
    tx: SampledWaveform,
    chan: ChannelRealization,
    pulse: PulseShape,
    n0: float,
    rng: Rng,
) -> AntennaWaveforms:
    """Push a transmit waveform through the array: delay taps, add noise, filter.

    Per antenna the output is sum_l alpha_m[l] * tx(t - tau_l) plus white
    complex Gaussian noise of variance n0/sample_period per sample, then
    receive-filtered with the RRC taps. Tap delays are quantized to the
    sample grid. Noise streams are derived per antenna from the supplied
    generator, so results do not depend on how antennas are scheduled.
    """
    if n0 < 0.0:
        raise ValueError("noise spectral density must be nonnegative")
    ts = tx.sample_period
    if abs(ts - pulse.sample_period) > 1e-18:
        raise ValueError("transmit waveform and pulse disagree on the sample grid")
    offsets = quantize_delays(chan.profile.delays, ts)
    n_tx = tx.samples.size
    d_max = int(offsets[-1])
    if d_max >= n_tx:
        raise ValueError("tap delay exceeds the waveform extent")

    n_out = n_tx + d_max
    delayed = np.zeros((chan.tap_count, n_out), dtype=complex)
    for l, d in enumerate(offsets):
        delayed[l, d : d + n_tx] = tx.samples
    mixed = chan.gains @ delayed  # (M, n_out)

    if n0 > 0.0:
        sigma = math.sqrt(n0 / ts)
        for m in range(chan.antenna_count):
            mixed[m] += sigma * rng.derive(m).cn(n_out)

    taps = pulse.rrc_taps
    half = (taps.size - 1) // 2
    filtered = ts * fftconvolve(mixed, taps[None, :], mode="full", axes=1)
    filtered = filtered[:, half : half + n_out]
    return AntennaWaveforms(samples=filtered, sample_period=ts, origin=tx.origin)
