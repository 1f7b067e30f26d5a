"""Waveform-recovery receiver for the antenna array: per-tap matched
filtering, linear tap combining, baud-rate sampling, and symbol decisions.

The tap-p branch forms (1/M) alpha[p]^H x(t + tau_p), which for many
independent antennas recovers the transmit waveform scaled by the tap
power. Branches are combined with real weights (equal weights maximize the
post-combining SNR) and the result is sampled once per symbol period; no
equalizer is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, PowerDelayProfile
from .waveform import QPSK_POINTS, AntennaWaveforms, SampledWaveform, SymbolStream, quantize_delays

__all__ = [
    "CombinerWeights",
    "DecisionRecord",
    "recover_tap",
    "combine",
    "optimal_weights",
    "sample_and_slice",
    "receive",
]


@dataclass(frozen=True)
class CombinerWeights:
    """Real weights, one per channel tap."""

    eta: np.ndarray

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        object.__setattr__(self, "eta", eta)
        if eta.ndim != 1 or eta.size == 0:
            raise ValueError("weights must be a nonempty 1-D vector")
        if not eta.any():
            raise ValueError("weights must not all be zero")


@dataclass(frozen=True)
class DecisionRecord:
    """Sliced symbols plus the pre-slicer decision variables."""

    decided: SymbolStream
    soft: np.ndarray
    per_tap_soft: np.ndarray | None = None  # optional (taps, symbols)

    def __post_init__(self):
        if len(self.decided) != self.soft.size:
            raise ValueError("decided and soft lengths must match")


def recover_tap(x: AntennaWaveforms, chan: ChannelRealization, p: int) -> SampledWaveform:
    """Recover the transmit waveform over tap p: advance by tau_p, project on
    alpha[p], scale by 1/M.

    All taps are cropped to the grid reachable at the largest tap delay, so
    every recovered branch shares the same grid.
    """
    taps = chan.tap_count
    if not 0 <= p < taps:
        raise IndexError(f"tap index {p} out of range for {taps} taps")
    if x.antenna_count != chan.antenna_count:
        raise ValueError("waveform bundle and channel disagree on antenna count")
    offsets = quantize_delays(chan.profile.delays, x.sample_period)
    d_max = int(offsets[-1])
    n = x.samples.shape[1]
    out_len = n - d_max
    if out_len <= 0:
        raise ValueError("tap advance exceeds the available guard samples")
    advanced = x.samples[:, offsets[p] : offsets[p] + out_len]
    recovered = (chan.gains[:, p].conj() @ advanced) / chan.antenna_count
    return SampledWaveform(recovered, x.sample_period, x.origin)


def combine(per_tap: list[SampledWaveform], weights: CombinerWeights) -> SampledWaveform:
    """Pointwise weighted sum of per-tap recovered waveforms."""
    if len(per_tap) != weights.eta.size:
        raise ValueError("one weight per recovered tap required")
    head = per_tap[0]
    for wave in per_tap[1:]:
        if not head.same_grid(wave):
            raise ValueError("per-tap waveforms do not share a sample grid")
    total = np.zeros_like(head.samples)
    for eta, wave in zip(weights.eta, per_tap):
        total += eta * wave.samples
    return SampledWaveform(total, head.sample_period, head.origin)


def optimal_weights(profile: PowerDelayProfile) -> CombinerWeights:
    """SNR-maximizing combiner weights: all equal (scale is immaterial)."""
    return CombinerWeights(np.ones(profile.tap_count))


def _slice_qpsk(soft: np.ndarray) -> np.ndarray:
    """Minimum-distance QPSK decision; reduces to the quadrant rule."""
    return (np.where(soft.real >= 0.0, 1.0, -1.0) + 1j * np.where(soft.imag >= 0.0, 1.0, -1.0)) / np.sqrt(2.0)


def sample_and_slice(
    s_hat: SampledWaveform, symbol_count: int, symbol_period: float
) -> DecisionRecord:
    """Sample the recovered waveform at t = kT and slice to QPSK symbols."""
    if symbol_count < 1:
        raise ValueError("symbol_count must be >= 1")
    start = s_hat.index_at(0.0)
    step = symbol_period / s_hat.sample_period
    q = int(round(step))
    if abs(step - q) > 1e-6 or q < 1:
        raise ValueError("baud instants do not fall on the sample grid")
    last = start + (symbol_count - 1) * q
    if last >= s_hat.samples.size:
        raise ValueError("symbol_count exceeds the waveform extent")
    soft = s_hat.samples[start : last + 1 : q].copy()
    decided = _slice_qpsk(soft)
    assert np.isin(decided, QPSK_POINTS).all()
    return DecisionRecord(decided=SymbolStream(decided), soft=soft)


def receive(
    x: AntennaWaveforms,
    chan: ChannelRealization,
    weights: CombinerWeights,
    symbol_count: int,
    symbol_period: float,
    keep_per_tap: bool = False,
) -> DecisionRecord:
    """Full receiver: recover every tap, combine, sample, slice.

    This is literally the composition of the other operations; there is no
    second code path.
    """
    per_tap = [recover_tap(x, chan, p) for p in range(chan.tap_count)]
    combined = combine(per_tap, weights)
    record = sample_and_slice(combined, symbol_count, symbol_period)
    if keep_per_tap:
        soft_taps = np.stack(
            [sample_and_slice(w, symbol_count, symbol_period).soft for w in per_tap]
        )
        record = DecisionRecord(decided=record.decided, soft=record.soft, per_tap_soft=soft_taps)
    return record
