"""Decision-point SNR measurement shared by the receiver tests and the
acceptance gate.

Protocol: run the chain twice with identical noise seeds, once noiseless
(signal-plus-ISI part) and once with zero symbols (noise-only part), then
ratio the measured baud-sample powers. Averaging over channel realizations
removes the per-realization array-gain fluctuation.
"""

import math

import numpy as np

from scarray.channel import ArrayGeometry, PowerDelayProfile, draw_channel
from scarray.numerics import Rng
from scarray.receiver import optimal_weights, receive
from scarray.waveform import PulseShape, SymbolStream, propagate, random_qpsk, shape

_CHANNEL, _SYMBOLS, _NOISE = 0, 1, 2


def measure_decision_snr(
    profile: PowerDelayProfile,
    pulse: PulseShape,
    m: int,
    n0: float,
    seed: int,
    realizations: int = 24,
    symbols: int = 2000,
):
    """Returns (per_tap_snr_db array, combined_snr_db), measured."""
    geom = ArrayGeometry(m, mode="independent")
    weights = optimal_weights(profile)
    pad = pulse.span + int(math.ceil(profile.max_delay / pulse.symbol_period - 1e-12))
    taps = profile.tap_count
    sig_tap = np.zeros(taps)
    noise_tap = np.zeros(taps)
    sig_combined = 0.0
    noise_combined = 0.0
    zeros = SymbolStream(np.zeros(symbols, dtype=complex))
    tx_zero = shape(zeros, pulse, "transmit", pad_symbols=pad)
    for r in range(realizations):
        rng = Rng(seed).derive(r)
        chan = draw_channel(profile, geom, rng.derive(_CHANNEL))
        sym = random_qpsk(rng.derive(_SYMBOLS), symbols)
        tx = shape(sym, pulse, "transmit", pad_symbols=pad)
        signal_run = receive(
            propagate(tx, chan, pulse, 0.0, rng.derive(_NOISE)),
            chan,
            weights,
            symbols,
            pulse.symbol_period,
            keep_per_tap=True,
        )
        noise_run = receive(
            propagate(tx_zero, chan, pulse, n0, rng.derive(_NOISE)),
            chan,
            weights,
            symbols,
            pulse.symbol_period,
            keep_per_tap=True,
        )
        sig_combined += np.mean(np.abs(signal_run.soft) ** 2)
        noise_combined += np.mean(np.abs(noise_run.soft) ** 2)
        sig_tap += np.mean(np.abs(signal_run.per_tap_soft) ** 2, axis=1)
        noise_tap += np.mean(np.abs(noise_run.per_tap_soft) ** 2, axis=1)
    per_tap_db = 10.0 * np.log10(sig_tap / noise_tap)
    combined_db = 10.0 * math.log10(sig_combined / noise_combined)
    return per_tap_db, combined_db
