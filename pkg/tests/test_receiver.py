"""Tests for the tap-recovery receiver: degenerate identities, Monte Carlo
concentration, the filter-bank equivalence, and SNR calibration."""

import math

import numpy as np
import pytest

from scarray.channel import (
    ArrayGeometry,
    ChannelRealization,
    draw_channel,
    etu_profile,
    normalize_profile,
    uniform_profile,
)
from scarray.numerics import Rng
from scarray.receiver import (
    CombinerWeights,
    combine,
    optimal_weights,
    receive,
    recover_tap,
    sample_and_slice,
)
from scarray.waveform import (
    AntennaWaveforms,
    SymbolStream,
    propagate,
    quantize_delays,
    random_qpsk,
    shape,
)

from conftest import DEFAULT_T, aligned_segment
from snr_protocol import measure_decision_snr

T = DEFAULT_T


def chain(stream, chan, pulse, n0, rng, pad=None):
    if pad is None:
        pad = pulse.span + int(math.ceil(chan.profile.max_delay / pulse.symbol_period - 1e-12))
    tx = shape(stream, pulse, "transmit", pad_symbols=pad)
    return propagate(tx, chan, pulse, n0, rng)


class TestRecoverTap:
    def test_single_antenna_identity(self, pulse):
        prof = normalize_profile([(0.0, 0.0)])
        chan = ChannelRealization(gains=np.array([[1.0 + 0j]]), profile=prof)
        stream = random_qpsk(Rng(40), 48)
        x = chain(stream, chan, pulse, 0.0, Rng(41))
        recovered = recover_tap(x, chan, 0)
        ref = shape(stream, pulse, "combined", pad_symbols=16)
        assert np.max(np.abs(recovered.samples - aligned_segment(recovered, ref))) < 1e-10

    def test_tap_power_scaling_large_array(self, pulse):
        """Tap-0 branch concentrates on sigma_0^2 s[k] = 0.5 s[k] at M = 4096."""
        prof = normalize_profile([(0.0, -3.0103), (2 * T, -3.0103)])
        chan = draw_channel(prof, ArrayGeometry(4096, mode="independent"), Rng(42))
        stream = random_qpsk(Rng(43), 200)
        x = chain(stream, chan, pulse, 0.0, Rng(44))
        rec = sample_and_slice(recover_tap(x, chan, 0), 200, T)
        assert np.max(np.abs(rec.soft - 0.5 * stream.symbols)) < 0.05

    def test_zero_input_zero_output(self, pulse):
        prof = normalize_profile([(0.0, 0.0)])
        chan = draw_channel(prof, ArrayGeometry(8, mode="independent"), Rng(45))
        x = chain(SymbolStream(np.zeros(16, dtype=complex)), chan, pulse, 0.0, Rng(46))
        assert np.all(recover_tap(x, chan, 0).samples == 0.0)

    def test_bad_tap_index(self, pulse):
        prof = normalize_profile([(0.0, 0.0)])
        chan = draw_channel(prof, ArrayGeometry(2, mode="independent"), Rng(47))
        x = chain(random_qpsk(Rng(48), 8), chan, pulse, 0.0, Rng(49))
        with pytest.raises(IndexError):
            recover_tap(x, chan, 1)


class TestCombine:
    def test_single_tap_identity(self, pulse):
        prof = normalize_profile([(0.0, 0.0)])
        chan = draw_channel(prof, ArrayGeometry(4, mode="independent"), Rng(50))
        x = chain(random_qpsk(Rng(51), 16), chan, pulse, 0.0, Rng(52))
        tap = recover_tap(x, chan, 0)
        out = combine([tap], CombinerWeights(np.array([1.0])))
        np.testing.assert_array_equal(out.samples, tap.samples)

    def test_weight_scaling(self, pulse):
        prof = normalize_profile([(0.0, 0.0), (T, -1.0)])
        chan = draw_channel(prof, ArrayGeometry(4, mode="independent"), Rng(53))
        x = chain(random_qpsk(Rng(54), 16), chan, pulse, 0.0, Rng(55))
        taps = [recover_tap(x, chan, p) for p in range(2)]
        out = combine(taps, CombinerWeights(np.array([2.0, 0.0])))
        np.testing.assert_allclose(out.samples, 2.0 * taps[0].samples)

    def test_equal_weights_recover_unit_power(self, pulse):
        """Equal weights on a unit-power profile: baud samples ~= s[k] at M = 4096."""
        prof = normalize_profile([(0.0, -3.0103), (2 * T, -3.0103)])
        chan = draw_channel(prof, ArrayGeometry(4096, mode="independent"), Rng(56))
        stream = random_qpsk(Rng(57), 200)
        x = chain(stream, chan, pulse, 0.0, Rng(58))
        rec = receive(x, chan, optimal_weights(prof), 200, T)
        assert np.max(np.abs(rec.soft - stream.symbols)) < 0.07

    def test_grid_mismatch_rejected(self, pulse):
        a = shape(random_qpsk(Rng(59), 8), pulse, "combined")
        b = shape(random_qpsk(Rng(60), 9), pulse, "combined")
        with pytest.raises(ValueError):
            combine([a, b], CombinerWeights(np.array([1.0, 1.0])))


def snr_formula_oracle(powers, eta, m, n0):
    """Direct evaluation of the combined-SNR expression; test-side reference."""
    num = m * float(np.dot(powers, eta)) ** 2
    den = n0 * float(np.dot(powers, eta**2))
    return num / den


class TestOptimalWeights:
    def test_etu_all_ones(self):
        np.testing.assert_array_equal(optimal_weights(etu_profile()).eta, np.ones(9))

    def test_single_tap(self):
        prof = normalize_profile([(0.0, 0.0)])
        np.testing.assert_array_equal(optimal_weights(prof).eta, [1.0])

    def test_beats_random_weights(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            powers = rng.dirichlet(np.ones(5))
            best = snr_formula_oracle(powers, np.ones(5), m=64, n0=0.5)
            for _ in range(100):
                eta = rng.uniform(0.01, 2.0, size=5)
                assert best >= snr_formula_oracle(powers, eta, m=64, n0=0.5) - 1e-12


class TestSampleAndSlice:
    def test_quadrant_rule(self, pulse):
        wave = shape(SymbolStream(np.array([(0.9 + 0.8j) / math.sqrt(2.0)])), pulse, "combined")
        rec = sample_and_slice(wave, 1, T)
        assert rec.decided.symbols[0] == (1 + 1j) / math.sqrt(2.0)

    def test_noiseless_ideal_no_errors(self, pulse):
        stream = random_qpsk(Rng(62), 1000)
        wave = shape(SymbolStream(0.8 * stream.symbols), pulse, "combined")
        rec = sample_and_slice(wave, 1000, T)
        np.testing.assert_array_equal(rec.decided.symbols, stream.symbols)

    def test_full_chain_low_ser_at_10db(self, pulse):
        """M = 64, ETU, Es/N0 = 10 dB: SER below 1e-3 over 1e5 symbols."""
        prof = etu_profile()
        geom = ArrayGeometry(64, mode="independent")
        n0 = 10.0 ** (-1.0)
        errors = 0
        total = 0
        for trial in range(50):
            rng = Rng(63).derive(trial)
            chan = draw_channel(prof, geom, rng.derive(0))
            stream = random_qpsk(rng.derive(1), 2000)
            x = chain(stream, chan, pulse, n0, rng.derive(2))
            rec = receive(x, chan, optimal_weights(prof), 2000, T)
            errors += int(np.count_nonzero(rec.decided.symbols != stream.symbols))
            total += 2000
        assert total == 10**5
        assert errors / total < 1e-3


class TestReceive:
    def test_composition_is_bit_exact(self, pulse):
        prof = etu_profile()
        chan = draw_channel(prof, ArrayGeometry(8, mode="independent"), Rng(64))
        stream = random_qpsk(Rng(65), 64)
        x = chain(stream, chan, pulse, 0.1, Rng(66))
        w = optimal_weights(prof)
        rec = receive(x, chan, w, 64, T)
        manual = sample_and_slice(
            combine([recover_tap(x, chan, p) for p in range(prof.tap_count)], w), 64, T
        )
        np.testing.assert_array_equal(rec.soft, manual.soft)
        np.testing.assert_array_equal(rec.decided.symbols, manual.decided.symbols)

    def test_filter_bank_equivalence(self, pulse):
        """Tap-bank receiver equals (1/M) c^H(-t) * x(t) on baud samples."""
        prof = etu_profile()
        chan = draw_channel(prof, ArrayGeometry(8, mode="independent"), Rng(67))
        stream = random_qpsk(Rng(68), 64)
        x = chain(stream, chan, pulse, 0.2, Rng(69))
        rec = receive(x, chan, optimal_weights(prof), 64, T)

        # Oracle: per antenna, correlate against the conjugated, time-reversed
        # channel (a sparse kernel of advances), then average over antennas.
        offsets = quantize_delays(prof.delays, x.sample_period)
        d_max = int(offsets[-1])
        n_keep = x.samples.shape[1] - d_max
        acc = np.zeros(n_keep, dtype=complex)
        for m_idx in range(chan.antenna_count):
            for p, d in enumerate(offsets):
                acc += np.conj(chan.gains[m_idx, p]) * x.samples[m_idx, d : d + n_keep]
        acc /= chan.antenna_count
        start = int(round((0.0 - x.origin) / x.sample_period))
        baud = acc[start : start + 64 * pulse.oversampling : pulse.oversampling]
        assert np.max(np.abs(baud - rec.soft)) < 1e-10

    def test_decision_scale_invariance(self, pulse):
        prof = etu_profile()
        chan = draw_channel(prof, ArrayGeometry(4, mode="independent"), Rng(70))
        stream = random_qpsk(Rng(71), 128)
        x = chain(stream, chan, pulse, 0.5, Rng(72))
        base = receive(x, chan, CombinerWeights(np.ones(9)), 128, T)
        scaled = receive(x, chan, CombinerWeights(np.full(9, 7.25)), 128, T)
        np.testing.assert_array_equal(base.decided.symbols, scaled.decided.symbols)

    def test_awgn_single_antenna_matches_analytic(self, pulse):
        """M = 1, single tap, Es/N0 = 8 dB: SER within 20% of the QPSK closed
        form, cross-checked against a symbol-level oracle fed the same noise."""
        prof = normalize_profile([(0.0, 0.0)])
        chan = ChannelRealization(gains=np.array([[1.0 + 0j]]), profile=prof)
        n0 = 10.0 ** (-0.8)
        symbols = 20_000
        errors_chain = 0
        errors_oracle = 0
        for trial in range(10):
            rng = Rng(73).derive(trial)
            stream = random_qpsk(rng.derive(1), symbols // 10)
            x = chain(stream, chan, pulse, n0, rng.derive(2))
            rec = receive(x, chan, CombinerWeights(np.array([1.0])), symbols // 10, T)
            errors_chain += int(np.count_nonzero(rec.decided.symbols != stream.symbols))

            # Same noise realization, zero symbols: noise-only baud samples.
            x_noise = chain(
                SymbolStream(np.zeros(symbols // 10, dtype=complex)), chan, pulse, n0, rng.derive(2)
            )
            noise_rec = receive(x_noise, chan, CombinerWeights(np.array([1.0])), symbols // 10, T)
            oracle_soft = stream.symbols + noise_rec.soft
            flips = (np.signbit(oracle_soft.real) != np.signbit(stream.symbols.real)) | (
                np.signbit(oracle_soft.imag) != np.signbit(stream.symbols.imag)
            )
            errors_oracle += int(np.count_nonzero(flips))

        def q_func(x):
            return 0.5 * math.erfc(x / math.sqrt(2.0))

        snr = 1.0 / n0
        analytic = 2.0 * q_func(math.sqrt(snr)) - q_func(math.sqrt(snr)) ** 2
        ser_chain = errors_chain / symbols
        ser_oracle = errors_oracle / symbols
        assert abs(ser_chain - analytic) < 0.2 * analytic
        assert abs(ser_chain - ser_oracle) < 1.5e-3

    def test_zero_noise_large_array_zero_errors(self, pulse):
        """Residual ISI ~ 1/sqrt(M) sits far below the decision margin at M = 4096."""
        prof = etu_profile()
        geom = ArrayGeometry(4096, mode="independent")
        w = optimal_weights(prof)
        for trial in range(10):
            rng = Rng(74).derive(trial)
            chan = draw_channel(prof, geom, rng.derive(0))
            stream = random_qpsk(rng.derive(1), 1000)
            x = chain(stream, chan, pulse, 0.0, rng.derive(2))
            rec = receive(x, chan, w, 1000, T)
            assert np.count_nonzero(rec.decided.symbols != stream.symbols) == 0


class TestSnrCalibration:
    def test_decision_point_snr_matches_formulas(self, pulse):
        """Per-tap sigma_p^2 M/N0 and combined M/N0 within 0.5 dB at M = 64."""
        prof = uniform_profile(4, T)
        m, n0 = 64, 1.0
        per_tap_db, combined_db = measure_decision_snr(
            prof, pulse, m, n0, seed=75, realizations=16, symbols=1500
        )
        expected_tap_db = 10.0 * math.log10(0.25 * m / n0)
        expected_combined_db = 10.0 * math.log10(m / n0)
        assert np.max(np.abs(per_tap_db - expected_tap_db)) < 0.5
        assert abs(combined_db - expected_combined_db) < 0.5

    def test_ser_non_increasing_in_antennas(self, pulse):
        """Paired seeds, Es/N0 = -10 dB: more antennas never hurt on average."""
        prof = etu_profile()
        n0 = 10.0
        sers = []
        for m in (8, 32, 128):
            geom = ArrayGeometry(m, mode="independent")
            errors = 0
            for trial in range(20):
                rng = Rng(76).derive(trial)
                chan = draw_channel(prof, geom, rng.derive(0))
                stream = random_qpsk(rng.derive(1), 1000)
                x = chain(stream, chan, pulse, n0, rng.derive(2))
                rec = receive(x, chan, optimal_weights(prof), 1000, T)
                errors += int(np.count_nonzero(rec.decided.symbols != stream.symbols))
            sers.append(errors / 20_000)
        assert sers[0] >= sers[1] >= sers[2]
