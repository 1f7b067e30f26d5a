"""Closed-form link analysis: per-tap and combined SNR, the spatial
correlation factor P0 (finite-array trace form and its large-array integral
limit), residual inter-symbol-interference power, and the overall discrete
impulse response seen by the receiver.

The central quantity is

    P_ISI = P0 * sum_{n != 0} sum_p sum_l sigma_p^2 sigma_l^2
            g^2(n T - tau_l + tau_p),        P0 = tr(R^2) / M^2,

which vanishes only for an infinite, spatially independent array.

Lag sums come in two flavors. The default uses the analytic raised-cosine
response at the exact tap delays; ``on_grid=True`` uses the truncated
discrete filter cascade at the quantized delays, which is what the sampled
simulation actually realizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry, ChannelRealization, PowerDelayProfile, jakes_correlation
from .numerics import bessel_j0, integrate
from .receiver import CombinerWeights
from .waveform import PulseShape, quantize_delays, raised_cosine_grid

__all__ = [
    "IsiReport",
    "snr_single_tap",
    "snr_combined",
    "trace_r_squared",
    "p0",
    "p0_limit",
    "impulse_response",
    "impulse_response_window",
    "p_isi",
    "p_isi_integer_delays",
    "default_lag_window",
]


@dataclass(frozen=True)
class IsiReport:
    """Residual-ISI power with its per-lag breakdown."""

    p_isi: float
    p0: float
    per_lag: tuple  # ((lag, contribution), ...)

    def __post_init__(self):
        if self.p_isi < 0.0:
            raise ValueError("ISI power cannot be negative")
        if not 0.0 < self.p0 <= 1.0 + 1e-12:
            raise ValueError("P0 must lie in (0, 1]")


def snr_single_tap(sigma_p_sq: float, m: int, n0: float) -> float:
    """Decision-point SNR of the single-tap receiver: sigma_p^2 * M / N0."""
    if sigma_p_sq <= 0.0 or m <= 0 or n0 <= 0.0:
        raise ValueError("tap power, antenna count and N0 must be positive")
    return sigma_p_sq * m / n0


def snr_combined(profile: PowerDelayProfile, weights: CombinerWeights, m: int, n0: float) -> float:
    """Post-combining SNR M (sum sigma^2 eta)^2 / (N0 sum sigma^2 eta^2).

    Equal weights on a unit-power profile give the maximum M / N0.
    """
    if m <= 0 or n0 <= 0.0:
        raise ValueError("antenna count and N0 must be positive")
    eta = weights.eta
    if eta.size != profile.tap_count:
        raise ValueError("one weight per tap required")
    num = float(np.dot(profile.powers, eta)) ** 2
    den = float(np.dot(profile.powers, eta**2))
    return m * num / (n0 * den)


def trace_r_squared(geom: ArrayGeometry) -> float:
    """tr(R^2) for the array's antenna correlation matrix.

    Independent mode gives M. For the Jakes line array the Toeplitz
    structure collapses the trace to a single sum over antenna lags.
    """
    m = geom.antenna_count
    if geom.mode == "independent":
        return float(m)
    lags = np.arange(1, m, dtype=float)
    rho = np.array([jakes_correlation(k / (m - 1) * geom.d_over_lambda) for k in lags])
    return float(m + 2.0 * np.dot(rho**2, m - lags))


def p0(geom: ArrayGeometry) -> float:
    """Spatial correlation factor tr(R^2) / M^2 scaling the residual ISI."""
    m = geom.antenna_count
    return trace_r_squared(geom) / (m * m)


def p0_limit(d_over_lambda: float, tol: float = 1e-9) -> float:
    """Large-array limit of P0 at fixed aperture:

    integral over [-1, 1] of rho^2(x D/lambda) (1 - |x|) dx with the Jakes
    kernel; strictly positive for every aperture, so correlation leaves a
    floor that more antennas cannot remove.
    """
    if d_over_lambda < 0.0:
        raise ValueError("d_over_lambda must be nonnegative")
    two_pi_d = 2.0 * math.pi * d_over_lambda

    def integrand(x: float) -> float:
        return bessel_j0(two_pi_d * x) ** 2 * (1.0 - abs(x))

    return integrate(integrand, -1.0, 1.0, tol)


def default_lag_window(profile: PowerDelayProfile, pulse: PulseShape) -> int:
    """Smallest lag window making the ISI sum effectively complete."""
    return int(math.ceil(profile.max_delay / pulse.symbol_period - 1e-12)) + pulse.span


def _pair_response_table(
    profile: PowerDelayProfile, pulse: PulseShape, lags: np.ndarray, on_grid: bool
) -> np.ndarray:
    """g(n T - tau_l + tau_p) for every lag and tap pair: (lags, p, l)."""
    t = pulse.symbol_period
    taps = profile.tap_count
    if on_grid:
        q = pulse.oversampling
        offsets = quantize_delays(profile.delays, pulse.sample_period)
        combined = pulse.combined_taps
        center = (combined.size - 1) // 2
        idx = (
            lags[:, None, None] * q
            - offsets[None, None, :]
            + offsets[None, :, None]
            + center
        )
        valid = (idx >= 0) & (idx < combined.size)
        table = np.zeros(idx.shape)
        table[valid] = combined[idx[valid]]
        return table
    args = (
        lags[:, None, None] * t
        - profile.delays[None, None, :]
        + profile.delays[None, :, None]
    )
    return raised_cosine_grid(args, pulse.rolloff, t)


def impulse_response_window(
    chan: ChannelRealization,
    pulse: PulseShape,
    lag_window: int,
    on_grid: bool = False,
) -> np.ndarray:
    """f[n] for n in [-lag_window, +lag_window] for one channel realization:

    f[n] = (1/M) sum_l sum_p alpha[p]^H alpha[l] g(n T - tau_l + tau_p).
    """
    if lag_window < 0:
        raise ValueError("lag_window must be nonnegative")
    cross = chan.gains.conj().T @ chan.gains / chan.antenna_count  # (p, l)
    lags = np.arange(-lag_window, lag_window + 1)
    table = _pair_response_table(chan.profile, pulse, lags, on_grid)
    return np.tensordot(table, cross, axes=([1, 2], [0, 1]))


def impulse_response(
    chan: ChannelRealization, pulse: PulseShape, n: int, on_grid: bool = False
) -> complex:
    """Overall discrete impulse response at lag n for one realization."""
    return complex(impulse_response_window(chan, pulse, abs(int(n)), on_grid)[abs(int(n)) + int(n)])


def p_isi(
    profile: PowerDelayProfile,
    pulse: PulseShape,
    geom: ArrayGeometry,
    lag_window: int | None = None,
    on_grid: bool = False,
) -> IsiReport:
    """Ensemble-average residual ISI power with per-lag breakdown."""
    if lag_window is None:
        lag_window = default_lag_window(profile, pulse)
    lags = np.concatenate([np.arange(-lag_window, 0), np.arange(1, lag_window + 1)])
    table = _pair_response_table(profile, pulse, lags, on_grid)
    weights = np.outer(profile.powers, profile.powers)
    contributions = np.tensordot(table**2, weights, axes=([1, 2], [0, 1]))
    p0_val = p0(geom)
    contributions = p0_val * contributions
    per_lag = tuple((int(n), float(c)) for n, c in zip(lags, contributions))
    return IsiReport(p_isi=float(contributions.sum()), p0=p0_val, per_lag=per_lag)


def p_isi_integer_delays(
    profile: PowerDelayProfile, p0_val: float, symbol_period: float
) -> float:
    """Residual ISI for integer-symbol tap delays: P0 (1 - sum sigma_l^4).

    Maximized by a uniform profile at P0 * L/(L+1), independent of the
    delays themselves.
    """
    if not 0.0 < p0_val <= 1.0 + 1e-12:
        raise ValueError("P0 must lie in (0, 1]")
    ratio = profile.delays / symbol_period
    if np.any(np.abs(ratio - np.round(ratio)) > 1e-9):
        raise ValueError("profile delays are not integer multiples of the symbol period")
    return p0_val * (1.0 - float(np.sum(profile.powers**2)))
