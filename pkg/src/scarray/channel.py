"""Multipath channel construction: power delay profiles, ULA spatial
correlation, and correlated Rayleigh tap-gain realizations.

Tap gains for tap l form an M-vector alpha[l] with ensemble second moment
sigma_l^2 * R, independent across taps; R is the antenna correlation matrix
(identity for independent channels, a Jakes kernel for a uniform linear
array of fixed aperture).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import Rng, bessel_j0, cholesky_psd

__all__ = [
    "PowerDelayProfile",
    "ArrayGeometry",
    "ChannelRealization",
    "ETU_TAPS_NS_DB",
    "normalize_profile",
    "etu_profile",
    "uniform_profile",
    "jakes_correlation",
    "build_correlation_matrix",
    "draw_channel",
    "sample_cross_correlation",
]

# Extended Typical Urban tap table, (delay ns, mean power dB); 3GPP TS 36.104
# Annex B. Normalized to unit total power on load.
ETU_TAPS_NS_DB = (
    (0.0, -1.0),
    (50.0, -1.0),
    (120.0, -1.0),
    (200.0, 0.0),
    (230.0, 0.0),
    (500.0, 0.0),
    (1600.0, -3.0),
    (2300.0, -5.0),
    (5000.0, -7.0),
)


@dataclass(frozen=True)
class PowerDelayProfile:
    """Tap delays (seconds, strictly increasing) and linear powers summing to 1."""

    delays: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        delays = np.asarray(self.delays, dtype=float)
        powers = np.asarray(self.powers, dtype=float)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "powers", powers)
        if delays.ndim != 1 or delays.size == 0 or delays.shape != powers.shape:
            raise ValueError("profile needs matching, nonempty delay/power vectors")
        if delays[0] < 0.0 or np.any(np.diff(delays) <= 0.0):
            raise ValueError("tap delays must be nonnegative and strictly increasing")
        if np.any(powers <= 0.0):
            raise ValueError("tap powers must be positive")
        if abs(powers.sum() - 1.0) > 1e-12:
            raise ValueError("tap powers must sum to 1 (use normalize_profile)")

    @property
    def tap_count(self) -> int:
        return self.delays.size

    @property
    def max_delay(self) -> float:
        return float(self.delays[-1])


@dataclass(frozen=True)
class ArrayGeometry:
    """Receive-array description: antenna count, normalized aperture D/lambda, mode.

    ``jakes`` mode places the antennas on a line of fixed length D, spacing
    D/(M-1); ``independent`` ignores the aperture entirely.
    """

    antenna_count: int
    d_over_lambda: float = 0.0
    mode: str = "independent"

    def __post_init__(self):
        if self.mode not in ("independent", "jakes"):
            raise ValueError(f"unknown correlation mode {self.mode!r}")
        if self.antenna_count < 1:
            raise ValueError("antenna_count must be >= 1")
        if self.mode == "jakes" and self.antenna_count < 2:
            raise ValueError("jakes mode needs M >= 2 (spacing D/(M-1))")
        if not math.isfinite(self.d_over_lambda) or self.d_over_lambda < 0.0:
            raise ValueError("d_over_lambda must be finite and nonnegative")


@dataclass(frozen=True)
class ChannelRealization:
    """Complex tap gains, one row per antenna and one column per tap."""

    gains: np.ndarray  # (M, L+1) complex
    profile: PowerDelayProfile = field(repr=False)

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex)
        object.__setattr__(self, "gains", gains)
        if gains.ndim != 2:
            raise ValueError("gains must be a 2-D (antennas x taps) array")
        if gains.shape[1] != self.profile.tap_count:
            raise ValueError("gain column count must equal the profile tap count")

    @property
    def antenna_count(self) -> int:
        return self.gains.shape[0]

    @property
    def tap_count(self) -> int:
        return self.gains.shape[1]


def normalize_profile(raw) -> PowerDelayProfile:
    """Build a profile from (delay seconds, power dB) pairs.

    Powers are converted to linear scale and normalized to unit total power.
    """
    raw = list(raw)
    if not raw:
        raise ValueError("profile table is empty")
    delays = np.array([d for d, _ in raw], dtype=float)
    powers_db = np.array([p for _, p in raw], dtype=float)
    powers = 10.0 ** (powers_db / 10.0)
    powers /= powers.sum()
    return PowerDelayProfile(delays=delays, powers=powers)


def etu_profile() -> PowerDelayProfile:
    """The 9-tap Extended Typical Urban profile, 5 us delay spread."""
    return normalize_profile([(ns * 1e-9, db) for ns, db in ETU_TAPS_NS_DB])


def uniform_profile(tap_count: int, symbol_period: float) -> PowerDelayProfile:
    """Equal-power taps at integer symbol delays 0, T, ..., (tap_count-1) T."""
    if tap_count < 1:
        raise ValueError("tap_count must be >= 1")
    delays = np.arange(tap_count, dtype=float) * symbol_period
    powers = np.full(tap_count, 1.0 / tap_count)
    return PowerDelayProfile(delays=delays, powers=powers)


def jakes_correlation(d_over_lambda: float) -> float:
    """Inter-antenna correlation J0(2 pi d/lambda) for a uniform azimuth spectrum."""
    return bessel_j0(2.0 * math.pi * d_over_lambda)


def build_correlation_matrix(geom: ArrayGeometry) -> np.ndarray:
    """M x M antenna correlation matrix for the given geometry.

    Independent mode yields the identity; Jakes mode fills entry (m, m0)
    with rho((m - m0)/(M - 1) * D/lambda).
    """
    m = geom.antenna_count
    if geom.mode == "independent":
        return np.eye(m)
    lags = np.arange(m, dtype=float) / (m - 1) * geom.d_over_lambda
    rho = np.array([jakes_correlation(x) for x in lags])
    idx = np.abs(np.arange(m)[:, None] - np.arange(m)[None, :])
    return rho[idx]


def draw_channel(profile: PowerDelayProfile, geom: ArrayGeometry, rng: Rng) -> ChannelRealization:
    """Draw one correlated Rayleigh realization.

    Column l is sigma_l * G @ w_l with G the Cholesky factor of the antenna
    correlation matrix and w_l i.i.d. CN(0, 1), independent across taps.
    """
    m = geom.antenna_count
    taps = profile.tap_count
    w = rng.cn((m, taps))
    if geom.mode != "independent":
        g = cholesky_psd(build_correlation_matrix(geom))
        w = g @ w
    gains = w * np.sqrt(profile.powers)[None, :]
    return ChannelRealization(gains=gains, profile=profile)


def sample_cross_correlation(chan: ChannelRealization, l: int, p: int) -> complex:
    """(1/M) alpha[p]^H alpha[l]; converges to sigma_l^2 delta[l-p] as M grows."""
    taps = chan.tap_count
    if not (0 <= l < taps and 0 <= p < taps):
        raise IndexError(f"tap index out of range: l={l}, p={p}, taps={taps}")
    alpha_l = chan.gains[:, l]
    alpha_p = chan.gains[:, p]
    return complex(np.vdot(alpha_p, alpha_l) / chan.antenna_count)
