"""Seeded Monte Carlo experiments: symbol-error-rate sweeps and the
closed-form-versus-empirical residual-ISI validation.

Every random quantity is derived from (seed, trial index, purpose), never
from the swept axis, so sweep points are paired: rerunning a sweep with the
same seed reuses the same symbols, noise, and channel variates at every
point, and results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .channel import (
    ArrayGeometry,
    PowerDelayProfile,
    draw_channel,
    etu_profile,
    normalize_profile,
    uniform_profile,
)
from .numerics import Rng
from .receiver import optimal_weights, receive
from .waveform import PulseShape, SymbolStream, propagate, random_qpsk, shape

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SerPoint",
    "IsiValidationRow",
    "IsiValidationReport",
    "EXPERIMENTS",
    "INDEPENDENT",
    "build_profile",
    "build_geometry",
    "noise_density",
    "run_ser_experiment",
    "run_isi_validation",
]

EXPERIMENTS = ("ser-vs-snr", "ser-vs-length", "ser-vs-antennas", "isi-validate")

# Sentinel aperture for spatially independent channels (the infinite-spacing
# limit of the Jakes kernel).
INDEPENDENT = math.inf

# Derivation purposes for per-trial substreams.
_CHANNEL, _SYMBOLS, _NOISE = 0, 1, 2


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 1)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run. Exactly one axis may be a sweep list.

    ``d_over_lambda`` equal to ``math.inf`` means spatially independent
    channels. ``snr_db`` is E_s/N0 per antenna per symbol; ``math.inf``
    disables noise.
    """

    experiment: str
    seed: int
    m: int | tuple[int, ...] = 100
    d_over_lambda: float | tuple[float, ...] = INDEPENDENT
    snr_db: float | tuple[float, ...] = 0.0
    profile: str = "etu"
    beta: float = 0.25
    t: float = 0.2e-6
    q: int = 2
    span: int = 16
    symbols_per_trial: int = 1000
    trials: int = 100
    output_path: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.seed is None:
            raise ConfigError("seed is mandatory (no wall-clock seeding)")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        for name in ("q", "span", "symbols_per_trial", "trials"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError("beta must lie in [0, 1]")
        if self.t <= 0.0:
            raise ConfigError("t (symbol period) must be positive")
        swept = {
            "ser-vs-snr": "snr_db",
            "ser-vs-length": "d_over_lambda",
            "ser-vs-antennas": "m",
            "isi-validate": "m",
        }[self.experiment]
        for name in ("m", "d_over_lambda", "snr_db"):
            value = getattr(self, name)
            if isinstance(value, tuple):
                if name != swept:
                    raise ConfigError(
                        f"{name} must be a single value for {self.experiment} "
                        f"(only {swept} may be swept)"
                    )
                if len(value) == 0:
                    raise ConfigError(f"{name} sweep list is empty")

    def sweep_values(self) -> tuple:
        axis = {
            "ser-vs-snr": self.snr_db,
            "ser-vs-length": self.d_over_lambda,
            "ser-vs-antennas": self.m,
            "isi-validate": self.m,
        }[self.experiment]
        return axis if isinstance(axis, tuple) else (axis,)

    def pulse(self) -> PulseShape:
        return PulseShape(
            rolloff=self.beta, symbol_period=self.t, span=int(self.span), oversampling=int(self.q)
        )


@dataclass(frozen=True)
class SerPoint:
    """One point of a symbol-error-rate sweep."""

    x: float
    ser: float
    errors: int
    symbols: int
    ci95_halfwidth: float

    @property
    def reliable(self) -> bool:
        """Fewer than 20 observed errors makes the estimate untrustworthy."""
        return self.errors >= 20


@dataclass(frozen=True)
class IsiValidationRow:
    m: int
    trials: int
    p_isi_empirical: float
    p_isi_closed_form: float
    rel_error: float
    empirical_std: float  # per-realization spread; reported, not asserted


@dataclass(frozen=True)
class IsiValidationReport:
    rows: tuple[IsiValidationRow, ...]
    lag_window: int
    profile: str


def build_profile(spec: str, symbol_period: float) -> PowerDelayProfile:
    """Resolve a profile name: 'etu', 'uniform-<taps>', or an inline
    comma-separated list of delay_ns:power_db pairs."""
    spec = spec.strip()
    if spec == "etu":
        return etu_profile()
    if spec.startswith("uniform-"):
        try:
            taps = int(spec.split("-", 1)[1])
        except ValueError:
            raise ConfigError(f"bad uniform profile spec {spec!r}") from None
        if taps < 1:
            raise ConfigError("uniform profile needs at least one tap")
        return uniform_profile(taps, symbol_period)
    if ":" in spec:
        pairs = []
        for item in spec.split(","):
            try:
                delay_ns, power_db = item.split(":")
                pairs.append((float(delay_ns) * 1e-9, float(power_db)))
            except ValueError:
                raise ConfigError(f"bad inline profile entry {item!r}") from None
        try:
            return normalize_profile(pairs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown profile {spec!r}")


def build_geometry(m: int, d_over_lambda: float) -> ArrayGeometry:
    if math.isinf(d_over_lambda):
        return ArrayGeometry(int(m), mode="independent")
    return ArrayGeometry(int(m), float(d_over_lambda), mode="jakes")


def noise_density(snr_db: float) -> float:
    """N0 for unit symbol energy: 10^(-snr_db/10); an infinite SNR means no noise."""
    if math.isinf(snr_db):
        if snr_db < 0:
            raise ConfigError("snr_db = -inf is not a meaningful operating point")
        return 0.0
    return 10.0 ** (-snr_db / 10.0)


def _guard_symbols(profile: PowerDelayProfile, pulse: PulseShape) -> int:
    """Zero-symbol padding so edge symbols see the full pulse and all delays."""
    return pulse.span + int(math.ceil(profile.max_delay / pulse.symbol_period - 1e-12))


def _count_symbol_errors(decided: np.ndarray, sent: np.ndarray) -> int:
    real_flip = np.signbit(decided.real) != np.signbit(sent.real)
    imag_flip = np.signbit(decided.imag) != np.signbit(sent.imag)
    return int(np.count_nonzero(real_flip | imag_flip))


def _ser_point(
    x: float,
    profile: PowerDelayProfile,
    pulse: PulseShape,
    geom: ArrayGeometry,
    n0: float,
    symbols_per_trial: int,
    trials: int,
    master: Rng,
) -> SerPoint:
    weights = optimal_weights(profile)
    pad = _guard_symbols(profile, pulse)
    errors = 0
    for trial in range(trials):
        trial_rng = master.derive(trial)
        chan = draw_channel(profile, geom, trial_rng.derive(_CHANNEL))
        sym = random_qpsk(trial_rng.derive(_SYMBOLS), symbols_per_trial)
        tx = shape(sym, pulse, "transmit", pad_symbols=pad)
        x_rx = propagate(tx, chan, pulse, n0, trial_rng.derive(_NOISE))
        record = receive(x_rx, chan, weights, symbols_per_trial, pulse.symbol_period)
        errors += _count_symbol_errors(record.decided.symbols, sym.symbols)
    total = symbols_per_trial * trials
    ser = errors / total
    ci95 = 1.96 * math.sqrt(ser * (1.0 - ser) / total)
    return SerPoint(x=x, ser=ser, errors=errors, symbols=total, ci95_halfwidth=ci95)


def run_ser_experiment(cfg: ExperimentConfig) -> list[SerPoint]:
    """Run one SER sweep; returns one point per swept value."""
    if cfg.experiment == "isi-validate":
        raise ConfigError("isi-validate is not a SER experiment")
    profile = build_profile(cfg.profile, cfg.t)
    pulse = cfg.pulse()
    master = Rng(cfg.seed)
    points = []
    for value in cfg.sweep_values():
        m = int(value) if cfg.experiment == "ser-vs-antennas" else int(cfg.m)
        dol = float(value) if cfg.experiment == "ser-vs-length" else float(cfg.d_over_lambda)
        snr = float(value) if cfg.experiment == "ser-vs-snr" else float(cfg.snr_db)
        points.append(
            _ser_point(
                x=float(value),
                profile=profile,
                pulse=pulse,
                geom=build_geometry(m, dol),
                n0=noise_density(snr),
                symbols_per_trial=int(cfg.symbols_per_trial),
                trials=int(cfg.trials),
                master=master,
            )
        )
    return points


def measure_isi_power(
    profile: PowerDelayProfile,
    pulse: PulseShape,
    geom: ArrayGeometry,
    trials: int,
    master: Rng,
    lag_window: int | None = None,
) -> tuple[float, float]:
    """Empirical residual-ISI power: mean and std over channel realizations
    of sum_{n != 0} |f^hat[n]|^2, with f^hat measured by driving the actual
    receiver chain with a unit-symbol probe (no noise)."""
    if lag_window is None:
        lag_window = analysis.default_lag_window(profile, pulse)
    weights = optimal_weights(profile)
    probe = np.zeros(2 * lag_window + 1, dtype=complex)
    probe[lag_window] = 1.0
    pad = _guard_symbols(profile, pulse)
    tx = shape(SymbolStream(probe), pulse, "transmit", pad_symbols=pad)
    powers = np.empty(trials)
    for trial in range(trials):
        trial_rng = master.derive(trial)
        chan = draw_channel(profile, geom, trial_rng.derive(_CHANNEL))
        x_rx = propagate(tx, chan, pulse, 0.0, trial_rng.derive(_NOISE))
        record = receive(x_rx, chan, weights, probe.size, pulse.symbol_period)
        f_hat = record.soft
        powers[trial] = np.sum(np.abs(f_hat) ** 2) - abs(f_hat[lag_window]) ** 2
    return float(powers.mean()), float(powers.std())


def run_isi_validation(cfg: ExperimentConfig) -> IsiValidationReport:
    """Compare the empirical ISI power against the closed form on the same
    quantized-delay grid, one row per antenna count."""
    if cfg.experiment != "isi-validate":
        raise ConfigError(f"expected an isi-validate config, got {cfg.experiment!r}")
    profile = build_profile(cfg.profile, cfg.t)
    pulse = cfg.pulse()
    lag_window = analysis.default_lag_window(profile, pulse)
    master = Rng(cfg.seed)
    rows = []
    for value in cfg.sweep_values():
        geom = build_geometry(int(value), float(cfg.d_over_lambda))
        closed = analysis.p_isi(profile, pulse, geom, lag_window, on_grid=True).p_isi
        empirical, spread = measure_isi_power(
            profile, pulse, geom, int(cfg.trials), master, lag_window
        )
        rel = abs(empirical - closed) / closed if closed > 0.0 else abs(empirical)
        rows.append(
            IsiValidationRow(
                m=int(value),
                trials=int(cfg.trials),
                p_isi_empirical=empirical,
                p_isi_closed_form=closed,
                rel_error=rel,
                empirical_std=spread,
            )
        )
    return IsiValidationReport(rows=tuple(rows), lag_window=lag_window, profile=cfg.profile)
