"""Flat key = value config files for experiment runs.

One assignment per line, ``#`` starts a comment, keys match the
ExperimentConfig field names. Sweep axes take comma-separated lists;
``independent`` (or ``inf``) stands for spatially independent channels.
"""

from __future__ import annotations

import math

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig

__all__ = ["parse_config_file", "parse_axis", "parse_int_axis", "make_config"]

_CONFIG_KEYS = {
    "experiment",
    "m",
    "d_over_lambda",
    "snr_db",
    "profile",
    "beta",
    "t",
    "q",
    "span",
    "symbols_per_trial",
    "trials",
    "seed",
    "output_path",
}


def parse_config_file(path: str) -> dict[str, str]:
    """Read raw key/value strings; unknown keys are config errors."""
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
                key, value = (part.strip() for part in line.split("=", 1))
                if key not in _CONFIG_KEYS:
                    raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
                values[key] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return values


def _parse_float_token(token: str, allow_independent: bool) -> float:
    token = token.strip()
    if allow_independent and token.lower() in ("independent", "inf"):
        return math.inf
    if token.lower() == "inf":
        return math.inf
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"expected a number, got {token!r}") from None


def parse_axis(text: str, allow_independent: bool = False) -> float | tuple[float, ...]:
    """A float or a comma-separated sweep list of floats."""
    tokens = [t for t in str(text).split(",") if t.strip()]
    if not tokens:
        raise ConfigError(f"empty value {text!r}")
    values = tuple(_parse_float_token(t, allow_independent) for t in tokens)
    return values[0] if len(values) == 1 else values


def parse_int_axis(text: str) -> int | tuple[int, ...]:
    """An int or a comma-separated sweep list of ints."""
    value = parse_axis(text)
    if isinstance(value, tuple):
        return tuple(_as_int(v) for v in value)
    return _as_int(value)


def _as_int(value: float) -> int:
    if not math.isfinite(value) or value != int(value):
        raise ConfigError(f"expected an integer, got {value!r}")
    return int(value)


def make_config(experiment: str, raw: dict[str, str]) -> ExperimentConfig:
    """Build a validated config from raw string values (config file plus
    CLI overrides already merged, overrides winning)."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    stated = raw.get("experiment")
    if stated is not None and stated != experiment:
        raise ConfigError(
            f"config file says experiment = {stated!r} but {experiment!r} was requested"
        )
    if "seed" not in raw:
        raise ConfigError("seed is mandatory (no wall-clock seeding)")
    kwargs: dict = {"experiment": experiment}
    try:
        kwargs["seed"] = int(str(raw["seed"]), 0)
    except ValueError:
        raise ConfigError(f"bad seed {raw['seed']!r}") from None
    if "m" in raw:
        kwargs["m"] = parse_int_axis(raw["m"])
    if "d_over_lambda" in raw:
        kwargs["d_over_lambda"] = parse_axis(raw["d_over_lambda"], allow_independent=True)
    if "snr_db" in raw:
        kwargs["snr_db"] = parse_axis(raw["snr_db"])
    if "profile" in raw:
        kwargs["profile"] = str(raw["profile"]).strip()
    for key, conv in (("beta", float), ("t", float)):
        if key in raw:
            try:
                kwargs[key] = conv(raw[key])
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw[key]!r}") from None
    for key in ("q", "span", "symbols_per_trial", "trials"):
        if key in raw:
            try:
                kwargs[key] = int(str(raw[key]))
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw[key]!r}") from None
    if raw.get("output_path"):
        kwargs["output_path"] = str(raw["output_path"])
    return ExperimentConfig(**kwargs)
