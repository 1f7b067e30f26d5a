"""Command-line front end.

Subcommands: ser-vs-snr, ser-vs-length, ser-vs-antennas, isi-validate, and
analyze (closed-form tables only, no simulation). Flags override config
file values. Exit codes: 0 success, 1 config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from . import analysis, report
from .channel import ArrayGeometry
from .config import make_config, parse_axis, parse_config_file, parse_int_axis
from .experiments import (
    ConfigError,
    build_geometry,
    build_profile,
    run_isi_validation,
    run_ser_experiment,
)
from .waveform import PulseShape

__all__ = ["main", "cli_main"]

_SER_COMMANDS = ("ser-vs-snr", "ser-vs-length", "ser-vs-antennas")


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit code 2; we want 1 for config errors."""

    def error(self, message):
        raise ConfigError(message)


def _add_common_options(sub: argparse.ArgumentParser, with_seed: bool = True) -> None:
    sub.add_argument("--config", help="flat key = value config file")
    if with_seed:
        sub.add_argument("--seed", help="64-bit master seed (mandatory, here or in the config)")
    sub.add_argument("--out", help="CSV output path (a .png figure lands next to it)")
    sub.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    sub.add_argument("--m", help="antenna count (comma list to sweep where applicable)")
    sub.add_argument(
        "--d-over-lambda",
        help="array aperture D/lambda; comma list to sweep; 'independent' for uncorrelated antennas",
    )
    sub.add_argument("--independent", action="store_true", help="shorthand for --d-over-lambda independent")
    sub.add_argument("--snr-db", help="Es/N0 in dB (comma list to sweep; 'inf' disables noise)")
    sub.add_argument("--profile", help="etu | uniform-<taps> | inline delay_ns:power_db,...")
    sub.add_argument("--beta", type=float, help="root-raised-cosine rolloff")
    sub.add_argument("--t", type=float, help="symbol period in seconds")
    sub.add_argument("--q", type=int, help="oversampling factor")
    sub.add_argument("--span", type=int, help="one-sided filter span in symbols")
    sub.add_argument("--symbols-per-trial", type=int, help="symbols per Monte Carlo trial")
    sub.add_argument("--trials", type=int, help="Monte Carlo trials per point")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scarray", description=__doc__)
    subs = parser.add_subparsers(dest="command")
    for name, text in (
        ("ser-vs-snr", "SER sweep over Es/N0"),
        ("ser-vs-length", "SER sweep over the array aperture D/lambda"),
        ("ser-vs-antennas", "SER sweep over the antenna count"),
        ("isi-validate", "empirical vs closed-form residual ISI power"),
    ):
        sub = subs.add_parser(name, help=text, description=text)
        _add_common_options(sub)
    sub = subs.add_parser(
        "analyze",
        help="closed-form P0 and ISI tables, no simulation",
        description="Print P0 and the residual-ISI breakdown for a profile and geometry.",
    )
    _add_common_options(sub, with_seed=False)
    sub.add_argument("--lag-window", type=int, help="symbol lags to include in the ISI sum")
    return parser


def _raw_values(args) -> dict[str, str]:
    raw: dict[str, str] = {}
    if args.config:
        raw.update(parse_config_file(args.config))
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    overrides = {
        "m": args.m,
        "d_over_lambda": args.d_over_lambda,
        "snr_db": args.snr_db,
        "profile": args.profile,
        "beta": args.beta,
        "t": args.t,
        "q": args.q,
        "span": args.span,
        "symbols_per_trial": args.symbols_per_trial,
        "trials": args.trials,
        "output_path": args.out,
    }
    if args.independent:
        overrides["d_over_lambda"] = "independent"
    raw.update({k: str(v) for k, v in overrides.items() if v is not None})
    return raw


def _run_ser(args) -> int:
    cfg = make_config(args.command, _raw_values(args))
    points = run_ser_experiment(cfg)
    print(f"# {cfg.experiment}  seed={cfg.seed}  trials={cfg.trials} x {cfg.symbols_per_trial} symbols")
    print(f"{'x':>12}  {'ser':>12}  {'errors':>8}  {'symbols':>9}  {'ci95':>10}")
    for p in points:
        flag = "" if p.reliable else "  (unreliable: <20 errors)"
        print(f"{p.x:>12g}  {p.ser:>12.6g}  {p.errors:>8d}  {p.symbols:>9d}  {p.ci95_halfwidth:>10.3g}{flag}")
    if cfg.output_path:
        report.emit_csv(points, cfg.output_path)
        print(f"wrote {cfg.output_path}")
        if not args.no_plot:
            fig = report.figure_path(cfg.output_path)
            report.render_ser_figure(points, fig, cfg.experiment)
            print(f"wrote {fig}")
    return 0


def _run_isi(args) -> int:
    cfg = make_config("isi-validate", _raw_values(args))
    result = run_isi_validation(cfg)
    print(f"# isi-validate  seed={cfg.seed}  profile={result.profile}  lag_window={result.lag_window}")
    print(f"{'m':>6}  {'empirical':>12}  {'closed form':>12}  {'rel error':>10}  {'spread':>10}")
    for row in result.rows:
        print(
            f"{row.m:>6d}  {row.p_isi_empirical:>12.6g}  {row.p_isi_closed_form:>12.6g}"
            f"  {row.rel_error:>10.3%}  {row.empirical_std:>10.3g}"
        )
    if cfg.output_path:
        report.emit_isi_csv(result, cfg.output_path)
        print(f"wrote {cfg.output_path}")
        if not args.no_plot:
            fig = report.figure_path(cfg.output_path)
            report.render_isi_figure(result, fig)
            print(f"wrote {fig}")
    return 0


def _run_analyze(args) -> int:
    raw = _raw_values(args)
    profile_spec = raw.get("profile", "etu")
    t = float(raw.get("t", 0.2e-6))
    beta = float(raw.get("beta", 0.25))
    q = int(raw.get("q", 2))
    span = int(raw.get("span", 16))
    m_value = parse_int_axis(raw.get("m", "100"))
    if isinstance(m_value, tuple):
        raise ConfigError("analyze takes a single antenna count")
    dol = parse_axis(raw.get("d_over_lambda", "independent"), allow_independent=True)
    if isinstance(dol, tuple):
        raise ConfigError("analyze takes a single aperture")

    profile = build_profile(profile_spec, t)
    pulse = PulseShape(rolloff=beta, symbol_period=t, span=span, oversampling=q)
    geom = build_geometry(m_value, dol)
    window = args.lag_window or analysis.default_lag_window(profile, pulse)

    exact = analysis.p_isi(profile, pulse, geom, window)
    on_grid = analysis.p_isi(profile, pulse, geom, window, on_grid=True)
    mode = "independent" if geom.mode == "independent" else f"jakes, D/lambda={geom.d_over_lambda:g}"
    print(f"profile: {profile_spec} ({profile.tap_count} taps, max delay {profile.max_delay*1e9:g} ns)")
    print(f"geometry: M={geom.antenna_count}, {mode}")
    print(f"P0 = {exact.p0!r}")
    if geom.mode == "jakes":
        print(f"P0 large-array limit = {analysis.p0_limit(geom.d_over_lambda)!r}")
    print(f"P_ISI (exact delays)  = {exact.p_isi!r}")
    print(f"P_ISI (Q-grid delays) = {on_grid.p_isi!r}")
    ratio = profile.delays / t
    if ((ratio - ratio.round()) == 0.0).all():
        closed = analysis.p_isi_integer_delays(profile, exact.p0, t)
        print(f"P_ISI integer-delay form = {closed!r}")
    print(f"per-lag contributions (exact delays, window {window}):")
    print(f"{'n':>6}  {'contribution':>14}")
    for lag, value in exact.per_lag:
        if value > 1e-18:
            print(f"{lag:>6d}  {value:>14.6g}")
    out = raw.get("output_path")
    if out:
        report.emit_lag_csv(exact, out)
        print(f"wrote {out}")
        if not args.no_plot:
            fig = report.figure_path(out)
            report.render_lag_figure(exact, fig)
            print(f"wrote {fig}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.command in _SER_COMMANDS:
            return _run_ser(args)
        if args.command == "isi-validate":
            return _run_isi(args)
        return _run_analyze(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


# The spec-facing name for the CLI entry point.
cli_main = main


if __name__ == "__main__":
    sys.exit(main())
