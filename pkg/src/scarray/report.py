"""Result serialization: deterministic CSV files plus rendered figures.

CSV is the data contract (byte-identical for identical runs); the figures
are a convenience rendered next to each CSV with the same basename.
"""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .analysis import IsiReport
from .experiments import IsiValidationReport, SerPoint

__all__ = [
    "emit_csv",
    "emit_isi_csv",
    "emit_lag_csv",
    "figure_path",
    "render_ser_figure",
    "render_isi_figure",
    "render_lag_figure",
]

_SER_AXIS_LABELS = {
    "ser-vs-snr": "Es/N0 (dB)",
    "ser-vs-length": "aperture D/lambda",
    "ser-vs-antennas": "antennas M",
}


def _write_rows(path, header: str, rows) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path!r}: {exc}") from exc


def emit_csv(points: list[SerPoint], path) -> None:
    """SER sweep rows; floats use the shortest round-trip representation."""
    _write_rows(
        path,
        "x,ser,errors,symbols,ci95",
        ((p.x, p.ser, p.errors, p.symbols, p.ci95_halfwidth) for p in points),
    )


def emit_isi_csv(report: IsiValidationReport, path) -> None:
    _write_rows(
        path,
        "m,p_isi_empirical,p_isi_closed,rel_error,empirical_std,trials",
        (
            (r.m, r.p_isi_empirical, r.p_isi_closed_form, r.rel_error, r.empirical_std, r.trials)
            for r in report.rows
        ),
    )


def emit_lag_csv(report: IsiReport, path) -> None:
    _write_rows(path, "lag,contribution", report.per_lag)


def figure_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".png")


def render_ser_figure(points: list[SerPoint], path, experiment: str) -> None:
    xs = [p.x for p in points]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(
        xs,
        [p.ser for p in points],
        yerr=[p.ci95_halfwidth for p in points],
        marker="o",
        capsize=3,
    )
    ax.set_yscale("log")
    ax.set_xlabel(_SER_AXIS_LABELS.get(experiment, "swept value"))
    ax.set_ylabel("SER")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_isi_figure(report: IsiValidationReport, path) -> None:
    ms = [r.m for r in report.rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ms, [r.p_isi_closed_form for r in report.rows], "s-", label="closed form")
    ax.errorbar(
        ms,
        [r.p_isi_empirical for r in report.rows],
        yerr=[r.empirical_std / max(r.trials, 1) ** 0.5 for r in report.rows],
        fmt="o",
        capsize=3,
        label="measured",
    )
    if len(ms) > 1:
        ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("antennas M")
    ax.set_ylabel("residual ISI power")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_lag_figure(report: IsiReport, path) -> None:
    lags = [n for n, _ in report.per_lag]
    contribs = [c for _, c in report.per_lag]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.stem(lags, contribs)
    ax.set_xlabel("symbol lag n")
    ax.set_ylabel("ISI contribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
