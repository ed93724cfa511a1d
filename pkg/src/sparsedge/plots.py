"""Figure rendering for experiment reports.

Figures are derived from the same plot-data tables that land in the CSVs, so
a rendered PNG never shows anything the delimited output does not contain.
Uses the Agg backend; safe without a display.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .report import ExperimentReport, Table  # noqa: E402

_DPI = 130


def render_report_figures(report: ExperimentReport, outdir: Path) -> list[Path]:
    outdir = Path(outdir)
    written: list[Path] = []
    for key, table in report.plotdata.items():
        if table.columns[:2] == ["bin_lo", "bin_hi"]:
            written.append(_histogram_figure(report.kind, key, table, outdir))
        else:
            written.append(_curve_figure(report.kind, key, table, outdir))
    trend_fig = _trend_figure(report, outdir)
    if trend_fig is not None:
        written.append(trend_fig)
    return written


def _histogram_figure(kind: str, key: str, table: Table, outdir: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    lo = table.column("bin_lo")
    hi = table.column("bin_hi")
    centers = [0.5 * (a + b) for a, b in zip(lo, hi)]
    width = (hi[0] - lo[0]) if hi else 1.0
    n_series = len(table.columns) - 2
    for j, name in enumerate(table.columns[2:]):
        counts = table.column(name)
        offset = (j - 0.5 * (n_series - 1)) * width / max(1, n_series)
        ax.bar([c + offset for c in centers], counts, width=width / max(1, n_series),
               label=name.replace("count_", ""), alpha=0.75)
    ax.set_xlabel("statistic")
    ax.set_ylabel("count")
    ax.set_title(f"{kind} {key}")
    ax.legend(fontsize=8)
    path = outdir / f"{kind}_fig_{key}.png"
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def _curve_figure(kind: str, key: str, table: Table, outdir: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    xs = table.column(table.columns[0])
    for name in table.columns[1:]:
        ax.plot(xs, table.column(name), label=name, lw=1.2)
    ax.set_xlabel(table.columns[0])
    ax.set_title(f"{kind} {key}")
    ax.legend(fontsize=8)
    path = outdir / f"{kind}_fig_{key}.png"
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def _trend_figure(report: ExperimentReport, outdir: Path) -> Path | None:
    trend = report.aggregates.get("trend") or {}
    n_values = trend.get("N_values")
    if not n_values or len(n_values) < 2:
        return None
    per_n = report.aggregates.get("per_N", {})
    series = {}
    for stat in ("S1_median", "U1_median", "edge_ratio_median"):
        vals = [per_n.get(f"N{n}", {}).get(stat) for n in n_values]
        if all(v is not None for v in vals):
            series[stat] = vals
    if not series:
        return None
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    for name, vals in series.items():
        ax.plot(n_values, vals, "o-", label=name)
    ax.set_xscale("log")
    if all(v > 0 for vals in series.values() for v in vals):
        ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_title(f"{report.kind} size trend")
    ax.legend(fontsize=8)
    path = outdir / f"{report.kind}_fig_trend.png"
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_density_figure(xs, rho, outdir: Path, name: str = "density") -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.plot(xs, rho, lw=1.4)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title("eta-regularized spectral density")
    path = Path(outdir) / f"{name}_fig.png"
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_scaling_figure(n_values, spreads, exponent: float, outdir: Path,
                          name: str = "corrections") -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.loglog(n_values, spreads, "o-", label="spread")
    x0, s0 = n_values[0], spreads[0]
    ax.loglog(n_values, [s0 * (n / x0) ** exponent for n in n_values], "--",
              label=f"fit slope {exponent:.3f}")
    ax.set_xlabel("N")
    ax.set_ylabel("robust spread")
    ax.legend(fontsize=8)
    path = Path(outdir) / f"{name}_fig_scaling.png"
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path
