"""Experiment reports: deterministic aggregates, delimited output, JSON.

Aggregates are pure functions of the per-sample tables computed with exact
(fsum) accumulation and a fixed quantile rule, so a report is bit-reproducible
from (config, master_seed) regardless of worker count, and `verify_report`
can recompute every aggregate from the stored rows and demand exact equality.
Floats are serialized with shortest round-trip repr in both CSV and JSON;
timestamps live in a separate metadata file so payloads stay byte-identical
across reruns.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import ndtr

SCHEMA_VERSION = 1


class ReportError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Fixed-order statistics
# ---------------------------------------------------------------------------

def exact_mean(values: Sequence[float]) -> float:
    if not len(values):
        raise ValueError("mean of empty sequence")
    return math.fsum(values) / len(values)


def exact_variance(values: Sequence[float]) -> float:
    """Unbiased sample variance with exact accumulation."""
    n = len(values)
    if n < 2:
        raise ValueError("variance needs at least two values")
    mu = exact_mean(values)
    return math.fsum((v - mu) ** 2 for v in values) / (n - 1)


def quantile(values: Sequence[float], q: float) -> float:
    """Sorted linear-interpolation quantile (numpy 'linear' rule)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"quantile level {q} outside [0, 1]")
    vals = sorted(float(v) for v in values)
    if not vals:
        raise ValueError("quantile of empty sequence")
    h = (len(vals) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(vals) - 1)
    return vals[lo] + (h - lo) * (vals[hi] - vals[lo])


def median(values: Sequence[float]) -> float:
    return quantile(values, 0.5)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("pearson needs two equal-length sequences, n >= 2")
    mx, my = exact_mean(xs), exact_mean(ys)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    return sxy / math.sqrt(sxx * syy)


def fit_line(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept with exact accumulation."""
    n = len(xs)
    mx, my = exact_mean(xs), exact_mean(ys)
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return slope, my - slope * mx


def _std_normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def ks_distance_fitted_normal(values: Sequence[float]) -> float:
    """KS distance to the Gaussian with matched empirical mean and variance."""
    vals = sorted(float(v) for v in values)
    n = len(vals)
    if n < 3:
        raise ValueError("KS statistic needs n >= 3")
    mu = exact_mean(vals)
    sd = math.sqrt(exact_variance(vals))
    if sd == 0.0:
        return 1.0
    d = 0.0
    for i, v in enumerate(vals):
        cdf = _std_normal_cdf((v - mu) / sd)
        d = max(d, (i + 1) / n - cdf, cdf - i / n)
    return d


def ks_bootstrap_pvalue(d_obs: float, n: int, rng: np.random.Generator,
                        resamples: int = 10_000) -> float:
    """Parametric-bootstrap p-value for the fitted-normal (composite) KS test."""
    draws = rng.standard_normal((resamples, n))
    draws.sort(axis=1)
    mu = draws.mean(axis=1, keepdims=True)
    sd = draws.std(axis=1, ddof=1, keepdims=True)
    grid = (np.arange(1, n + 1) / n, np.arange(0, n) / n)
    cdf = ndtr((draws - mu) / sd)
    d_null = np.maximum((grid[0] - cdf).max(axis=1), (cdf - grid[1]).max(axis=1))
    return float((np.count_nonzero(d_null >= d_obs) + 1) / (resamples + 1))


def ks_two_sample(xs: Sequence[float], ys: Sequence[float]) -> float:
    xs = sorted(float(v) for v in xs)
    ys = sorted(float(v) for v in ys)
    i = j = 0
    d = 0.0
    while i < len(xs) and j < len(ys):
        if xs[i] <= ys[j]:
            i += 1
        else:
            j += 1
        d = max(d, abs(i / len(xs) - j / len(ys)))
    return d


def ks_two_sample_pvalue(d: float, n: int, m: int) -> float:
    """Asymptotic two-sample KS p-value (Kolmogorov tail series)."""
    lam = d * math.sqrt(n * m / (n + m))
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
    return min(1.0, max(0.0, 2.0 * total))


# ---------------------------------------------------------------------------
# Report container
# ---------------------------------------------------------------------------

@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]]

    def column(self, name: str) -> list[float]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    tables: dict[str, Table]            # keyed by str(N) or a section name
    aggregates: dict
    contract: dict
    config_hash: str = ""
    plotdata: dict[str, Table] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.config_hash:
            self.config_hash = config_digest(self.config)

    @property
    def passed(self) -> bool:
        return bool(self.contract.get("pass", True))


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))  # force builtin repr (numpy scalars subclass float)
    return str(value)


def write_table_csv(path: Path, table: Table) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema_version", SCHEMA_VERSION])
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_fmt(v) for v in row])


def read_table_csv(path: Path) -> Table:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[0] != "schema_version":
            raise ReportError(f"{path}: missing schema_version row")
        if int(header[1]) != SCHEMA_VERSION:
            raise ReportError(f"{path}: schema_version {header[1]} unsupported")
        columns = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    return Table(columns=columns, rows=rows)


def write_report(outdir: Path, report: ExperimentReport) -> list[Path]:
    """Emit per-section CSVs, per-section report JSON slices, and a summary."""
    outdir = Path(outdir)
    written: list[Path] = []
    for key, table in report.tables.items():
        p = outdir / f"{report.kind}_samples_{key}.csv"
        write_table_csv(p, table)
        written.append(p)
    for key, table in report.plotdata.items():
        p = outdir / f"{report.kind}_plotdata_{key}.csv"
        write_table_csv(p, table)
        written.append(p)
    per_section = report.aggregates.get("per_N", {})
    for key in report.tables:
        p = outdir / f"{report.kind}_report_{key}.json"
        payload = {
            "kind": report.kind,
            "section": key,
            "config": report.config,
            "config_hash": report.config_hash,
            "aggregates": per_section.get(key, {}),
        }
        _write_json(p, payload)
        written.append(p)
    summary = outdir / f"{report.kind}_summary.json"
    _write_json(summary, {
        "kind": report.kind,
        "config": report.config,
        "config_hash": report.config_hash,
        "aggregates": report.aggregates,
        "contract": report.contract,
    })
    written.append(summary)
    return written


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_report(outdir: Path, kind: str) -> ExperimentReport:
    outdir = Path(outdir)
    summary = json.loads((outdir / f"{kind}_summary.json").read_text())
    tables = {}
    for p in sorted(outdir.glob(f"{kind}_samples_*.csv")):
        key = p.stem.replace(f"{kind}_samples_", "", 1)
        tables[key] = read_table_csv(p)
    plotdata = {}
    for p in sorted(outdir.glob(f"{kind}_plotdata_*.csv")):
        key = p.stem.replace(f"{kind}_plotdata_", "", 1)
        plotdata[key] = read_table_csv(p)
    return ExperimentReport(
        kind=kind,
        config=summary["config"],
        tables=tables,
        aggregates=summary["aggregates"],
        contract=summary["contract"],
        config_hash=summary["config_hash"],
        plotdata=plotdata,
    )


def verify_report(report: ExperimentReport, recompute) -> None:
    """Recompute aggregates from the stored rows; exact mismatch is an error."""
    fresh = recompute(report.tables, report.config)
    if not _deep_equal(fresh, report.aggregates):
        raise ReportError("stored aggregates do not match recomputation from per-sample rows")


def _deep_equal(a, b) -> bool:
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_deep_equal(a[k], b[k]) for k in a)
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_deep_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, float) and isinstance(b, float):
        return (math.isnan(a) and math.isnan(b)) or a == b
    return a == b
