"""Monte Carlo harness: edge rigidity, local law at the shifted edge,
fluctuation decomposition, the stability diagnostic, and a descriptive
GOE comparison.

Each sample is owned end-to-end by one worker (draw -> corrections -> model ->
spectrum -> statistics); rows are merged in sample-index order and aggregates
use exact accumulation, so reports are bit-identical for any worker count.
Samples whose corrections fall outside the perturbative window are counted as
degenerate; a run fails once they exceed 1% of M.

Contract thresholds are pinned defaults (documented in the README), echoed
into every report, and overridable through the config for exploratory runs.
"""

from __future__ import annotations

import concurrent.futures
import math
from typing import Sequence

import numpy as np

from . import scm, spectral
from .corrections import compute_Z
from .ensemble import EnsembleSpec, sample
from .report import (ExperimentReport, Table, exact_mean, exact_variance,
                     ks_bootstrap_pvalue, ks_distance_fitted_normal,
                     ks_two_sample, median, pearson, quantile)

DEGENERATE_BUDGET = 0.01

# Pilot-pinned contract defaults.
RIGIDITY_S_RATIO_BRACKET = (0.5, 2.0)
RIGIDITY_U_GROWTH_MIN = 1.05
LOCALLAW_EDGE_QUANTILE_MAX = 10.0
LOCALLAW_TREND_RATIO_MAX = 1.5
STABILITY_C_STAB = 10.0
STABILITY_MIN_LAMBDA = 1e-12


class ExperimentError(RuntimeError):
    pass


class InsufficientSamplesError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

def _spec_echo(spec: EnsembleSpec) -> dict:
    return {"N": spec.N, "b": spec.b, "family": spec.family, "scale": spec.scale,
            "master_seed": spec.master_seed, "c_min": spec.c_min}


def _pool_map(fn, argses: list, workers: int) -> list:
    if workers <= 1:
        return [fn(a) for a in argses]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(argses) // (workers * 4))
        return list(pool.map(fn, argses, chunksize=chunk))


def _sample_model(spec: EnsembleSpec, index: int, ell: int, zero_corrections: bool):
    """Draw one sample, its corrections, and the model (None when degenerate)."""
    smp = sample(spec, index)
    cs = compute_Z(smp, ell=ell)
    if zero_corrections:
        from .corrections import CorrectionSet
        cs = CorrectionSet(ell=2, Z=(1.0, 0.0), X=0.0)
    try:
        model = scm.build(cs)
    except scm.DegenerateModelError:
        model = None
    return smp, cs, model


def _degenerate_guard(kind: str, n_bad: int, M: int) -> None:
    if n_bad > DEGENERATE_BUDGET * M:
        raise ExperimentError(
            f"{kind}: {n_bad}/{M} samples degenerate (> {DEGENERATE_BUDGET:.0%} budget)")


def _as_specs(specs: Sequence[EnsembleSpec] | EnsembleSpec) -> list[EnsembleSpec]:
    if isinstance(specs, EnsembleSpec):
        return [specs]
    out = sorted(specs, key=lambda sp: sp.N)
    if not out:
        raise ValueError("need at least one ensemble spec")
    return out


def _trend_ratios(values: list[float]) -> list[float]:
    return [b / a for a, b in zip(values, values[1:]) if a > 0]


def _growth_per_doubling(n_lo: int, n_hi: int, ratio: float) -> float:
    return ratio ** (1.0 / math.log2(n_hi / n_lo))


# ---------------------------------------------------------------------------
# Edge rigidity
# ---------------------------------------------------------------------------

def _rigidity_worker(args) -> list[float]:
    spec, index, k, ell, zero_corrections = args
    smp, cs, model = _sample_model(spec, index, ell, zero_corrections)
    lams = spectral.extremal_eigenvalues(smp, k)
    scale = float(spec.N) ** (2.0 / 3.0)
    row = [float(index), float(smp.seed), cs.Z[0], cs.Z[1] if cs.ell >= 2 else 0.0, cs.X]
    if model is None:
        row += [math.nan] * 4 + [1.0]
        row += [float(v) for v in lams]
        row += [math.nan] * k
        row += [float(scale * abs(v - 2.0)) for v in lams]
        return row
    row += [model.tau, model.edge_root, model.edge_series,
            abs(model.edge_root - model.edge_series), 0.0]
    row += [float(v) for v in lams]
    row += [float(scale * abs(v - model.edge_series)) for v in lams]
    row += [float(scale * abs(v - 2.0)) for v in lams]
    return row


def _rigidity_columns(k: int) -> list[str]:
    cols = ["index", "seed", "Z1", "Z2", "X", "tau", "L_root", "L_series",
            "edge_gap", "degenerate"]
    cols += [f"lam{i}" for i in range(1, k + 1)]
    cols += [f"S{i}" for i in range(1, k + 1)]
    cols += [f"U{i}" for i in range(1, k + 1)]
    return cols


def rigidity_run(specs: Sequence[EnsembleSpec] | EnsembleSpec, M: int, k: int = 1,
                 ell: int = 2, workers: int = 1, zero_corrections: bool = False,
                 contract_overrides: dict | None = None) -> ExperimentReport:
    """Per-sample statistics S_i = N^(2/3)|lam_i - L_series| and the
    uncorrected U_i = N^(2/3)|lam_i - 2|, with cross-size trend contracts."""
    specs = _as_specs(specs)
    if M < 50:
        raise InsufficientSamplesError(f"rigidity needs M >= 50, got {M}")
    if not 1 <= k <= 5:
        raise ValueError(f"rigidity supports k in 1..5, got {k}")
    config = _run_config("rigidity", specs, M, workers, k=k, ell=ell,
                         zero_corrections=zero_corrections,
                         s_ratio_lo=RIGIDITY_S_RATIO_BRACKET[0],
                         s_ratio_hi=RIGIDITY_S_RATIO_BRACKET[1],
                         u_growth_min=RIGIDITY_U_GROWTH_MIN,
                         overrides=contract_overrides)
    tables: dict[str, Table] = {}
    for spec in specs:
        rows = _pool_map(_rigidity_worker,
                         [(spec, i, k, ell, zero_corrections) for i in range(M)], workers)
        n_bad = sum(1 for r in rows if r[9] == 1.0)
        _degenerate_guard("rigidity", n_bad, M)
        tables[f"N{spec.N}"] = Table(columns=_rigidity_columns(k), rows=rows)
    aggregates = _rigidity_aggregates(tables, config)
    contract = _rigidity_contract(aggregates, config)
    return ExperimentReport(kind="rigidity", config=config, tables=tables,
                            aggregates=aggregates, contract=contract,
                            plotdata=_histogram_plotdata(tables, ("S1", "U1")))


def _rigidity_aggregates(tables: dict[str, Table], config: dict) -> dict:
    k = int(config["k"])
    per_n: dict[str, dict] = {}
    for key in sorted(tables, key=lambda s: int(s[1:])):
        t = tables[key]
        ok = [row for row in t.rows if row[t.columns.index("degenerate")] == 0.0]
        entry: dict = {"degenerate": len(t.rows) - len(ok)}
        for i in range(1, k + 1):
            s_vals = [row[t.columns.index(f"S{i}")] for row in ok]
            u_vals = [row[t.columns.index(f"U{i}")] for row in t.rows]
            entry[f"S{i}_median"] = median(s_vals)
            entry[f"S{i}_q90"] = quantile(s_vals, 0.9)
            entry[f"U{i}_median"] = median(u_vals)
            entry[f"U{i}_q90"] = quantile(u_vals, 0.9)
        entry["L_series_mean"] = exact_mean([row[t.columns.index("L_series")] for row in ok])
        entry["edge_gap_max"] = max(row[t.columns.index("edge_gap")] for row in ok)
        per_n[key] = entry
    n_values = sorted(int(key[1:]) for key in tables)
    s_meds = [per_n[f"N{n}"]["S1_median"] for n in n_values]
    u_meds = [per_n[f"N{n}"]["U1_median"] for n in n_values]
    trend = {
        "N_values": n_values,
        "S1_median_ratios": _trend_ratios(s_meds),
        "U1_median_ratios": _trend_ratios(u_meds),
        "U1_growth_per_doubling": [
            _growth_per_doubling(a, b, r)
            for (a, b), r in zip(zip(n_values, n_values[1:]), _trend_ratios(u_meds))],
    }
    return {"per_N": per_n, "trend": trend}


def _rigidity_contract(aggregates: dict, config: dict) -> dict:
    lo, hi = config["s_ratio_lo"], config["s_ratio_hi"]
    gmin = config["u_growth_min"]
    checks = []
    trend = aggregates["trend"]
    if len(trend["N_values"]) >= 2:
        for r in trend["S1_median_ratios"]:
            checks.append({"name": "S1_median_ratio_bracket", "value": r,
                           "bound": [lo, hi], "ok": lo <= r <= hi})
        for g in trend["U1_growth_per_doubling"]:
            checks.append({"name": "U1_growth_per_doubling", "value": g,
                           "bound": gmin, "ok": g >= gmin})
    return {"pass": all(c["ok"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# Local law and stability diagnostic
# ---------------------------------------------------------------------------

def default_local_law_grid(N: int) -> list[tuple[float, float]]:
    """(E, eta) pairs: eta log-spaced on [N^-0.95, 1], E in {0, +-N^-2/3,
    +-0.04, +-0.5}, plus the scaled edge point (N^-2/3, N^-2/3)."""
    n23 = float(N) ** (-2.0 / 3.0)
    etas = np.logspace(-0.95 * math.log10(N), 0.0, 8)
    es = [0.0, n23, -n23, 0.04, -0.04, 0.5, -0.5]
    grid = [(float(E), float(eta)) for eta in etas for E in es]
    grid.append((n23, n23))
    return grid


def _locallaw_worker(args) -> list[list[float]]:
    spec, index, ell, grid = args
    smp, cs, model = _sample_model(spec, index, ell, False)
    N = spec.N
    n23 = float(N) ** (-2.0 / 3.0)
    if model is None:
        return [[float(index), E, eta] + [math.nan] * 7 + [1.0, 1.0]
                for E, eta in grid]
    spectrum = spectral.eigen(smp)
    rows = []
    for E, eta in grid:
        zt = complex(model.edge_series + E, eta)
        m_emp = complex(spectral.empirical_stieltjes(spectrum, zt))
        m_mod = scm.stieltjes(model, zt).w
        lam = float(abs(m_emp - m_mod))
        rhs = scm.local_law_rhs(model, zt, N)
        kappa = model.kappa_of(zt)
        phi = scm.control_phi(model, zt)
        abs_p = float(abs(model.P(zt, m_emp)))
        stab = lam / math.sqrt(abs_p) if lam >= STABILITY_MIN_LAMBDA else math.nan
        edge = 1.0 if (E == n23 and eta == n23) else 0.0
        rows.append([float(index), E, eta, kappa, phi, lam, rhs, lam / rhs,
                     abs_p, stab, edge, 0.0])
    return rows


_LOCALLAW_COLUMNS = ["index", "E", "eta", "kappa", "phi", "Lam", "rhs", "ratio",
                     "absP", "stab_ratio", "edge", "degenerate"]


def _locallaw_engine(kind: str, specs, M: int, grid, ell: int, workers: int,
                     contract_overrides: dict | None) -> ExperimentReport:
    specs = _as_specs(specs)
    if M < 50:
        raise InsufficientSamplesError(f"{kind} needs M >= 50, got {M}")
    grids = {spec.N: (grid if grid is not None else default_local_law_grid(spec.N))
             for spec in specs}
    config = _run_config(kind, specs, M, workers, ell=ell,
                         grid={str(n): [[e, h] for e, h in g] for n, g in grids.items()},
                         edge_quantile_max=LOCALLAW_EDGE_QUANTILE_MAX,
                         trend_ratio_max=LOCALLAW_TREND_RATIO_MAX,
                         c_stab=STABILITY_C_STAB,
                         overrides=contract_overrides)
    tables: dict[str, Table] = {}
    for spec in specs:
        chunks = _pool_map(_locallaw_worker,
                           [(spec, i, ell, grids[spec.N]) for i in range(M)], workers)
        rows = [row for chunk in chunks for row in chunk]
        n_bad = sum(1 for chunk in chunks if chunk[0][-1] == 1.0)
        _degenerate_guard(kind, n_bad, M)
        tables[f"N{spec.N}"] = Table(columns=list(_LOCALLAW_COLUMNS), rows=rows)
    aggregates = _locallaw_aggregates(tables, config)
    if kind == "stability":
        contract = _stability_contract(aggregates, config)
    else:
        contract = _locallaw_contract(aggregates, config)
    return ExperimentReport(kind=kind, config=config, tables=tables,
                            aggregates=aggregates, contract=contract,
                            plotdata=_histogram_plotdata(tables, ("ratio", "stab_ratio")))


def local_law_run(specs: Sequence[EnsembleSpec] | EnsembleSpec, M: int,
                  grid: list[tuple[float, float]] | None = None, ell: int = 2,
                  workers: int = 1, contract_overrides: dict | None = None) -> ExperimentReport:
    """Lambda = |m - m_model| at z = L_series + E + i eta against the
    deterministic envelope, per sample and grid point."""
    return _locallaw_engine("locallaw", specs, M, grid, ell, workers, contract_overrides)


def stability_check(specs: Sequence[EnsembleSpec] | EnsembleSpec, M: int,
                    grid: list[tuple[float, float]] | None = None, ell: int = 2,
                    workers: int = 1, contract_overrides: dict | None = None) -> ExperimentReport:
    """0.99-quantile of Lambda / sqrt|P(z, m)| on the eta >= N^-2/3 grid."""
    return _locallaw_engine("stability", specs, M, grid, ell, workers, contract_overrides)


def _locallaw_aggregates(tables: dict[str, Table], config: dict) -> dict:
    per_n: dict[str, dict] = {}
    for key in sorted(tables, key=lambda s: int(s[1:])):
        t = tables[key]
        N = int(key[1:])
        n13 = float(N) ** (1.0 / 3.0)
        n23 = float(N) ** (-2.0 / 3.0)
        cols = t.columns
        ok_rows = [r for r in t.rows if r[cols.index("degenerate")] == 0.0]
        edge_rows = [r for r in ok_rows if r[cols.index("edge")] == 1.0]
        entry: dict = {
            "degenerate": (len(t.rows) - len(ok_rows)) // max(1, _rows_per_sample(t)),
            "ratio_q99": quantile([r[cols.index("ratio")] for r in ok_rows], 0.99),
        }
        if edge_rows:
            lam_scaled = [n13 * r[cols.index("Lam")] for r in edge_rows]
            entry["edge_scaled_Lam_q99"] = quantile(lam_scaled, 0.99)
            entry["edge_ratio_median"] = median([r[cols.index("ratio")] for r in edge_rows])
        stab_vals = [r[cols.index("stab_ratio")] for r in ok_rows
                     if r[cols.index("eta")] >= n23 * (1.0 - 1e-12)
                     and not math.isnan(r[cols.index("stab_ratio")])]
        if stab_vals:
            entry["stab_q99"] = quantile(stab_vals, 0.99)
        per_n[key] = entry
    n_values = sorted(int(key[1:]) for key in tables)
    trend = {"N_values": n_values}
    q99s = [per_n[f"N{n}"]["ratio_q99"] for n in n_values]
    trend["ratio_q99_ratios"] = _trend_ratios(q99s)
    meds = [per_n[f"N{n}"].get("edge_ratio_median") for n in n_values]
    if all(v is not None for v in meds):
        trend["edge_ratio_median_ratios"] = _trend_ratios(meds)  # diagnostic only
    return {"per_N": per_n, "trend": trend}


def _rows_per_sample(t: Table) -> int:
    idx = t.columns.index("index")
    first = t.rows[0][idx]
    return sum(1 for r in t.rows if r[idx] == first)


def _locallaw_contract(aggregates: dict, config: dict) -> dict:
    cap = config["edge_quantile_max"]
    tmax = config["trend_ratio_max"]
    checks = []
    for key, entry in aggregates["per_N"].items():
        if "edge_scaled_Lam_q99" in entry:
            v = entry["edge_scaled_Lam_q99"]
            checks.append({"name": f"edge_scaled_Lam_q99[{key}]", "value": v,
                           "bound": cap, "ok": v <= cap})
    for r in aggregates["trend"].get("ratio_q99_ratios", []):
        checks.append({"name": "ratio_q99_trend", "value": r,
                       "bound": tmax, "ok": r <= tmax})
    return {"pass": all(c["ok"] for c in checks), "checks": checks}


def _stability_contract(aggregates: dict, config: dict) -> dict:
    cap = config["c_stab"]
    checks = []
    for key, entry in aggregates["per_N"].items():
        if "stab_q99" in entry:
            v = entry["stab_q99"]
            checks.append({"name": f"stab_q99[{key}]", "value": v,
                           "bound": cap, "ok": v <= cap})
    return {"pass": all(c["ok"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# Fluctuation decomposition
# ---------------------------------------------------------------------------

def _fluct_worker(args) -> list[float]:
    spec, index, ell = args
    smp, cs, model = _sample_model(spec, index, ell, False)
    lam1 = float(spectral.extremal_eigenvalues(smp, 1)[0])
    scale = float(spec.N) ** (2.0 / 3.0)
    row = [float(index), float(smp.seed), lam1, cs.Z[0],
           cs.Z[1] if cs.ell >= 2 else 0.0, cs.X]
    if model is None:
        return row + [math.nan, math.nan, scale * (lam1 - 2.0), math.nan,
                      scale * cs.X, 1.0]
    return row + [model.edge_root, model.edge_series, scale * (lam1 - 2.0),
                  scale * (lam1 - model.edge_series), scale * cs.X, 0.0]


_FLUCT_COLUMNS = ["index", "seed", "lam1", "Z1", "Z2", "X", "L_root", "L_series",
                  "stat_unc", "stat_cor", "stat_X", "degenerate"]


def fluctuation_run(spec: EnsembleSpec, M: int, ell: int = 2, workers: int = 1,
                    contract_overrides: dict | None = None) -> ExperimentReport:
    """Triple (N^(2/3)(lam1 - 2), N^(2/3)(lam1 - L_series), N^(2/3) X) per
    sample; correlation, fitted-normal KS statistics, and the variance ratio
    before/after correcting by the sample's own edge."""
    if M < 500:
        raise InsufficientSamplesError(f"fluctuation run needs M >= 500, got {M}")
    config = _run_config("fluct", [spec], M, workers, ell=ell,
                         corr_floor=None, corr_cap=None, var_ratio_max=None,
                         ks_resamples=10_000, overrides=contract_overrides)
    rows = _pool_map(_fluct_worker, [(spec, i, ell) for i in range(M)], workers)
    n_bad = sum(1 for r in rows if r[-1] == 1.0)
    _degenerate_guard("fluct", n_bad, M)
    tables = {f"N{spec.N}": Table(columns=list(_FLUCT_COLUMNS), rows=rows)}
    aggregates = _fluct_aggregates(tables, config)
    contract = _fluct_contract(aggregates, config)
    return ExperimentReport(kind="fluct", config=config, tables=tables,
                            aggregates=aggregates, contract=contract,
                            plotdata=_histogram_plotdata(tables, ("stat_unc", "stat_cor", "stat_X")))


def _fluct_aggregates(tables: dict[str, Table], config: dict) -> dict:
    (key, t), = tables.items()
    cols = t.columns
    ok = [r for r in t.rows if r[cols.index("degenerate")] == 0.0]
    unc = [r[cols.index("stat_unc")] for r in ok]
    cor = [r[cols.index("stat_cor")] for r in ok]
    xst = [r[cols.index("stat_X")] for r in ok]
    rng = np.random.default_rng((int(config["master_seed"]), 0x4B53))
    resamples = int(config["ks_resamples"])
    ks = {}
    for name, vals in (("stat_unc", unc), ("stat_cor", cor), ("stat_X", xst)):
        d = ks_distance_fitted_normal(vals)
        ks[name] = {"D": d, "p": ks_bootstrap_pvalue(d, len(vals), rng, resamples)}
    var_unc = exact_variance(unc)
    var_cor = exact_variance(cor)
    entry = {
        "degenerate": len(t.rows) - len(ok),
        "corr_unc_X": pearson(unc, xst),
        "var_unc": var_unc,
        "var_cor": var_cor,
        "var_ratio": var_cor / var_unc,
        "mean_unc": exact_mean(unc),
        "mean_cor": exact_mean(cor),
        "ks": ks,
    }
    return {"per_N": {key: entry}}


def _fluct_contract(aggregates: dict, config: dict) -> dict:
    (entry,) = aggregates["per_N"].values()
    checks = []
    if config["corr_floor"] is not None:
        v = entry["corr_unc_X"]
        checks.append({"name": "corr_floor", "value": v,
                       "bound": config["corr_floor"], "ok": v >= config["corr_floor"]})
    if config["corr_cap"] is not None:
        v = entry["corr_unc_X"]
        checks.append({"name": "corr_cap", "value": v,
                       "bound": config["corr_cap"], "ok": v <= config["corr_cap"]})
    if config["var_ratio_max"] is not None:
        v = entry["var_ratio"]
        checks.append({"name": "var_ratio_max", "value": v,
                       "bound": config["var_ratio_max"], "ok": v <= config["var_ratio_max"]})
    return {"pass": all(c["ok"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# GOE comparison (exploratory, no acceptance weight)
# ---------------------------------------------------------------------------

def _goe_entries(N: int, master_seed: int, index: int) -> np.ndarray:
    rng = np.random.default_rng((master_seed, index, 0x60E))
    A = rng.standard_normal((N, N))
    return (A + A.T) / math.sqrt(2.0 * N)


def _goe_worker(args) -> list[float]:
    spec, index, self_test = args
    N = spec.N
    scale = float(N) ** (2.0 / 3.0)
    if self_test:
        # reference stream vs an independent GOE stream: same law by construction
        alt = _goe_entries(N, spec.master_seed + 1, index)
        stat_sparse = scale * (float(spectral.top_eigenvalues(alt, 1)[0]) - 2.0)
    else:
        smp, cs, model = _sample_model(spec, index, 2, False)
        lam1 = float(spectral.extremal_eigenvalues(smp, 1)[0])
        center = model.edge_series if model is not None else math.nan
        stat_sparse = scale * (lam1 - center)
    goe_lam = float(spectral.top_eigenvalues(_goe_entries(N, spec.master_seed, index), 1)[0])
    return [float(index), stat_sparse, scale * (goe_lam - 2.0)]


def goe_compare_run(spec: EnsembleSpec, M: int, workers: int = 1,
                    self_test: bool = False) -> ExperimentReport:
    """Two-sample KS distance between N^(2/3)(lam1 - L_series) and the GOE
    statistic N^(2/3)(mu1 - 2).  Descriptive only: no pass/fail contract."""
    if M < 500:
        raise InsufficientSamplesError(f"GOE comparison needs M >= 500, got {M}")
    config = _run_config("goe", [spec], M, workers, self_test=self_test)
    rows = _pool_map(_goe_worker, [(spec, i, self_test) for i in range(M)], workers)
    rows = [r for r in rows if not math.isnan(r[1])]
    tables = {f"N{spec.N}": Table(columns=["index", "stat_sparse", "stat_goe"], rows=rows)}
    aggregates = _goe_aggregates(tables, config)
    return ExperimentReport(kind="goe", config=config, tables=tables,
                            aggregates=aggregates, contract={"pass": True, "checks": []},
                            plotdata=_histogram_plotdata(tables, ("stat_sparse", "stat_goe")))


def _goe_aggregates(tables: dict[str, Table], config: dict) -> dict:
    (key, t), = tables.items()
    sparse = t.column("stat_sparse")
    goe = t.column("stat_goe")
    m = len(sparse)
    return {"per_N": {key: {
        "ks_two_sample": ks_two_sample(sparse, goe),
        "sampling_scale_95": 1.36 * math.sqrt(2.0 / m),
        "sparse_median": median(sparse),
        "goe_median": median(goe),
    }}}


# ---------------------------------------------------------------------------
# Config echo and plot data
# ---------------------------------------------------------------------------

def _run_config(kind: str, specs: list[EnsembleSpec], M: int, workers: int,
                overrides: dict | None = None, **extra) -> dict:
    base = _spec_echo(specs[0])
    base["N"] = [sp.N for sp in specs]
    config = {"command": kind, "M": M, "workers": workers, **base, **extra}
    for key, val in (overrides or {}).items():
        if key not in config:
            raise ValueError(f"unknown contract override {key!r}")
        config[key] = val
    return config


def _histogram_plotdata(tables: dict[str, Table], stat_columns: tuple[str, ...],
                        bins: int = 40) -> dict[str, Table]:
    out: dict[str, Table] = {}
    for key, t in tables.items():
        cols = ["bin_lo", "bin_hi"]
        series = []
        for name in stat_columns:
            if name not in t.columns:
                continue
            vals = [v for v in t.column(name) if not math.isnan(v)]
            if vals:
                cols.append(f"count_{name}")
                series.append((name, vals))
        if not series:
            continue
        lo = min(min(v) for _, v in series)
        hi = max(max(v) for _, v in series)
        if not hi > lo:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
        rows = []
        for i in range(bins):
            row = [float(edges[i]), float(edges[i + 1])]
            for _, vals in series:
                arr = np.asarray(vals)
                upper = arr <= edges[i + 1] if i == bins - 1 else arr < edges[i + 1]
                row.append(float(np.count_nonzero((arr >= edges[i]) & upper)))
            rows.append(row)
        out[key] = Table(columns=cols, rows=rows)
    return out
