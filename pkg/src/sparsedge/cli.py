"""Command-line front end: plain-text config, experiment dispatch, artifacts.

Config files are one ``key = value`` per line with ``#`` comments and
comma-separated lists; every key can also be given as a ``--key value`` flag,
which overrides the file.  Unknown keys are a hard error with the offending
line named.  All defaults are resolved up front and echoed into the outputs,
so reports are self-describing.

Exit codes: 0 pass, 1 error, 2 contract violation (reserved for contract
violations only, never for crashes).  Timestamps go to a separate metadata
file so re-running an identical config produces byte-identical payloads.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
import traceback
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import experiments, plots, scm
from .corrections import CorrectionSet, compute_Z, read_coefficient_table, scaling_study
from .ensemble import (DEFAULT_SCALE, SIGNED_SPARSE, EnsembleSpec, sample,
                       write_sample_binary)
from .report import SCHEMA_VERSION, ExperimentReport, Table
from .spectral import eigen

COMMANDS = ("sample", "spectrum", "corrections", "model", "density",
            "rigidity", "locallaw", "fluct", "stability", "goe")

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_CONTRACT_FAIL = 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    N: list[int] = field(default_factory=lambda: [1000])
    b: float = 0.2
    family: str = SIGNED_SPARSE
    scale: float = DEFAULT_SCALE
    master_seed: int = 1
    c_min: float = 0.5
    M: int = 200
    k: int = 1
    ell: int = 2
    workers: int = 1
    out: str = "."
    plots: bool = True
    eta_floor: float = 1e-6
    Z: list[float] = field(default_factory=lambda: [1.0, 0.0])
    x_min: float = -3.0
    x_max: float = 3.0
    x_count: int = 601
    zero_corrections: bool = False
    coeff_table: str = ""
    self_test: bool = False
    # contract overrides; None means "use the pinned default / not enforced"
    s_ratio_lo: float | None = None
    s_ratio_hi: float | None = None
    u_growth_min: float | None = None
    edge_quantile_max: float | None = None
    trend_ratio_max: float | None = None
    c_stab: float | None = None
    corr_floor: float | None = None
    corr_cap: float | None = None
    var_ratio_max: float | None = None
    exp_tol: float = 0.15


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "on", "yes"):
        return True
    if low in ("0", "false", "off", "no"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int_list(text: str) -> list[int]:
    return [int(v.strip()) for v in text.split(",") if v.strip()]


def _parse_float_list(text: str) -> list[float]:
    return [float(v.strip()) for v in text.split(",") if v.strip()]


_PARSERS = {
    "command": str,
    "N": _parse_int_list,
    "b": float,
    "family": str,
    "scale": float,
    "master_seed": int,
    "c_min": float,
    "M": int,
    "k": int,
    "ell": int,
    "workers": int,
    "out": str,
    "plots": _parse_bool,
    "eta_floor": float,
    "Z": _parse_float_list,
    "x_min": float,
    "x_max": float,
    "x_count": int,
    "zero_corrections": _parse_bool,
    "coeff_table": str,
    "self_test": _parse_bool,
    "s_ratio_lo": float,
    "s_ratio_hi": float,
    "u_growth_min": float,
    "edge_quantile_max": float,
    "trend_ratio_max": float,
    "c_stab": float,
    "corr_floor": float,
    "corr_cap": float,
    "var_ratio_max": float,
    "exp_tol": float,
}


def parse_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Parse and validate a config document; errors name line and key.

    ``overrides`` (flag values, already stripped) replace file values.
    """
    config = RunConfig()
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            setattr(config, key, _PARSERS[key](value))
        except ValueError as err:
            raise ConfigError(f"line {lineno}: key {key!r}: {err}") from None
    for key, value in (overrides or {}).items():
        if key not in _PARSERS:
            raise ConfigError(f"override: unknown key {key!r}")
        try:
            setattr(config, key, _PARSERS[key](value))
        except ValueError as err:
            raise ConfigError(f"override: key {key!r}: {err}") from None
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    if config.command not in COMMANDS:
        raise ConfigError(f"key 'command': {config.command!r} not one of {COMMANDS}")
    if not 0.0 < config.b < 0.5:
        raise ConfigError(f"key 'b': {config.b!r} outside the open interval (0, 0.5) "
                          "required of the sparsity exponent")
    for n in config.N:
        if n < 1:
            raise ConfigError(f"key 'N': {n} must be >= 1")
    if config.M < 1:
        raise ConfigError(f"key 'M': {config.M} must be >= 1")
    if not 1 <= config.k <= 5:
        raise ConfigError(f"key 'k': {config.k} must be in 1..5")
    if config.ell < 1:
        raise ConfigError(f"key 'ell': {config.ell} must be >= 1")
    if config.workers < 1:
        raise ConfigError(f"key 'workers': {config.workers} must be >= 1")
    if config.x_count < 2:
        raise ConfigError(f"key 'x_count': {config.x_count} must be >= 2")
    if not config.Z:
        raise ConfigError("key 'Z': needs at least one value")
    if config.command in ("fluct", "goe") and len(config.N) != 1:
        raise ConfigError(f"key 'N': command {config.command!r} takes exactly one N value")


def _specs(config: RunConfig) -> list[EnsembleSpec]:
    return [EnsembleSpec(N=n, b=config.b, family=config.family, scale=config.scale,
                         master_seed=config.master_seed, c_min=config.c_min)
            for n in sorted(config.N)]


def _overrides(config: RunConfig, keys: tuple[str, ...]) -> dict:
    out = {}
    for key in keys:
        val = getattr(config, key)
        if val is not None:
            out[key] = val
    return out


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------

def _cmd_sample(config: RunConfig, outdir: Path) -> tuple[ExperimentReport, list[Path]]:
    rows_by_n: dict[str, Table] = {}
    extra: list[Path] = []
    for spec in _specs(config):
        rows = []
        for i in range(config.M):
            smp = sample(spec, i)
            path = outdir / f"sample_N{spec.N}_{i:05d}.bin"
            write_sample_binary(path, smp)
            extra.append(path)
            H = smp.entries
            rows.append([float(i), float(smp.seed), float(H.mean()),
                         float((H * H).mean()), float(abs(H).max())])
        rows_by_n[f"N{spec.N}"] = Table(
            columns=["index", "seed", "entry_mean", "entry_second_moment", "entry_max"],
            rows=rows)
    report = ExperimentReport(kind="sample", config=_echo(config), tables=rows_by_n,
                              aggregates={"per_N": {}}, contract={"pass": True, "checks": []})
    return report, extra


def _cmd_spectrum(config: RunConfig, outdir: Path) -> tuple[ExperimentReport, list[Path]]:
    tables: dict[str, Table] = {}
    for spec in _specs(config):
        rows = []
        for i in range(config.M):
            spectrum = eigen(sample(spec, i))
            rows.extend([float(i), float(rank + 1), float(lam)]
                        for rank, lam in enumerate(spectrum.eigenvalues))
        tables[f"N{spec.N}"] = Table(columns=["index", "rank", "eigenvalue"], rows=rows)
    report = ExperimentReport(kind="spectrum", config=_echo(config), tables=tables,
                              aggregates={"per_N": {}}, contract={"pass": True, "checks": []})
    return report, []


def _cmd_corrections(config: RunConfig, outdir: Path) -> tuple[ExperimentReport, list[Path]]:
    tables_arg = read_coefficient_table(config.coeff_table) if config.coeff_table else None
    tables: dict[str, Table] = {}
    specs = _specs(config)
    for spec in specs:
        rows = []
        for i in range(config.M):
            cs = compute_Z(sample(spec, i), ell=config.ell, tables=tables_arg)
            rows.append([float(i)] + list(cs.Z) + [cs.X])
        cols = ["index"] + [f"Z{n}" for n in range(1, config.ell + 1)] + ["X"]
        tables[f"N{spec.N}"] = Table(columns=cols, rows=rows)
    aggregates: dict = {"per_N": {}}
    checks = []
    if len(specs) >= 2 and config.M >= 50:
        study = scaling_study(specs, n=min(config.ell, 2) if config.ell >= 2 else 1,
                              M=config.M)
        aggregates["scaling"] = {
            "n": study.n,
            "N_values": list(study.N_values),
            "spreads_std": list(study.spreads_std),
            "spreads_mad": list(study.spreads_mad),
            "spreads_X": list(study.spreads_X),
            "exponent_N": study.exponent_N,
            "exponent_N_robust": study.exponent_N_robust,
            "exponent_q": study.exponent_q,
            "ci_N": list(study.ci_N),
            "x_ratio_empirical": study.x_ratio_empirical,
            "x_ratio_predicted": study.x_ratio_predicted,
        }
        target = -(0.5 + config.b)
        if study.n == 1:
            checks.append({"name": "X_exponent_window", "value": study.exponent_N,
                           "bound": [target - config.exp_tol, target + config.exp_tol],
                           "ok": abs(study.exponent_N - target) <= config.exp_tol})
        else:
            checks.append({"name": "Z2_q_exponent", "value": study.exponent_q,
                           "bound": -0.5, "ok": study.exponent_q <= -0.5})
    report = ExperimentReport(kind="corrections", config=_echo(config), tables=tables,
                              aggregates=aggregates,
                              contract={"pass": all(c["ok"] for c in checks), "checks": checks})
    extra: list[Path] = []
    if "scaling" in aggregates and config.plots:
        extra.append(plots.render_scaling_figure(
            aggregates["scaling"]["N_values"], aggregates["scaling"]["spreads_X"],
            aggregates["scaling"]["exponent_N"], outdir))
    return report, extra


def _model_from_config(config: RunConfig) -> scm.SelfConsistentModel:
    Z = tuple(config.Z)
    return scm.build(CorrectionSet(ell=len(Z), Z=Z, X=Z[0] - 1.0))


def _cmd_model(config: RunConfig, outdir: Path) -> tuple[ExperimentReport, list[Path]]:
    model = _model_from_config(config)
    aggregates = {"per_N": {}, "model": {
        "Z": list(model.Z), "tau": model.tau, "L_root": model.edge_root,
        "L_series": model.edge_series, "eps0": model.eps0, "eps1": model.eps1,
        "edge_gap": abs(model.edge_root - model.edge_series),
    }}
    report = ExperimentReport(kind="model", config=_echo(config), tables={},
                              aggregates=aggregates, contract={"pass": True, "checks": []})
    return report, []


def _cmd_density(config: RunConfig, outdir: Path) -> tuple[ExperimentReport, list[Path]]:
    model = _model_from_config(config)
    N_ref = config.N[0]
    xs = [config.x_min + i * (config.x_max - config.x_min) / (config.x_count - 1)
          for i in range(config.x_count)]
    rows = []
    for x in xs:
        z = complex(x, config.eta_floor)
        point = scm.stieltjes(model, z)
        rows.append([x, config.eta_floor, point.w.real, point.w.imag,
                     point.w.imag / math.pi, scm.control_phi(model, z),
                     scm.local_law_rhs(model, z, N_ref)])
    table = Table(columns=["x", "Im_z", "Re_m", "Im_m", "rho", "phi", "local_law_rhs"],
                  rows=rows)
    report = ExperimentReport(kind="density", config=_echo(config),
                              tables={"grid": table}, aggregates={"per_N": {}, "model": {
                                  "tau": model.tau, "L_root": model.edge_root,
                                  "L_series": model.edge_series}},
                              contract={"pass": True, "checks": []})
    extra = []
    if config.plots:
        extra.append(plots.render_density_figure(xs, table.column("rho"), outdir))
    return report, extra


def _cmd_rigidity(config: RunConfig, outdir: Path):
    report = experiments.rigidity_run(
        _specs(config), config.M, k=config.k, ell=config.ell, workers=config.workers,
        zero_corrections=config.zero_corrections,
        contract_overrides=_overrides(config, ("s_ratio_lo", "s_ratio_hi", "u_growth_min")))
    return report, []


def _cmd_locallaw(config: RunConfig, outdir: Path):
    report = experiments.local_law_run(
        _specs(config), config.M, ell=config.ell, workers=config.workers,
        contract_overrides=_overrides(config, ("edge_quantile_max", "trend_ratio_max")))
    return report, []


def _cmd_stability(config: RunConfig, outdir: Path):
    report = experiments.stability_check(
        _specs(config), config.M, ell=config.ell, workers=config.workers,
        contract_overrides=_overrides(config, ("c_stab",)))
    return report, []


def _cmd_fluct(config: RunConfig, outdir: Path):
    report = experiments.fluctuation_run(
        _specs(config)[0], config.M, ell=config.ell, workers=config.workers,
        contract_overrides=_overrides(config, ("corr_floor", "corr_cap", "var_ratio_max")))
    return report, []


def _cmd_goe(config: RunConfig, outdir: Path):
    report = experiments.goe_compare_run(
        _specs(config)[0], config.M, workers=config.workers, self_test=config.self_test)
    return report, []


_DISPATCH = {
    "sample": _cmd_sample,
    "spectrum": _cmd_spectrum,
    "corrections": _cmd_corrections,
    "model": _cmd_model,
    "density": _cmd_density,
    "rigidity": _cmd_rigidity,
    "locallaw": _cmd_locallaw,
    "stability": _cmd_stability,
    "fluct": _cmd_fluct,
    "goe": _cmd_goe,
}


def _echo(config: RunConfig) -> dict:
    out = {}
    for f in fields(RunConfig):
        out[f.name] = getattr(config, f.name)
    out["schema_version"] = SCHEMA_VERSION
    return out


def run(config: RunConfig) -> int:
    """Execute one command; write artifacts; map outcomes to exit codes."""
    outdir = Path(config.out)
    if not outdir.is_dir():
        print(f"error: output directory {outdir} does not exist", file=sys.stderr)
        return EXIT_ERROR
    try:
        report, extra_files = _DISPATCH[config.command](config, outdir)
        from .report import write_report
        written = write_report(outdir, report)
        written.extend(extra_files)
        if config.plots and report.plotdata:
            written.extend(plots.render_report_figures(report, outdir))
        meta = {
            "generated_utc": datetime.datetime.now(datetime.timezone.utc)
                             .replace(microsecond=0).isoformat(),
            "config_hash": report.config_hash,
            "files": sorted(str(p) for p in written),
        }
        with open(outdir / f"{report.kind}_meta.json", "w") as fh:
            json.dump(meta, fh, sort_keys=True, indent=1)
            fh.write("\n")
    except (ConfigError, ValueError, OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    if not report.passed:
        failed = [c for c in report.contract["checks"] if not c["ok"]]
        for c in failed:
            print(f"contract fail: {c['name']} = {c['value']:.6g} vs bound {c['bound']}",
                  file=sys.stderr)
        return EXIT_CONTRACT_FAIL
    return EXIT_PASS


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sparsedge",
        description="Spectral-edge correction laboratory for sparse random matrices")
    parser.add_argument("config", nargs="?", help="plain-text key = value config file")
    for key in _PARSERS:
        parser.add_argument(f"--{key}", type=str, default=None,
                            help=f"override config key {key!r}")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text() if args.config else ""
        overrides = {key: getattr(args, key) for key in _PARSERS
                     if getattr(args, key) is not None}
        config = parse_config(text, overrides)
    except (OSError, ConfigError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except Exception:
        traceback.print_exc()
        return EXIT_ERROR
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
