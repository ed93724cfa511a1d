"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s`.  The Monte Carlo criteria
use the pinned parameters documented in the README (family scales chosen so
the corrections sit inside the series-convergent window); total runtime is
roughly an hour on one core, dominated by the O(N^3) eigensolves.
"""

import itertools
import math
import time

import numpy as np
import pytest

from sparsedge import experiments as ex
from sparsedge import scm
from sparsedge.corrections import (CorrectionSet, compute_Z, evaluate_term,
                                   evaluate_term_bruteforce, format_pattern,
                                   scaling_study)
from sparsedge.ensemble import EnsembleSpec, MatrixSample, sample
from sparsedge.report import fit_line
from sparsedge.spectral import check_resolvent_identity, check_ward

import oracles
from test_corrections import all_supported_patterns


def _verdict(num: int, name: str, ok: bool, detail: str, t0: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {num} ({name}): {status} [{time.time() - t0:.1f}s] {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


# ---------------------------------------------------------------------------
# 1. Semicircle reduction
# ---------------------------------------------------------------------------

def test_criterion_1_semicircle_reduction():
    t0 = time.time()
    model = scm.build(CorrectionSet(ell=2, Z=(1.0, 0.0), X=0.0))
    edge_err = abs(model.edge_root - 2.0)
    m_err = abs(scm.stieltjes(model, complex(2.5, 1e-12)).w - (-0.5))
    rho_err = abs(scm.density(model, 0.0, 1e-6) - 1.0 / math.pi)
    ok = edge_err <= 1e-10 and m_err <= 1e-10 and rho_err <= 1e-6
    _verdict(1, "semicircle reduction", ok,
             f"|L-2|={edge_err:.2e} |m(2.5)+0.5|={m_err:.2e} |rho(0)-1/pi|={rho_err:.2e}",
             t0)


# ---------------------------------------------------------------------------
# 2. Exact resolvent identities
# ---------------------------------------------------------------------------

def test_criterion_2_exact_identities():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    worst_ward = worst_res = 0.0
    ok = True
    for trial in range(100):
        N = int(rng.integers(2, 201))
        spec = EnsembleSpec(N=N, b=0.3, master_seed=500 + trial)
        smp = sample(spec, trial)
        z = complex(rng.uniform(-3.0, 3.0), 10.0 ** rng.uniform(-4, 0))
        row = int(rng.integers(0, N))
        eta = z.imag
        w = check_ward(smp, z, row)
        r = check_resolvent_identity(smp, z, row)
        worst_ward = max(worst_ward, w * eta ** 2)
        worst_res = max(worst_res, r / (1.0 + 1.0 / eta ** 2))
        ok = ok and w <= 1e-8 / eta ** 2 and r <= 1e-9 * (1.0 + 1.0 / eta ** 2)
    _verdict(2, "exact identities", ok,
             f"max ward*eta^2={worst_ward:.2e} (<=1e-8), "
             f"max resolvent/(1+eta^-2)={worst_res:.2e} (<=1e-9)", t0)


# ---------------------------------------------------------------------------
# 3. Correction-term oracle equivalence
# ---------------------------------------------------------------------------

def test_criterion_3_correction_oracle():
    t0 = time.time()
    patterns = all_supported_patterns(max_k=3, max_order=4)
    rng = np.random.default_rng(77)
    worst = 0.0
    checked = 0
    ok = True
    for trial in range(50):
        N = 4 + trial % 3
        A = rng.standard_normal((N, N)) / math.sqrt(N)
        H = (A + A.T) / 2.0
        spec = EnsembleSpec(N=N, b=0.25, master_seed=0)
        smp = MatrixSample(entries=H, seed=trial, spec=spec)
        for pat in patterns:
            if pat.distinct_names > N:
                continue
            fast = evaluate_term(smp, pat)
            slow = evaluate_term_bruteforce(smp, pat)
            scale = max(abs(slow), 1e-30)
            rel = abs(fast - slow) / scale
            worst = max(worst, rel)
            checked += 1
            if rel > 1e-12:
                ok = False
        cz = compute_Z(smp, ell=2)
        z2_rel = abs(cz.Z[1] - oracles.z2_loops(H)) / max(abs(oracles.z2_loops(H)), 1e-30)
        z1_rel = abs(cz.Z[0] - oracles.z1_loops(H)) / abs(oracles.z1_loops(H))
        worst = max(worst, z1_rel, z2_rel)
        if z1_rel > 1e-12 or z2_rel > 1e-12:
            ok = False
    _verdict(3, "correction-term oracle", ok,
             f"{checked} pattern evaluations + 50 closed-form pairs, "
             f"worst rel err {worst:.2e} (<=1e-12)", t0)


# ---------------------------------------------------------------------------
# 4. Appendix-style scaling of the spread of X
# ---------------------------------------------------------------------------

def test_criterion_4_x_spread_scaling():
    t0 = time.time()
    specs = [EnsembleSpec(N=n, b=0.2, master_seed=404) for n in (1000, 4000)]
    study = scaling_study(specs, n=1, M=200)
    ok = -0.85 <= study.exponent_N <= -0.55
    _verdict(4, "X spread scaling", ok,
             f"fitted N-exponent {study.exponent_N:.3f} in [-0.85, -0.55], "
             f"CI [{study.ci_N[0]:.3f}, {study.ci_N[1]:.3f}], analytic ratio "
             f"{study.x_ratio_predicted:.3f} vs empirical {study.x_ratio_empirical:.3f}",
             t0)


# ---------------------------------------------------------------------------
# 5. Square-root edge behavior of the corrected density
# ---------------------------------------------------------------------------

def test_criterion_5_square_root_edge():
    t0 = time.time()
    model = scm.build(CorrectionSet(ell=2, Z=(1.0, 0.1), X=0.0))
    kappas = np.logspace(-4, -2, 20)
    logs = [math.log(scm.density(model, model.edge_root - k, 1e-8)) for k in kappas]
    slope, _ = fit_line([math.log(k) for k in kappas], logs)
    ok = abs(slope - 0.5) <= 0.05
    _verdict(5, "square-root edge", ok, f"fitted exponent {slope:.4f} = 0.5 +- 0.05", t0)


# ---------------------------------------------------------------------------
# 6-9. Monte Carlo criteria (shared fixtures)
# ---------------------------------------------------------------------------

RIGIDITY_SEED = 606
LOCALLAW_SEED = 707
FLUCT_SEED = 808

# Criterion 8 ensemble pins (see README and tests/pilot_runs.py):
# small fourth cumulant keeps the series edge convergent and keeps the
# X statistic honest against the extreme-value width at desk scale.
# Pilot: corr plateaus near 0.51 +- 0.03 at b = 0.1 for N in {1500, 3000},
# so the floor is pinned at 0.4; the b = 0.4 branch measures ~0.11.
FLUCT_LOW = dict(N=1500, b=0.1, scale=0.7, c_min=0.02, M=500)
FLUCT_HIGH = dict(N=1500, b=0.4, scale=0.9, c_min=0.01, M=800)
CORR_FLOOR = 0.4
CORR_CAP = 0.2
VAR_RATIO_MAX = 0.8


def _acceptance_spec(N: int, b: float, scale: float, seed: int, c_min: float) -> EnsembleSpec:
    return EnsembleSpec(N=N, b=b, scale=scale, master_seed=seed, c_min=c_min)


@pytest.fixture(scope="module")
def rigidity_report():
    specs = [_acceptance_spec(n, 0.2, 1.0, RIGIDITY_SEED, 0.1)
             for n in (1000, 2000, 4000)]
    return ex.rigidity_run(specs, M=200, k=3)


@pytest.fixture(scope="module")
def locallaw_reports():
    out = {}
    for n, m in ((1000, 200), (2000, 200), (4000, 120)):
        spec = _acceptance_spec(n, 0.2, 1.0, LOCALLAW_SEED, 0.1)
        out[n] = ex.local_law_run(spec, M=m)
    return out


def test_criterion_6_edge_rigidity(rigidity_report):
    t0 = time.time()
    trend = rigidity_report.aggregates["trend"]
    s_ratios = trend["S1_median_ratios"]
    growth = trend["U1_growth_per_doubling"]
    ok = all(0.5 <= r <= 2.0 for r in s_ratios) and all(g >= 1.05 for g in growth)
    per = rigidity_report.aggregates["per_N"]
    meds = {n: round(per[f"N{n}"]["S1_median"], 3) for n in (1000, 2000, 4000)}
    ok = ok and rigidity_report.contract["pass"]
    _verdict(6, "edge rigidity", ok,
             f"S1 medians {meds}, S-ratios {[round(r, 3) for r in s_ratios]} in [0.5,2], "
             f"U growth/doubling {[round(g, 3) for g in growth]} >= 1.05", t0)


def test_criterion_7_local_law_at_edge(locallaw_reports):
    t0 = time.time()
    q99 = locallaw_reports[2000].aggregates["per_N"]["N2000"]["edge_scaled_Lam_q99"]
    ratio_q99s = [locallaw_reports[n].aggregates["per_N"][f"N{n}"]["ratio_q99"]
                  for n in (1000, 2000, 4000)]
    ratios = [b / a for a, b in zip(ratio_q99s, ratio_q99s[1:])]
    ok = q99 <= 10.0 and all(r <= 1.5 for r in ratios)
    _verdict(7, "local law at the edge", ok,
             f"q99(N^(1/3) Lambda) = {q99:.3f} <= 10 at N=2000; q99(Lambda/envelope) "
             f"{[f'{v:.4f}' for v in ratio_q99s]}, consecutive ratios "
             f"{[round(r, 3) for r in ratios]} <= 1.5", t0)


def test_criterion_8_fluctuation_decomposition():
    t0 = time.time()
    low_spec = _acceptance_spec(FLUCT_LOW["N"], FLUCT_LOW["b"], FLUCT_LOW["scale"],
                                FLUCT_SEED, FLUCT_LOW["c_min"])
    agg_low = (ex.fluctuation_run(low_spec, M=FLUCT_LOW["M"])
               .aggregates["per_N"][f"N{FLUCT_LOW['N']}"])
    high_spec = _acceptance_spec(FLUCT_HIGH["N"], FLUCT_HIGH["b"], FLUCT_HIGH["scale"],
                                 FLUCT_SEED + 1, FLUCT_HIGH["c_min"])
    agg_high = (ex.fluctuation_run(high_spec, M=FLUCT_HIGH["M"])
                .aggregates["per_N"][f"N{FLUCT_HIGH['N']}"])
    ok = (agg_low["corr_unc_X"] >= CORR_FLOOR and agg_low["var_ratio"] <= VAR_RATIO_MAX
          and agg_high["corr_unc_X"] <= CORR_CAP)
    _verdict(8, "fluctuation decomposition", ok,
             f"b={FLUCT_LOW['b']}: corr={agg_low['corr_unc_X']:.3f} (>={CORR_FLOOR}), "
             f"var ratio={agg_low['var_ratio']:.3f} (<={VAR_RATIO_MAX}); "
             f"b={FLUCT_HIGH['b']}: corr={agg_high['corr_unc_X']:.3f} (<={CORR_CAP})", t0)


def test_criterion_9_stability_diagnostic(locallaw_reports):
    t0 = time.time()
    quantiles = {n: locallaw_reports[n].aggregates["per_N"][f"N{n}"]["stab_q99"]
                 for n in locallaw_reports}
    ok = all(v <= 10.0 for v in quantiles.values())
    _verdict(9, "stability diagnostic", ok,
             f"q99(Lambda/sqrt|P|) per N: "
             f"{ {n: round(v, 3) for n, v in quantiles.items()} } <= 10 "
             f"on the eta >= N^(-2/3) grid", t0)
