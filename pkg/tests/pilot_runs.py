"""One-off pilot runs used to pin the acceptance thresholds.

Not collected by pytest (no test_ prefix); kept for reproducibility of the
pinned constants cited in the README.  Run:  python3 tests/pilot_runs.py
"""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sparsedge import experiments as ex
from sparsedge.ensemble import EnsembleSpec


def pilot_rigidity():
    t0 = time.time()
    specs = [EnsembleSpec(N=n, b=0.2, scale=1.0, master_seed=101, c_min=0.1)
             for n in (1000, 2000, 4000)]
    rep = ex.rigidity_run(specs, M=50, k=1)
    print(f"[rigidity pilot, M=50] {time.time() - t0:.0f}s")
    for key, entry in rep.aggregates["per_N"].items():
        print(f"  {key}: S1_med={entry['S1_median']:.3f} U1_med={entry['U1_median']:.3f} "
              f"edge_gap_max={entry['edge_gap_max']:.2e} degen={entry['degenerate']}")
    print("  trend:", rep.aggregates["trend"])


def pilot_locallaw():
    t0 = time.time()
    for n, m in ((1000, 50), (2000, 50), (4000, 50)):
        spec = EnsembleSpec(N=n, b=0.2, scale=1.0, master_seed=102, c_min=0.1)
        rep = ex.local_law_run(spec, M=m)
        entry = rep.aggregates["per_N"][f"N{n}"]
        print(f"[locallaw pilot N={n} M={m}] q99_edge={entry['edge_scaled_Lam_q99']:.3f} "
              f"edge_ratio_med={entry['edge_ratio_median']:.4f} "
              f"stab_q99={entry.get('stab_q99', float('nan')):.3f} "
              f"ratio_q99={entry['ratio_q99']:.3f} ({time.time() - t0:.0f}s)")


def pilot_fluct():
    cases = [
        ("b=0.1 branch", EnsembleSpec(N=1500, b=0.1, scale=0.7, master_seed=103, c_min=0.02), 500),
        ("b=0.4 N=800", EnsembleSpec(N=800, b=0.4, scale=0.9, master_seed=104, c_min=0.01), 500),
        ("b=0.4 N=1500", EnsembleSpec(N=1500, b=0.4, scale=0.9, master_seed=105, c_min=0.01), 500),
        ("b=0.4 N=3000", EnsembleSpec(N=3000, b=0.4, scale=0.9, master_seed=106, c_min=0.01), 200),
    ]
    for label, spec, m in cases:
        t0 = time.time()
        rep = ex.fluctuation_run(spec, M=m)
        entry = rep.aggregates["per_N"][f"N{spec.N}"]
        print(f"[fluct pilot {label} M={m}] corr={entry['corr_unc_X']:.4f} "
              f"var_ratio={entry['var_ratio']:.4f} var_unc={entry['var_unc']:.3f} "
              f"var_cor={entry['var_cor']:.3f} ({time.time() - t0:.0f}s)")


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "all"
    if which in ("all", "rigidity"):
        pilot_rigidity()
    if which in ("all", "locallaw"):
        pilot_locallaw()
    if which in ("all", "fluct"):
        pilot_fluct()
