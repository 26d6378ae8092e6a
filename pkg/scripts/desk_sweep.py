"""Desk-scale protocol x malicious-fraction sweep with paired comparisons.

    python scripts/desk_sweep.py [--runs 20] [--jobs 4] [--out results/desk_sweep]
"""
import argparse
from pathlib import Path

import numpy as np

from rlnc_resilience.cli import write_report
from rlnc_resilience.engine import SimConfig
from rlnc_resilience.experiments import (ExperimentPlan, paired_greater, per_run_areas, per_run_params,
                                         summaries, sweep)
from rlnc_resilience.metrics import build_report, resiliency_curve
from rlnc_resilience.protocols import ProtocolKind as P


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/desk_sweep")
    args = ap.parse_args()

    base = SimConfig(node_count=100, side=50, radio_range=10, master_seed=args.seed)
    plan = ExperimentPlan(base=base, runs_per_cell=args.runs)
    params = per_run_params(sweep(plan, jobs=args.jobs))
    report = build_report(summaries(params))
    write_report(Path(args.out), report)

    for proto, (pts, drops) in resiliency_curve(report).items():
        print(f"{proto.value:13s} R: " + " ".join(f"{r:.3f}" for _, r in pts)
              + "  drops: " + " ".join(f"{d:+.3f}" for d in drops))
    for f in plan.malicious_fractions:
        adr = {p: np.mean([r.adr for r in params[(p, f)]]) for p in plan.protocols}
        print(f"fraction {f:.1f} ADR " + " ".join(f"{p.value}={v:.3f}" for p, v in adr.items()))

    areas = per_run_areas(params)
    drop = lambda p, a, b: areas[(p, a)] - areas[(p, b)]
    sig, diff, pval = paired_greater(drop(P.RS_GBR, 0.0, 0.2), drop(P.RM_GBR, 0.0, 0.2))
    print(f"RS-GBR falls faster than RM-GBR over 0-20%: {sig} (mean gap {diff:+.3f}, p={pval:.2g})")


if __name__ == "__main__":
    main()
