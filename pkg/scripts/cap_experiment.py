"""ADR and energy of RS_GBR_NCACK as the coded-packet cap grows, at 50% malicious nodes.

    python scripts/cap_experiment.py [--runs 20] [--caps 4,8,16,32,64]
"""
import argparse

import numpy as np

from rlnc_resilience.engine import SimConfig
from rlnc_resilience.experiments import cap_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--caps", default="4,8,16,32,64")
    ap.add_argument("--fraction", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    base = SimConfig(node_count=100, side=50, radio_range=10, master_seed=args.seed)
    caps = [int(c) for c in args.caps.split(",")]
    rows = cap_experiment(base, caps, args.runs, fraction=args.fraction, jobs=args.jobs)
    static_energy = np.mean(rows[-1]["energy"])
    print(f"{'protocol':13s} {'cap':>4s} {'ADR':>6s} {'energy':>12s} {'vs static':>9s}")
    for r in rows:
        e = np.mean(r["energy"])
        print(f"{r['protocol'].value:13s} {r['cap']:4d} {np.mean(r['adr']):6.3f} {e:12.0f} {e / static_energy:9.3f}")


if __name__ == "__main__":
    main()
