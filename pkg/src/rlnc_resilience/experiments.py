"""Sweeps over protocols and malicious fractions with common random numbers."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .engine import SimConfig, run
from .metrics import DEFAULT_ORDER, RawParams, energy, normalize, polygon_area, raw_params, summarize
from .protocols import ALL_PROTOCOLS, ProtocolKind

DEFAULT_FRACTIONS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)


@dataclass(frozen=True)
class ExperimentPlan:
    base: SimConfig = field(default_factory=SimConfig)
    protocols: tuple = ALL_PROTOCOLS
    malicious_fractions: tuple = DEFAULT_FRACTIONS
    runs_per_cell: int = 100
    output_dir: str = "out"

    def validate(self):
        if not self.protocols or not self.malicious_fractions:
            raise ValueError("protocols and malicious_fractions must be nonempty")
        fr = list(self.malicious_fractions)
        if any(not (0.0 <= f <= 1.0) for f in fr) or any(b <= a for a, b in zip(fr, fr[1:])):
            raise ValueError("malicious_fractions must be strictly increasing within [0, 1]")
        if self.runs_per_cell < 1:
            raise ValueError("runs_per_cell must be >= 1")
        self.base.validate()
        for p in self.protocols:
            self.base.with_(protocol=p).validate()
        return self

    def cells(self):
        return [(ProtocolKind(p), f) for p in self.protocols for f in self.malicious_fractions]


def _one(args):
    config, index = args
    return run(config, index)


def run_cells(configs, runs, jobs=1, on_cell=None):
    """Run every config ``runs`` times, in input order whatever ``jobs`` is.

    ``on_cell(i, stats)`` is called from the coordinating process as each
    config finishes.
    """
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    out = []
    try:
        for i, cfg in enumerate(configs):
            tasks = [(cfg, r) for r in range(runs)]
            stats = list(pool.map(_one, tasks)) if pool else [_one(t) for t in tasks]
            if on_cell:
                on_cell(i, stats)
            out.append(stats)
    finally:
        if pool:
            pool.shutdown()
    return out


def sweep(plan, jobs=1, done=None, on_cell=None):
    """Per-cell lists of RunStats (or cached per-run params for cells in ``done``)."""
    plan.validate()
    done = dict(done or {})
    todo = [c for c in plan.cells() if c not in done]
    configs = [plan.base.with_(protocol=p, malicious_fraction=f) for p, f in todo]

    def finished(i, stats):
        done[todo[i]] = stats
        if on_cell:
            on_cell(todo[i], stats)

    run_cells(configs, plan.runs_per_cell, jobs, finished)
    return {c: done[c] for c in plan.cells()}


def per_run_params(results):
    """RawParams per run; entries that already are RawParams pass through."""
    return {cell: [s if isinstance(s, RawParams) else raw_params(s) for s in stats]
            for cell, stats in results.items()}


def summaries(params):
    return {cell: summarize(runs) for cell, runs in params.items()}


def per_run_areas(params, order=DEFAULT_ORDER, transform="reciprocal", ee_scope="per_fraction"):
    """Resiliency area per cell per run, each run normalized over its own grid."""
    cells = list(params)
    runs = len(next(iter(params.values())))
    out = {cell: [] for cell in cells}
    for r in range(runs):
        normed = normalize({c: params[c][r] for c in cells}, order, transform, ee_scope)
        for c in cells:
            out[c].append(polygon_area(normed[c]))
    return {c: np.array(v) for c, v in out.items()}


def paired_greater(a, b, level=0.95):
    """One-sided paired t-test that mean(a - b) > 0 at ``level``."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if np.all(d == d[0]):
        return bool(d[0] > 0), float(d.mean()), 0.0
    res = sps.ttest_1samp(d, 0.0, alternative="greater")
    return bool(res.pvalue < 1 - level), float(d.mean()), float(res.pvalue)


def cap_experiment(base, caps, runs, fraction=0.5, static_count=16, jobs=1):
    """ADR and energy for paced coding at each cap, plus the static scheme as reference."""
    configs = [base.with_(protocol=ProtocolKind.RS_GBR_NCACK, coded_cap=c, malicious_fraction=fraction)
               for c in caps]
    configs.append(base.with_(protocol=ProtocolKind.RS_GBR_NC, coded_count=static_count,
                              malicious_fraction=fraction))
    rows = []
    labels = [(ProtocolKind.RS_GBR_NCACK, c) for c in caps] + [(ProtocolKind.RS_GBR_NC, static_count)]
    for (proto, cap), stats in zip(labels, run_cells(configs, runs, jobs)):
        adr = [s.messages_delivered / s.messages_sent if s.messages_sent else 0.0 for s in stats]
        en = [energy(s.bits_transmitted, s.bits_received) for s in stats]
        rows.append({"protocol": proto, "cap": cap, "adr": adr, "energy": en})
    return rows
