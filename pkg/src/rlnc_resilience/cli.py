"""Batch experiment driver.

    rlnc-resilience run --config cell.cfg --out results/
    rlnc-resilience sweep --config plan.cfg --jobs 4 --resume
    rlnc-resilience kiviat --params results/params.csv --protocol RS_GBR --fraction 0.2
    rlnc-resilience cap-experiment --config cap.cfg

Exit status: 0 success, 1 runtime failure, 2 configuration error.
"""
import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .engine import ConfigError, run as run_once
from .experiments import cap_experiment, per_run_params, summaries, sweep
from .metrics import (DEFAULT_ORDER, PARAM_NAMES, RawParams, build_report, kiviat_vertices,
                      normalize, polygon_area, raw_params)
from .protocols import ProtocolKind

log = logging.getLogger("rlnc_resilience")

RAW_RUNS_HEADER = ["run_index", "messages_sent", "messages_delivered", "mean_delay",
                   "bits_tx", "bits_rx", "throughput", "fairness_dev"]
PARAM_COLS = ["adr", "de", "ee", "at", "df"]
PARAMS_HEADER = ["protocol", "fraction"] + PARAM_COLS + [c + "_hw" for c in PARAM_COLS] + ["runs"]
CELL_HEADER = ["run_index"] + PARAM_COLS + ["de_flagged"]
VERTICES_HEADER = ["axis", "angle", "radius", "x", "y"]
CAP_HEADER = ["protocol", "cap", "adr", "energy"]


def _num(x):
    return repr(float(x))


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _load(args, **overrides):
    values = cfgmod.load(args.config) if args.config else {}
    if args.seed is not None:
        values["master_seed"] = args.seed
    values.update(overrides)
    return values


def _out_dir(args, values):
    return Path(args.out or values.get("output_dir", "out"))


def _metric_opts(values):
    return dict(order=values.get("param_order", DEFAULT_ORDER),
                transform=values.get("transform", "reciprocal"),
                ee_scope=values.get("ee_scope", "per_fraction"))


def cmd_run(args):
    values = _load(args)
    cfgmod.require(values, "protocol")
    cfg = cfgmod.sim_config({k: v for k, v in values.items() if k in cfgmod.SIM_KEYS or k in cfgmod.PROTOCOL_KEYS})
    runs = values.get("runs", 1)
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    out = _out_dir(args, values)
    want_log = args.event_log or values.get("event_log", False)
    rows, logs = [], []
    for i in range(runs):
        events = [] if want_log else None
        stats = run_once(cfg, i, events)
        p = raw_params(stats)
        rows.append([i, stats.messages_sent, stats.messages_delivered, _num(p.de_raw),
                     stats.bits_transmitted, stats.bits_received, _num(p.at_raw), _num(p.df_raw)])
        logs.append(events)
    _write_csv(out / "raw_runs.csv", RAW_RUNS_HEADER, rows)
    if want_log:
        for i, events in enumerate(logs):
            (out / f"events_run{i}.log").write_text("\n".join(events) + "\n", encoding="utf-8")
    sent = sum(r[1] for r in rows)
    delivered = sum(r[2] for r in rows)
    print(f"{cfg.protocol.value} fraction={cfg.malicious_fraction} runs={runs} "
          f"sent={sent} delivered={delivered} adr={delivered / sent if sent else 0.0:.4f}")
    return 0


def _cell_file(out, cell):
    proto, frac = cell
    return out / "cells" / f"{proto.value}__{frac!r}.csv"


def _save_cell(out, cell, stats):
    params = [s if isinstance(s, RawParams) else raw_params(s) for s in stats]
    rows = [[i, *(_num(p.get(n)) for n in PARAM_NAMES), int(p.de_flagged)] for i, p in enumerate(params)]
    _write_csv(_cell_file(out, cell), CELL_HEADER, rows)


def _load_cell(path, runs):
    rows = _read_csv(path)
    if len(rows) != runs:
        return None
    return [RawParams(*(float(r[c]) for c in PARAM_COLS), de_flagged=bool(int(r["de_flagged"])))
            for r in rows]


def cmd_sweep(args):
    values = _load(args)
    plan = cfgmod.experiment_plan(values)
    out = _out_dir(args, values)
    done = {}
    if args.resume:
        for cell in plan.cells():
            path = _cell_file(out, cell)
            if path.exists():
                cached = _load_cell(path, plan.runs_per_cell)
                if cached is not None:
                    done[cell] = cached
        log.info("resuming with %d of %d cells cached", len(done), len(plan.cells()))
    results = sweep(plan, jobs=args.jobs, done=done, on_cell=lambda c, s: _save_cell(out, c, s))
    report = build_report(summaries(per_run_params(results)), **_metric_opts(values))
    write_report(out, report)
    for proto in report.protocols:
        curve = ", ".join(f"{f:g}:{report.area[(proto, f)]:.4f}" for f in report.fractions)
        print(f"{proto.value}: {curve}")
    return 0


def write_report(out, report):
    rows = []
    for (proto, frac), s in report.summaries.items():
        rows.append([proto.value, _num(frac), *(_num(s.mean.get(n)) for n in PARAM_NAMES),
                     *(_num(s.half_width.get(n)) for n in PARAM_NAMES), s.runs])
    _write_csv(out / "params.csv", PARAMS_HEADER, rows)
    _write_csv(out / "normalized.csv", ["protocol", "fraction", *report.order],
               [[p.value, _num(f), *map(_num, v)] for (p, f), v in report.normalized.items()])
    _write_csv(out / "resiliency.csv", ["protocol", "fraction", "R"],
               [[p.value, _num(f), _num(a)] for (p, f), a in report.area.items()])


def read_params(path):
    """params.csv -> {(protocol, fraction): RawParams}."""
    return {(ProtocolKind(r["protocol"]), float(r["fraction"])):
            RawParams(*(float(r[c]) for c in PARAM_COLS)) for r in _read_csv(path)}


def cmd_kiviat(args):
    cells = read_params(args.params)
    order = cfgmod._order(args.axes) if args.axes else DEFAULT_ORDER
    cell = (ProtocolKind(args.protocol), float(args.fraction))
    match = [c for c in cells if c[0] is cell[0] and math.isclose(c[1], cell[1], abs_tol=1e-12)]
    if not match:
        raise LookupError(f"no cell for protocol {args.protocol} at fraction {args.fraction}")
    normed = normalize(cells, order, args.transform, args.ee_scope)[match[0]]
    verts = kiviat_vertices(normed, list(order))
    out = Path(args.out or ".")
    _write_csv(out / "vertices.csv", VERTICES_HEADER,
               [[label, _num(a), _num(r), _num(x), _num(y)] for label, a, r, x, y in verts])
    print(f"{cell[0].value} fraction={cell[1]:g} area={polygon_area(normed):.6f}")
    return 0


def cmd_cap_experiment(args):
    values = _load(args)
    base_values = {k: v for k, v in values.items() if k in cfgmod.SIM_KEYS or k in cfgmod.PROTOCOL_KEYS}
    base = cfgmod.sim_config({**base_values, "protocol": ProtocolKind.RS_GBR_NCACK})
    caps = values.get("caps", (4, 8, 16, 32, 64))
    for c in caps:
        base.with_(coded_cap=c).validate()
    rows = cap_experiment(base, caps, values.get("runs_per_cell", 100),
                          fraction=values.get("cap_fraction", 0.5),
                          static_count=values.get("static_count", 16), jobs=args.jobs)
    out = _out_dir(args, values)
    _write_csv(out / "cap.csv", CAP_HEADER,
               [[r["protocol"].value, r["cap"], _num(np.mean(r["adr"])), _num(np.mean(r["energy"]))]
                for r in rows])
    for r in rows:
        print(f"{r['protocol'].value} cap={r['cap']} adr={np.mean(r['adr']):.4f} energy={np.mean(r['energy']):.0f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="rlnc-resilience", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        p.add_argument("--config", required=needs_config, help="key = value experiment file")
        p.add_argument("--out", help="output directory (default: output_dir key or ./out)")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("run", help="one (protocol, fraction) cell -> raw_runs.csv")
    common(p)
    p.add_argument("--event-log", action="store_true", help="write events_run<i>.log per run")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="protocol x fraction grid -> params/normalized/resiliency.csv")
    common(p)
    p.add_argument("--resume", action="store_true", help="reuse completed cells under OUT/cells")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("kiviat", help="polygon vertices for one cell -> vertices.csv")
    p.add_argument("--params", required=True, help="params.csv written by sweep")
    p.add_argument("--protocol", required=True)
    p.add_argument("--fraction", required=True, type=float)
    p.add_argument("--axes", help="comma separated parameter order, e.g. ADR,DE,EE")
    p.add_argument("--transform", choices=("reciprocal", "complement"), default="reciprocal")
    p.add_argument("--ee-scope", choices=("per_fraction", "global"), default="per_fraction")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_kiviat)

    p = sub.add_parser("cap-experiment", help="paced coding cap sweep -> cap.csv")
    common(p)
    p.set_defaults(func=cmd_cap_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, LookupError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
