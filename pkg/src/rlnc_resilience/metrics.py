"""Raw resiliency parameters, their normalization, and the Kiviat polygon area."""
import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

PARAM_NAMES = ("ADR", "DE", "EE", "AT", "DF")
DEFAULT_ORDER = PARAM_NAMES
HIGHER_IS_BETTER = {"ADR": True, "DE": False, "EE": False, "AT": True, "DF": False}
TX_WEIGHT, RX_WEIGHT = 1, 2


@dataclass(frozen=True)
class RawParams:
    adr: float
    de_raw: float
    ee_raw: float
    at_raw: float
    df_raw: float
    de_flagged: bool = False  # no message delivered; de_raw holds the horizon

    def get(self, name):
        return {"ADR": self.adr, "DE": self.de_raw, "EE": self.ee_raw,
                "AT": self.at_raw, "DF": self.df_raw}[name]


@dataclass(frozen=True)
class CellSummary:
    mean: RawParams
    half_width: RawParams
    runs: int


def energy(bits_transmitted, bits_received):
    return TX_WEIGHT * bits_transmitted + RX_WEIGHT * bits_received


def raw_params(stats):
    """Five raw parameters of a single run."""
    sent = stats.messages_sent
    adr = stats.messages_delivered / sent if sent else 0.0
    if stats.per_message_delay:
        de, flagged = float(np.mean(stats.per_message_delay)), False
    else:
        de, flagged = float(stats.horizon), True
    sources = len(stats.per_source_sent)
    at = stats.delivered_payload_bits / (sources * stats.horizon) if sources and stats.horizon else 0.0
    ratios = [stats.per_source_delivered.get(s, 0) / n for s, n in stats.per_source_sent.items()]
    df = float(np.std(ratios)) if ratios else 0.0
    return RawParams(adr, de, float(energy(stats.bits_transmitted, stats.bits_received)), at, df, flagged)


def summarize(per_run):
    """Mean and 1.96 * standard error of each raw parameter over runs."""
    names = [f.name for f in fields(RawParams) if f.name != "de_flagged"]
    arr = np.array([[getattr(r, n) for n in names] for r in per_run], dtype=float)
    mean = arr.mean(axis=0)
    if len(per_run) > 1:
        hw = 1.96 * arr.std(axis=0, ddof=1) / math.sqrt(len(per_run))
    else:
        hw = np.zeros(len(names))
    flagged = all(r.de_flagged for r in per_run)
    return CellSummary(RawParams(*mean.tolist(), de_flagged=flagged), RawParams(*hw.tolist()), len(per_run))


def _efficiency(column, transform):
    """Map a less-is-better column to a higher-is-better one."""
    col = np.asarray(column, dtype=float)
    if transform == "complement":
        top = col.max()
        if top <= 0 or col.min() == top:
            return np.ones_like(col)
        return 1.0 - col / top
    if transform != "reciprocal":
        raise ValueError(f"unknown transform {transform!r}")
    out = np.empty_like(col)
    pos = col > 0
    out[pos] = 1.0 / col[pos]
    out[~pos] = out[pos].max() if pos.any() else 1.0
    return out


def _max_normalize(values, name):
    top = max(values) if len(values) else 0.0
    if top <= 0:
        warnings.warn(f"parameter {name} is zero in every cell; normalized to 0", stacklevel=3)
        return [0.0] * len(values)
    return [v / top for v in values]


def normalize(cells, order=DEFAULT_ORDER, transform="reciprocal", ee_scope="per_fraction", senses=None):
    """Normalize raw parameters over a (protocol, fraction) grid.

    ``cells`` maps ``(protocol, fraction)`` to :class:`RawParams`. Returns a
    mapping with the same keys to tuples ordered like ``order``. Every
    parameter is divided by its maximum over the whole grid, except EE with
    ``ee_scope="per_fraction"`` which is divided by the maximum over
    protocols at the same fraction.
    """
    if not cells:
        raise ValueError("normalize needs at least one cell")
    senses = senses or HIGHER_IS_BETTER
    keys = list(cells)
    out = {key: {} for key in keys}
    for name in order:
        col = [cells[key].get(name) for key in keys]
        if not senses[name]:
            col = _efficiency(col, transform).tolist()
        if name == "EE" and ee_scope == "per_fraction":
            groups = {}
            for i, key in enumerate(keys):
                groups.setdefault(key[1], []).append(i)
            normed = [0.0] * len(keys)
            for idx in groups.values():
                for i, v in zip(idx, _max_normalize([col[i] for i in idx], name)):
                    normed[i] = v
        elif ee_scope not in ("per_fraction", "global"):
            raise ValueError(f"unknown ee_scope {ee_scope!r}")
        else:
            normed = _max_normalize(col, name)
        for key, v in zip(keys, normed):
            out[key][name] = v
    return {key: tuple(out[key][n] for n in order) for key in keys}


def polygon_area(values):
    """Area of the polygon whose vertices sit on ``n`` equally spaced axes."""
    n = len(values)
    if n < 3:
        raise ValueError("polygon_area needs at least 3 parameters")
    total = sum(values[i] * values[(i + 1) % n] for i in range(n))
    return total * 0.5 * math.sin(2 * math.pi / n)


def max_area(n):
    return n * 0.5 * math.sin(2 * math.pi / n)


def kiviat_vertices(values, labels=None):
    """``(label, angle, radius, x, y)`` per axis, first axis pointing up, counter-clockwise."""
    n = len(values)
    labels = labels or [str(i) for i in range(n)]
    out = []
    for i, (label, r) in enumerate(zip(labels, values)):
        angle = math.pi / 2 + 2 * math.pi * i / n
        out.append((label, angle, r, r * math.cos(angle), r * math.sin(angle)))
    return out


@dataclass
class ResiliencyReport:
    order: tuple
    protocols: list
    fractions: list
    normalized: dict  # (protocol, fraction) -> tuple
    area: dict  # (protocol, fraction) -> float
    summaries: dict = None  # (protocol, fraction) -> CellSummary


def build_report(summaries, order=DEFAULT_ORDER, transform="reciprocal", ee_scope="per_fraction"):
    """``summaries`` maps (protocol, fraction) to CellSummary or RawParams."""
    cells = {key: getattr(s, "mean", s) for key, s in summaries.items()}
    normed = normalize(cells, order, transform, ee_scope)
    protocols = list(dict.fromkeys(key[0] for key in cells))
    fractions = sorted({key[1] for key in cells})
    area = {key: polygon_area(v) for key, v in normed.items()}
    return ResiliencyReport(tuple(order), protocols, fractions, normed, area, summaries)


def resiliency_curve(report):
    """Per protocol: ``[(fraction, R)]`` sorted by fraction and the drops between neighbours."""
    curves = {}
    for proto in report.protocols:
        pts = [(f, report.area[(proto, f)]) for f in report.fractions if (proto, f) in report.area]
        drops = [a[1] - b[1] for a, b in zip(pts, pts[1:])]
        curves[proto] = (pts, drops)
    return curves
