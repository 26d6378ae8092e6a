"""Flat ``key = value`` experiment files.

Keys mirror :class:`SimConfig`, :class:`ProtocolParams` and
:class:`ExperimentPlan` field names; ``#`` starts a comment.
"""
import dataclasses

from .engine import ConfigError, SimConfig
from .experiments import ExperimentPlan
from .metrics import PARAM_NAMES
from .protocols import ProtocolKind, ProtocolParams


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(conv):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(t) for t in items)
    return parse


def _order(text):
    names = _list(str.upper)(text)
    bad = [n for n in names if n not in PARAM_NAMES]
    if bad:
        raise ValueError(f"unknown parameter(s) {bad}; choose from {PARAM_NAMES}")
    if len(names) < 3 or len(set(names)) != len(names):
        raise ValueError("param_order needs at least 3 distinct parameters")
    return names


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {options}")
        return text
    return parse


SIM_KEYS = {
    "node_count": int, "side": float, "radio_range": float, "protocol": ProtocolKind,
    "malicious_fraction": float, "messages_per_source": int, "sim_horizon": int,
    "per_hop_delay": int, "k": int, "header_bits": int, "id_bits": int,
    "coeff_bits_per_entry": int, "payload_bits": int, "master_seed": int,
}
PROTOCOL_KEYS = {
    "p_lower": float, "p_equal": float, "replication": int, "coded_count": int,
    "coded_cap": int, "generation_spacing": int, "ttl": int,
}
PLAN_KEYS = {
    "protocols": _list(ProtocolKind), "malicious_fractions": _list(float),
    "runs_per_cell": int, "output_dir": str,
}
EXTRA_KEYS = {
    "runs": int,
    "caps": _list(int),
    "cap_fraction": float,
    "static_count": int,
    "param_order": _order,
    "transform": _choice("reciprocal", "complement"),
    "ee_scope": _choice("per_fraction", "global"),
    "event_log": _bool,
}
ALL_KEYS = {**SIM_KEYS, **PROTOCOL_KEYS, **PLAN_KEYS, **EXTRA_KEYS}


def parse_text(text, source="<config>"):
    """Parse into a dict of typed values; errors carry the line number."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in ALL_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = ALL_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return values


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), str(path))


def require(values, *keys):
    for key in keys:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")


def sim_config(values, **overrides):
    values = {**values, **overrides}
    params = ProtocolParams(**{k: v for k, v in values.items() if k in PROTOCOL_KEYS})
    sim = {k: v for k, v in values.items() if k in SIM_KEYS}
    cfg = SimConfig(params=params, **sim)
    return cfg.validate()


def experiment_plan(values, **overrides):
    values = {**values, **overrides}
    base = sim_config({k: v for k, v in values.items() if k != "protocol"})
    plan = ExperimentPlan(base=base, **{k: v for k, v in values.items() if k in PLAN_KEYS})
    try:
        return plan.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def dump(cfg):
    """Render a SimConfig back to the file format (used for provenance files)."""
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "params":
            lines += [f"{pf.name} = {getattr(v, pf.name)}" for pf in dataclasses.fields(v)]
        elif isinstance(v, ProtocolKind):
            lines.append(f"{f.name} = {v.value}")
        else:
            lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
