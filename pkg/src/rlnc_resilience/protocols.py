"""The four randomized gradient routing variants compared under attack.

Every function here is a decision procedure; the event loop itself lives in
:mod:`rlnc_resilience.engine`, which calls back into these on each event.
"""
from dataclasses import dataclass, field
from enum import Enum

from .codec import DecoderState, Ingest, generate_coded_packets

STRANDED = None


class ProtocolKind(str, Enum):
    RS_GBR = "RS_GBR"
    RM_GBR = "RM_GBR"
    RS_GBR_NC = "RS_GBR_NC"
    RS_GBR_NCACK = "RS_GBR_NCACK"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            key = value.strip().upper().replace("-", "_")
            for member in cls:
                if member.value == key:
                    return member
        return None

    @property
    def coded(self):
        return self in (ProtocolKind.RS_GBR_NC, ProtocolKind.RS_GBR_NCACK)


ALL_PROTOCOLS = tuple(ProtocolKind)


@dataclass(frozen=True)
class ProtocolParams:
    p_lower: float = 0.8
    p_equal: float = 0.2
    replication: int = 4
    coded_count: int = 16
    coded_cap: int = 32
    generation_spacing: int = 0  # 0: two source-to-sink hop delays (an RTT)
    ttl: int = 0  # 0: eight times the network depth in hops

    def validate(self, k):
        if abs(self.p_lower + self.p_equal - 1.0) > 1e-9:
            raise ValueError("p_lower + p_equal must equal 1")
        if not (0.0 <= self.p_lower <= 1.0):
            raise ValueError("p_lower must be a probability")
        for name in ("replication", "coded_count", "coded_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.generation_spacing < 0 or self.ttl < 0:
            raise ValueError("generation_spacing and ttl must be >= 0")
        if self.coded_cap < k:
            raise ValueError(f"coded_cap={self.coded_cap} is below k={k}; no message could decode")

    def packets_per_message(self, kind):
        return {
            ProtocolKind.RS_GBR: 1,
            ProtocolKind.RM_GBR: self.replication,
            ProtocolKind.RS_GBR_NC: self.coded_count,
            ProtocolKind.RS_GBR_NCACK: self.coded_cap,
        }[kind]


def rs_gbr_next_hop(topo, node, u, p_lower=0.8):
    """Pick the next hop from one uniform draw ``u`` in [0, 1).

    ``u < p_lower`` selects the lower-gradient group, otherwise the
    equal-gradient group; the rescaled remainder of ``u`` picks the member.
    An empty group falls back to the other one.
    """
    lower, equal = topo.groups(node)
    if u < p_lower:
        first, second, x = lower, equal, u / p_lower
    else:
        first, second, x = equal, lower, (u - p_lower) / (1.0 - p_lower)
    group = first or second
    if not group:
        return STRANDED
    return group[min(int(x * len(group)), len(group) - 1)]


# -- sink side ---------------------------------------------------------------

class SinkResult(str, Enum):
    BUFFERED = "buffered"
    DECODED_NOW = "decoded"
    DROPPED_AS_STALE = "stale"


@dataclass
class SinkState:
    k: int = 4
    decoders: dict = field(default_factory=dict)
    decoded_ids: set = field(default_factory=set)
    first_arrival: dict = field(default_factory=dict)
    decode_time: dict = field(default_factory=dict)
    payloads: dict = field(default_factory=dict)


def sink_on_coded_packet(state, pkt, now=0):
    mid = pkt.message_id
    if mid in state.decoded_ids:
        return SinkResult.DROPPED_AS_STALE
    state.first_arrival.setdefault(mid, now)
    dec = state.decoders.get(mid)
    if dec is None:
        dec = state.decoders[mid] = DecoderState(mid, state.k)
    outcome, payload = dec.ingest(pkt)
    if outcome is Ingest.DECODED:
        del state.decoders[mid]
        state.decoded_ids.add(mid)
        state.decode_time[mid] = now
        state.payloads[mid] = payload
        return SinkResult.DECODED_NOW
    return SinkResult.BUFFERED


def sink_on_data_packet(state, message_id, now=0):
    """Uncoded traffic: the first copy delivers, later copies are duplicates."""
    if message_id in state.decoded_ids:
        return SinkResult.DROPPED_AS_STALE
    state.first_arrival[message_id] = now
    state.decoded_ids.add(message_id)
    state.decode_time[message_id] = now
    return SinkResult.DECODED_NOW


def sink_send_ack(engine, sink_state, message_id, via):
    """Route one uncoded ACK back along the reverse of ``via``'s path."""
    engine.send_ack(message_id, list(reversed(via.path)))


# -- source side -------------------------------------------------------------

def rs_gbr_send(engine, source, message):
    engine.launch_data(source, message, copies=1)


def rm_gbr_send(engine, source, message):
    engine.launch_data(source, message, copies=engine.params.replication)


def rs_gbr_nc_send(engine, source, message):
    packets = generate_coded_packets(
        message, engine.params.coded_count, engine.coding_rng(message), origin=source
    )
    engine.launch_coded(source, message, packets, spacing=engine.config.per_hop_delay)


def rs_gbr_ncack_source(engine, source, message):
    """Paced generation: one packet per spacing until ACKed or capped."""
    packets = generate_coded_packets(
        message, engine.params.coded_cap, engine.coding_rng(message), origin=source
    )
    engine.start_paced(source, message, packets, spacing=engine.generation_spacing(source))


SENDERS = {
    ProtocolKind.RS_GBR: rs_gbr_send,
    ProtocolKind.RM_GBR: rm_gbr_send,
    ProtocolKind.RS_GBR_NC: rs_gbr_nc_send,
    ProtocolKind.RS_GBR_NCACK: rs_gbr_ncack_source,
}
