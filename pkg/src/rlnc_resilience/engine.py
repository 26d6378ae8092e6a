"""Deterministic discrete-event simulation of one deployment under attack.

Time is integer ticks. Links are lossless; the only loss mechanisms are
malicious relays, TTL expiry and the simulation horizon.
"""
import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import topology as topo_mod
from .codec import SourceMessage
from .protocols import (
    SENDERS,
    STRANDED,
    ProtocolKind,
    ProtocolParams,
    SinkResult,
    SinkState,
    rs_gbr_next_hop,
    sink_on_coded_packet,
    sink_on_data_packet,
    sink_send_ack,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    node_count: int = 300
    side: float = 100.0
    radio_range: float = 20.0
    protocol: ProtocolKind = ProtocolKind.RS_GBR
    params: ProtocolParams = field(default_factory=ProtocolParams)
    malicious_fraction: float = 0.0
    messages_per_source: int = 5
    sim_horizon: int = 2000
    per_hop_delay: int = 1
    k: int = 4
    header_bits: int = 64
    id_bits: int = 32
    coeff_bits_per_entry: int = 8
    payload_bits: int = 32
    master_seed: int = 0

    def validate(self):
        if self.node_count < 1 or self.side <= 0 or self.radio_range <= 0:
            raise ConfigError("node_count >= 1, side > 0 and radio_range > 0 required")
        if not (0.0 <= self.malicious_fraction <= 1.0):
            raise ConfigError("malicious_fraction must lie in [0, 1]")
        for name in ("messages_per_source", "sim_horizon", "per_hop_delay", "k",
                     "header_bits", "id_bits", "coeff_bits_per_entry", "payload_bits"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.payload_bits % (8 * self.k):
            raise ConfigError("payload_bits must split into k whole-byte chunks")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        try:
            self.params.validate(self.k)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def with_(self, **changes):
        pchanges = {k: changes.pop(k) for k in list(changes) if k in ProtocolParams.__dataclass_fields__}
        cfg = replace(self, **changes)
        if pchanges:
            cfg = replace(cfg, params=replace(cfg.params, **pchanges))
        return cfg


@dataclass
class RunStats:
    messages_sent: int = 0
    messages_delivered: int = 0
    per_message_delay: list = field(default_factory=list)
    bits_transmitted: int = 0
    bits_received: int = 0
    sink_payload_bits: int = 0  # payload bits of every data packet reaching the sink
    delivered_payload_bits: int = 0  # payload bits of delivered messages
    per_source_sent: dict = field(default_factory=dict)
    per_source_delivered: dict = field(default_factory=dict)
    sink_receive_times: list = field(default_factory=list)
    packets_generated: dict = field(default_factory=dict)
    decode_errors: int = 0
    horizon: int = 0
    run_index: int = 0


def packet_bits(kind, config):
    if kind == "data":
        return config.header_bits + config.id_bits + config.payload_bits
    if kind == "coded":
        return (config.header_bits + config.id_bits + config.k * config.coeff_bits_per_entry
                + config.payload_bits // config.k)
    if kind == "ack":
        return config.header_bits + config.id_bits
    raise ValueError(f"unknown packet kind {kind!r}")


@dataclass(frozen=True)
class RunSeeds:
    topology: np.random.SeedSequence
    malicious: np.random.SeedSequence
    traffic: np.random.SeedSequence
    packets: int


def derive_seeds(master_seed, run_index):
    """Independent per-purpose streams for one run.

    None of them depend on the protocol or the malicious fraction, so every
    cell of a sweep shares topology, traffic and per-packet route draws.
    """
    root = np.random.SeedSequence([master_seed, run_index])
    topo_ss, mal_ss, traffic_ss, packet_ss = root.spawn(4)
    return RunSeeds(topo_ss, mal_ss, traffic_ss, int(packet_ss.generate_state(1)[0]))


def select_malicious(topo, fraction, rng):
    """``floor(fraction * node_count)`` non-sink nodes, nested in ``fraction`` for a fixed rng."""
    candidates = [v for v in range(topo.node_count) if v != topo.sink]
    order = rng.permutation(len(candidates))
    count = min(int(math.floor(fraction * topo.node_count + 1e-9)), len(candidates))
    return frozenset(candidates[i] for i in order[:count].tolist())


def generate_traffic(config, topo, malicious, rng):
    """Origination schedule as sorted ``(time, source, SourceMessage)`` tuples.

    Times and payloads are drawn for every non-sink node before filtering so
    the schedule of honest nodes is unchanged by the malicious set.
    """
    n = topo.node_count - 1
    window = int(0.8 * config.sim_horizon)
    nbytes = config.payload_bits // 8
    times = rng.integers(0, window + 1, size=(n, config.messages_per_source)).tolist()
    payloads = rng.integers(0, 256, size=(n, config.messages_per_source, nbytes), dtype=np.uint8)
    out = []
    for idx in range(n):
        node = idx + 1
        if node in malicious or not topo.connected(node):
            continue
        for seq, t in enumerate(times[idx]):
            msg = SourceMessage((node, seq), payloads[idx, seq].tobytes(), config.k)
            out.append((t, node, msg))
    out.sort(key=lambda e: (e[0], e[1], e[2].id[1]))
    return out


@dataclass
class Frame:
    kind: str
    message_id: tuple
    origin: int
    bits: int
    payload_bits: int
    draws: list = None
    packet: object = None
    path: list = field(default_factory=list)
    route: list = None


TRAFFIC, GENERATE, ARRIVAL, ACK = "TrafficStart", "GenerateNext", "PacketArrival", "AckArrival"


class Simulation:
    def __init__(self, config, topo, malicious, packet_seed, event_log=None):
        self.config = config
        self.params = config.params
        self.topo = topo
        self.malicious = malicious
        self.packet_seed = packet_seed
        self.event_log = event_log
        self.kind = ProtocolKind(config.protocol)
        self.ttl = self.params.ttl or max(1, 8 * max(1, topo.diameter()))
        self.now = 0
        self._queue = []
        self._seq = 0
        self.stats = RunStats(horizon=config.sim_horizon)
        self.sink = SinkState(k=config.k)
        self.origin_time = {}
        self.originals = {}
        self.acked = set()
        self._bits = {k: packet_bits(k, config) for k in ("data", "coded", "ack")}

    # -- queue ---------------------------------------------------------------
    def schedule(self, time, kind, node, item):
        if time < self.now:
            raise RuntimeError("event scheduled in the past")
        heapq.heappush(self._queue, (time, self._seq, kind, node, item))
        self._seq += 1

    def log(self, kind, node, message_id, detail=""):
        if self.event_log is not None:
            mid = f"{message_id[0]}:{message_id[1]}" if message_id else ""
            self.event_log.append(f"{self.now},{kind},{node},{mid},{detail}")

    # -- per-message random streams -----------------------------------------
    def route_draws(self, message, count):
        source, seq = message.id
        rng = np.random.default_rng([self.packet_seed, source, seq, 0])
        return rng.random((count, self.ttl)).tolist()

    def coding_rng(self, message):
        source, seq = message.id
        return np.random.default_rng([self.packet_seed, source, seq, 1])

    def generation_spacing(self, source):
        return self.params.generation_spacing or 2 * self.topo.gradient[source] * self.config.per_hop_delay

    # -- sources ---------------------------------------------------------------
    def launch_data(self, source, message, copies):
        draws = self.route_draws(message, copies)
        delay = self.config.per_hop_delay
        for i in range(copies):
            frame = Frame("data", message.id, source, self._bits["data"], self.config.payload_bits, draws[i])
            self.schedule(self.now + i * delay, ARRIVAL, source, frame)
        self.stats.packets_generated[message.id] = copies

    def _coded_frame(self, source, pkt, draws):
        return Frame("coded", pkt.message_id, source, self._bits["coded"],
                     self.config.payload_bits // self.config.k, draws, pkt)

    def launch_coded(self, source, message, packets, spacing):
        draws = self.route_draws(message, len(packets))
        for i, pkt in enumerate(packets):
            self.schedule(self.now + i * spacing, ARRIVAL, source, self._coded_frame(source, pkt, draws[i]))
        self.stats.packets_generated[message.id] = len(packets)

    def start_paced(self, source, message, packets, spacing):
        draws = self.route_draws(message, len(packets))
        self.stats.packets_generated[message.id] = 0
        self.schedule(self.now, GENERATE, source, (message.id, packets, draws, spacing, 0))

    def _on_generate(self, source, item):
        mid, packets, draws, spacing, i = item
        if mid in self.acked or i >= len(packets):
            self.log(GENERATE, source, mid, "stop")
            return
        self.stats.packets_generated[mid] = i + 1
        self.log(GENERATE, source, mid, f"packet={i}")
        self._on_arrival(source, self._coded_frame(source, packets[i], draws[i]))
        self.schedule(self.now + spacing, GENERATE, source, (mid, packets, draws, spacing, i + 1))

    # -- transmission ------------------------------------------------------------
    def _transmit(self, frame, receiver, kind=ARRIVAL):
        self.stats.bits_transmitted += frame.bits
        self.schedule(self.now + self.config.per_hop_delay, kind, receiver, frame)

    def _on_arrival(self, node, frame):
        received = bool(frame.path)
        if received and (node == self.topo.sink or node not in self.malicious):
            self.stats.bits_received += frame.bits
        if node == self.topo.sink:
            self.log(ARRIVAL, node, frame.message_id, f"{frame.kind} at sink")
            self._at_sink(frame)
            return
        if node in self.malicious:
            self.log(ARRIVAL, node, frame.message_id, f"{frame.kind} dropped by malicious node")
            return
        hops = len(frame.path)
        frame.path.append(node)
        if hops >= self.ttl:
            self.log(ARRIVAL, node, frame.message_id, "ttl expired")
            return
        nxt = rs_gbr_next_hop(self.topo, node, frame.draws[hops], self.params.p_lower)
        if nxt is STRANDED:
            self.log(ARRIVAL, node, frame.message_id, "stranded")
            return
        self.log(ARRIVAL, node, frame.message_id, f"{frame.kind} -> {nxt}")
        self._transmit(frame, nxt)

    def _at_sink(self, frame):
        st = self.stats
        st.sink_payload_bits += frame.payload_bits
        st.sink_receive_times.append(self.now)
        if frame.kind == "data":
            result = sink_on_data_packet(self.sink, frame.message_id, self.now)
        else:
            result = sink_on_coded_packet(self.sink, frame.packet, self.now)
        if result is not SinkResult.DECODED_NOW:
            return
        mid = frame.message_id
        if frame.kind == "coded" and self.sink.payloads.pop(mid) != self.originals[mid]:
            st.decode_errors += 1
        st.messages_delivered += 1
        st.delivered_payload_bits += self.config.payload_bits
        st.per_message_delay.append(self.now - self.origin_time[mid])
        st.per_source_delivered[frame.origin] = st.per_source_delivered.get(frame.origin, 0) + 1
        self.log("Delivered", self.topo.sink, mid, f"delay={self.now - self.origin_time[mid]}")
        if self.kind is ProtocolKind.RS_GBR_NCACK:
            sink_send_ack(self, self.sink, mid, frame)

    def send_ack(self, message_id, route):
        """``route`` lists the nodes to visit, ending at the message source."""
        if not route:
            return
        frame = Frame("ack", message_id, route[-1], self._bits["ack"], 0, route=route, path=[self.topo.sink])
        self.log(ACK, self.topo.sink, message_id, f"ack -> {route[0]}")
        self._transmit(frame, route[0], ACK)

    def _on_ack(self, node, frame):
        if node == frame.origin or node not in self.malicious:
            self.stats.bits_received += frame.bits
        if node == frame.origin:
            self.acked.add(frame.message_id)
            self.log(ACK, node, frame.message_id, "ack received by source")
            return
        if node in self.malicious:
            self.log(ACK, node, frame.message_id, "ack dropped by malicious node")
            return
        frame.path.append(node)
        nxt = frame.route[len(frame.path) - 1]
        self.log(ACK, node, frame.message_id, f"ack -> {nxt}")
        self._transmit(frame, nxt, ACK)

    # -- main loop -----------------------------------------------------------------
    def add_traffic(self, schedule):
        for t, source, msg in schedule:
            self.schedule(t, TRAFFIC, source, msg)

    def _on_traffic(self, source, msg):
        st = self.stats
        st.messages_sent += 1
        st.per_source_sent[source] = st.per_source_sent.get(source, 0) + 1
        self.origin_time[msg.id] = self.now
        self.originals[msg.id] = msg.payload
        self.log(TRAFFIC, source, msg.id, self.kind.value)
        SENDERS[self.kind](self, source, msg)

    def run(self):
        handlers = {TRAFFIC: self._on_traffic, GENERATE: self._on_generate,
                    ARRIVAL: self._on_arrival, ACK: self._on_ack}
        horizon = self.config.sim_horizon
        while self._queue and self._queue[0][0] <= horizon:
            time, _, kind, node, item = heapq.heappop(self._queue)
            self.now = time
            handlers[kind](node, item)
        for src in self.stats.per_source_sent:
            self.stats.per_source_delivered.setdefault(src, 0)
        return self.stats


def build_world(config, run_index=0):
    """Topology, malicious set and traffic for one run index."""
    seeds = derive_seeds(config.master_seed, run_index)
    topo = topo_mod.generate(config.node_count, config.side, config.radio_range,
                             np.random.default_rng(seeds.topology))
    malicious = select_malicious(topo, config.malicious_fraction, np.random.default_rng(seeds.malicious))
    traffic = generate_traffic(config, topo, malicious, np.random.default_rng(seeds.traffic))
    return topo, malicious, traffic, seeds.packets


def simulate(config, topo, malicious, traffic, packet_seed=0, event_log=None):
    """Run a hand-built scenario; ``traffic`` is ``[(time, source, SourceMessage)]``."""
    config.validate()
    sim = Simulation(config, topo, frozenset(malicious), packet_seed, event_log)
    sim.add_traffic(traffic)
    return sim.run()


def run(config, run_index=0, event_log=None):
    config.validate()
    topo, malicious, traffic, packet_seed = build_world(config, run_index)
    stats = simulate(config, topo, malicious, traffic, packet_seed, event_log)
    stats.run_index = run_index
    return stats


def _run_indexed(args):
    config, index = args
    return run(config, index)


def repeat_runs(config, n_runs, jobs=1):
    if n_runs < 1:
        raise ConfigError("n_runs must be >= 1")
    config.validate()
    tasks = [(config, i) for i in range(n_runs)]
    if jobs <= 1:
        return [_run_indexed(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_indexed, tasks))
