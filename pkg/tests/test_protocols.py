from functools import lru_cache

import numpy as np
import pytest
from scipy import stats as sps

from rlnc_resilience.codec import CodedPacket, SourceMessage, encode, split_message
from rlnc_resilience.engine import SimConfig, Simulation, simulate
from rlnc_resilience.protocols import (STRANDED, ProtocolKind, ProtocolParams, SinkResult, SinkState,
                                       rs_gbr_next_hop, sink_on_coded_packet)
from rlnc_resilience.topology import from_adjacency, from_positions

P = ProtocolKind


def diamond():
    # sink 0; 1, 2 at gradient 1; 3, 4 at gradient 2 with 3 - 4 linked
    return from_adjacency([[1, 2], [0, 3], [0, 4], [1, 4], [2, 3]])


def line(n):
    return from_positions([[10 * i, 0] for i in range(n)], side=10 * n, radio_range=10)


def messages(source, count, spacing=100, payload=b"\x01\x02\x03\x04"):
    return [(i * spacing, source, SourceMessage((source, i), payload, 4)) for i in range(count)]


def small_config(protocol, **kw):
    return SimConfig(node_count=10, side=10, radio_range=10, protocol=protocol,
                     sim_horizon=kw.pop("sim_horizon", 100_000)).with_(**kw)


def test_forced_lower_choice():
    t = line(3)
    assert all(rs_gbr_next_hop(t, 2, u) == 1 for u in np.linspace(0, 0.999, 50))


def test_next_hop_law():
    t = diamond()
    assert t.groups(3) == ((1,), (4,))
    rng = np.random.default_rng(42)
    picks = [rs_gbr_next_hop(t, 3, u) for u in rng.random(10_000)]
    freq = picks.count(1) / len(picks)
    assert abs(freq - 0.8) <= 0.02
    observed = [picks.count(1), picks.count(4)]
    assert sps.chisquare(observed, [8000, 2000]).pvalue > 1e-3


def test_uniform_within_group():
    t = from_adjacency([[1, 2, 3], [0, 4], [0, 4], [0, 4], [1, 2, 3]])
    rng = np.random.default_rng(1)
    picks = [rs_gbr_next_hop(t, 4, u) for u in rng.random(9000)]
    counts = [picks.count(v) for v in (1, 2, 3)]
    assert sps.chisquare(counts).pvalue > 1e-3


def test_fallback_and_stranded():
    t = diamond()
    t.gradient = [0, 1, 1, 1, 1]  # node 3 is not adjacent to the sink
    t._groups = None
    assert t.groups(3) == ((), (1, 4))
    assert rs_gbr_next_hop(t, 3, 0.1) in (1, 4)  # lower empty, falls back to equal
    t.gradient = [0, 5, 5, 7, 9]
    t._groups = None
    assert rs_gbr_next_hop(t, 3, 0.5) is STRANDED
    assert rs_gbr_next_hop(t, 0, 0.5) is STRANDED


def test_adjacent_source_delivers_in_one_hop():
    cfg = small_config(P.RS_GBR)
    st = simulate(cfg, line(2), set(), messages(1, 1))
    assert st.messages_delivered == 1 and st.per_message_delay == [1]


def test_all_neighbours_malicious_blocks_delivery():
    t = diamond()
    for proto in P:
        st = simulate(small_config(proto), t, {1, 4}, messages(3, 5))
        assert st.messages_delivered == 0
        assert st.messages_sent == 5


def test_replication_one_matches_rs_gbr_exactly():
    a = SimConfig(node_count=80, side=40, radio_range=10, malicious_fraction=0.2)
    from rlnc_resilience.engine import run

    rs = run(a.with_(protocol=P.RS_GBR), 3)
    rm = run(a.with_(protocol=P.RM_GBR, replication=1), 3)
    assert (rs.messages_delivered, rs.bits_transmitted, rs.per_message_delay) == \
           (rm.messages_delivered, rm.bits_transmitted, rm.per_message_delay)


def six_node():
    # sink 0; A=1 (malicious), B=2, C=3 next to the sink; S=4 reaches all three
    # plus D=5 at the same gradient, and D's only lower neighbour is A.
    return from_adjacency([[1, 2, 3], [0, 4, 5], [0, 4], [0, 4], [1, 2, 3, 5], [1, 4]])


def exact_delivery(topo, malicious, source, ttl, p_lower=0.8):
    @lru_cache(maxsize=None)
    def f(node, used):
        if node == topo.sink:
            return 1.0
        if node in malicious or used >= ttl:
            return 0.0
        lower, equal = topo.groups(node)
        total = 0.0
        for group, p in ((lower, p_lower), (equal, 1 - p_lower)):
            group = group or (equal if group is lower else lower)
            total += p * sum(f(v, used + 1) for v in group) / len(group)
        return total

    return f(source, 0)


def test_replication_beats_single_path_on_six_node_topology():
    t = six_node()
    mal = {1}
    ttl = 8 * t.diameter()
    p_rs = exact_delivery(t, mal, 4, ttl)
    p_rm = 1 - (1 - p_rs) ** 4
    assert p_rs == pytest.approx(0.8 * 2 / 3 / 0.96, rel=1e-6)
    n = 4000
    rs = simulate(small_config(P.RS_GBR), t, mal, messages(4, n, spacing=10), packet_seed=5)
    rm = simulate(small_config(P.RM_GBR, replication=4), t, mal, messages(4, n, spacing=10), packet_seed=5)
    for st, p in ((rs, p_rs), (rm, p_rm)):
        assert st.messages_sent == n
        assert abs(st.messages_delivered / n - p) < 4 * np.sqrt(p * (1 - p) / n)
    assert rm.messages_delivered > rs.messages_delivered


def test_duplicates_do_not_count_twice():
    st = simulate(small_config(P.RM_GBR, replication=4), diamond(), set(), messages(3, 10))
    assert st.messages_delivered == 10
    assert len(st.sink_receive_times) == 40


def test_nc_emits_sixteen_coded_packets():
    st = simulate(small_config(P.RS_GBR_NC), diamond(), set(), messages(3, 20))
    assert set(st.packets_generated.values()) == {16}
    assert st.messages_delivered == 20 and st.decode_errors == 0


def identity_packets(payload=b"\x05\x06\x07\x08"):
    chunks = split_message(SourceMessage(7, payload, 4))
    eye = [tuple(int(i == j) for j in range(4)) for i in range(4)]
    return [CodedPacket(7, row, encode(chunks, row)) for row in eye]


def test_sink_decodes_on_fourth_packet_then_drops_stale():
    sink = SinkState()
    pkts = identity_packets()
    assert [sink_on_coded_packet(sink, p) for p in pkts[:3]] == [SinkResult.BUFFERED] * 3
    assert sink_on_coded_packet(sink, pkts[0]) is SinkResult.BUFFERED
    assert sink.decoders[7].rank == 3
    assert sink_on_coded_packet(sink, pkts[3]) is SinkResult.DECODED_NOW
    assert 7 in sink.decoded_ids and 7 not in sink.decoders
    assert sink_on_coded_packet(sink, pkts[1]) is SinkResult.DROPPED_AS_STALE


def test_three_packets_never_decode():
    sink = SinkState()
    for p in identity_packets()[:3]:
        sink_on_coded_packet(sink, p)
    assert not sink.decoded_ids


def ncack_line(**kw):
    log = []
    cfg = small_config(P.RS_GBR_NCACK, **kw)
    st = simulate(cfg, line(5), set(), messages(4, 1), packet_seed=1, event_log=log)
    return st, log


def test_ncack_stops_after_ack_on_line():
    # source gradient 4, spacing 8: decode at t=28 after the 4th packet, ACK
    # back at t=32, the tick on which the 5th packet was already due.
    st, log = ncack_line()
    assert st.messages_delivered == 1
    assert st.per_message_delay == [28]
    assert st.packets_generated[(4, 0)] == 5
    assert any("ack received by source" in line for line in log)
    acked_at = next(int(line.split(",")[0]) for line in log if "ack received" in line)
    assert acked_at == 32


def test_ncack_longer_spacing_stops_exactly():
    st, _ = ncack_line(generation_spacing=9)
    assert st.packets_generated[(4, 0)] == 4


def test_ncack_bits_include_acks():
    st, _ = ncack_line()
    data_hops = 5 * 4
    ack_hops = 4
    assert st.bits_transmitted == data_hops * 136 + ack_hops * 96
    assert st.bits_received == st.bits_transmitted


def test_ncack_blocked_source_hits_cap():
    cfg = small_config(P.RS_GBR_NCACK)
    st = simulate(cfg, line(3), {1}, messages(2, 1))
    assert st.packets_generated[(2, 0)] == 32
    assert st.messages_delivered == 0


def test_ncack_cap_equal_k_lossless():
    st, _ = ncack_line(coded_cap=4)
    assert st.packets_generated[(4, 0)] == 4
    assert st.messages_delivered == 1


def test_ack_lost_on_malicious_reverse_hop():
    cfg = small_config(P.RS_GBR_NCACK)
    sim = Simulation(cfg, line(4), frozenset({2}), 0)
    sim.send_ack((3, 0), [1, 2, 3])
    sim.run()
    assert (3, 0) not in sim.acked
    assert sim.stats.bits_transmitted == 2 * 96
    assert sim.stats.bits_received == 96


def test_ttl_bounds_walk_length():
    t = line(6)
    cfg = small_config(P.RS_GBR, ttl=3)
    st = simulate(cfg, t, set(), [(0, 3, SourceMessage((3, 0), b"abcd")),
                                  (0, 4, SourceMessage((4, 0), b"abcd"))])
    assert st.messages_delivered == 1 and st.per_message_delay == [3]


@pytest.mark.parametrize("bad", [dict(p_lower=0.7), dict(coded_cap=3), dict(replication=0)])
def test_protocol_params_validation(bad):
    with pytest.raises(ValueError):
        ProtocolParams(**bad).validate(4)
