# test_channel.py 间隙连接链路、噪声信道与逐跳转发
import math
import random
from collections import deque
from dataclasses import replace

import pytest

from dna_netstack.channel import (
    DROPPED, DeliveryStats, GapJunctionLink, NoiseModel, Topology, route_and_deliver,
    set_phosphorylation, stream_id, switch_links, transmit,
)
from dna_netstack.errors import NoRouteError, RangeError, TopologyError
from dna_netstack.stack import BROADCAST_ADDR, Address, StackConfig, decode_message, encode_message
from dna_netstack.topology import line_topology, star_topology

CFG = StackConfig()


def _open_link():
    return GapJunctionLink((1, 2), phosphorylation=1.0)


def test_link_threshold_is_inclusive():
    link = GapJunctionLink((1, 2), threshold=0.5)
    assert not link.is_open
    set_phosphorylation(link, 0.5)
    assert link.is_open
    set_phosphorylation(link, 0.49)
    assert not link.is_open
    assert link.link_id == "0001-0002"
    assert link.other(1) == 2
    with pytest.raises(TopologyError):
        link.other(3)


@pytest.mark.parametrize("kw", [{"threshold": 0.0}, {"threshold": 1.0}, {"phosphorylation": 1.5}])
def test_link_ranges(kw):
    with pytest.raises(RangeError):
        GapJunctionLink((1, 2), **kw)
    with pytest.raises(RangeError):
        set_phosphorylation(GapJunctionLink((1, 2)), -0.1)


def test_noise_model_ranges():
    with pytest.raises(RangeError):
        NoiseModel(p_sub=1.2)
    with pytest.raises(RangeError):
        NoiseModel(p_sub=0.6, p_del=0.6)
    assert NoiseModel().silent


def test_closed_link_drops():
    assert transmit("ACGT", GapJunctionLink((1, 2)), NoiseModel(), 0) is DROPPED
    assert not DROPPED


def test_silent_channel_is_identity():
    assert transmit("ACGTACGT", _open_link(), NoiseModel(seed=4), 9) == "ACGTACGT"


def test_transmit_is_deterministic_per_stream():
    seq = "ACGT" * 2500
    noise = NoiseModel(p_sub=0.05, p_ins=0.01, p_del=0.01, seed=7)
    a = transmit(seq, _open_link(), noise, 3)
    assert a == transmit(seq, _open_link(), noise, 3)
    assert a != transmit(seq, _open_link(), noise, 4)
    assert a != transmit(seq, _open_link(), replace(noise, seed=8), 3)


def test_substitution_rate():
    n, p = 1_000_000, 0.01
    out = transmit("A" * n, _open_link(), NoiseModel(p_sub=p, seed=1), 0)
    assert len(out) == n
    changed = n - out.count("A")
    assert abs(changed - n * p) <= 3 * math.sqrt(n * p * (1 - p))


def test_indel_rates_change_length():
    n = 200_000
    seq = "C" * n
    shorter = transmit(seq, _open_link(), NoiseModel(p_del=0.01, seed=1), 0)
    longer = transmit(seq, _open_link(), NoiseModel(p_ins=0.01, seed=1), 0)
    assert 0.009 * n < n - len(shorter) < 0.011 * n
    assert 0.009 * n < len(longer) - n < 0.011 * n


def test_stream_id_depends_on_every_field():
    base = stream_id(0, 1, 1, 2)
    assert base == stream_id(0, 1, 1, 2)
    assert len({base, stream_id(1, 1, 1, 2), stream_id(0, 2, 1, 2),
                stream_id(0, 1, 2, 2), stream_id(0, 1, 1, 3)}) == 5
    assert 0 <= base < 2 ** 64


def test_switch_links_opens_only_routed_interfaces():
    topo = star_topology(1, [2, 3, 4])
    opened = switch_links(topo.nodes[1], 3, topo.links)
    assert opened == {"0001-0003"}
    assert [lid for lid, l in sorted(topo.links.items()) if l.is_open] == ["0001-0003"]
    opened = switch_links(topo.nodes[1], BROADCAST_ADDR, topo.links)
    assert all(l.is_open for l in topo.links.values())
    with pytest.raises(NoRouteError):
        switch_links(topo.nodes[1], 9, topo.links)


def test_topology_rejects_bad_links():
    topo = Topology()
    topo.add_node(1)
    topo.add_node(2)
    topo.add_link(1, 2)
    with pytest.raises(TopologyError):
        topo.add_link(2, 1)
    with pytest.raises(TopologyError):
        topo.add_link(1, 3)
    with pytest.raises(TopologyError):
        topo.add_node(0xFFFF)


def test_two_node_noiseless_send():
    frames = encode_message(b"over the junction", CFG)
    stats = DeliveryStats()
    delivered = route_and_deliver(frames, 1, 2, line_topology([1, 2]), NoiseModel(), stats=stats)
    assert decode_message(delivered[2], CFG) == b"over the junction"
    rows = stats.rows()
    assert rows == [{"hop": 1, "src": "0001", "dst": "0002", "frames_sent": len(frames),
                     "corrupted": 0, "corrected": 0, "dropped": 0}]


def test_static_closed_links_deliver_nothing():
    topo = line_topology([1, 2, 3])
    topo.set_all(0.0)
    frames = encode_message(b"x", replace(CFG, dst_addr=Address(3)))
    stats = DeliveryStats()
    assert route_and_deliver(frames, 1, 3, topo, NoiseModel(), stats=stats, switching=False) == {}
    assert stats.hops == {}


def test_static_open_links_deliver():
    topo = line_topology([1, 2, 3])
    topo.set_all(1.0)
    cfg = replace(CFG, dst_addr=Address(3))
    delivered = route_and_deliver(encode_message(b"x", cfg), 1, 3, topo, NoiseModel(), switching=False)
    assert decode_message(delivered[3], cfg) == b"x"


def test_missing_route_raises():
    topo = line_topology([1, 2])
    with pytest.raises(NoRouteError):
        route_and_deliver(encode_message(b"x", CFG), 1, 5, topo, NoiseModel())
    with pytest.raises(NoRouteError):
        route_and_deliver(encode_message(b"x", CFG), 9, 2, topo, NoiseModel())


def test_repeaters_correct_noise_along_a_line():
    ids = [1, 2, 3, 4]
    cfg = replace(CFG, dst_addr=Address(4), max_segment_payload=256)
    payload = bytes(range(256)) * 2
    stats = DeliveryStats()
    noise = NoiseModel(p_sub=0.002, seed=12)
    delivered = route_and_deliver(encode_message(payload, cfg), 1, 4, line_topology(ids), noise, stats=stats)
    totals = stats.totals()
    assert {hop for hop, _, _ in stats.hops} == {1, 2, 3}
    assert totals.corrupted > 0
    assert totals.corrected > 0
    frames_at_dst = delivered.get(4, [])
    assert len(frames_at_dst) <= len(encode_message(payload, cfg))


def test_ttl_limits_reach():
    cfg = replace(CFG, dst_addr=Address(4), ttl=2)
    stats = DeliveryStats()
    delivered = route_and_deliver(encode_message(b"far", cfg), 1, 4, line_topology([1, 2, 3, 4]),
                                  NoiseModel(), stats=stats)
    assert delivered == {}
    assert stats.ttl_expired == 1


def test_same_seed_same_stats():
    cfg = replace(CFG, dst_addr=Address(3))
    frames = encode_message(bytes(300), cfg)
    noise = NoiseModel(p_sub=0.01, p_ins=0.001, p_del=0.001, seed=5)
    runs = []
    for _ in range(2):
        st = DeliveryStats()
        route_and_deliver(frames, 1, 3, line_topology([1, 2, 3]), noise, stats=st)
        runs.append(st.rows())
    assert runs[0] == runs[1]


def test_relay_drops_frames_with_damaged_network_header():
    # 无 ECC 时，两处错误可以互相抵消校验和而落在网络层标签上
    cfg = replace(CFG, dst_addr=Address(3), ecc_mode="none")
    frames = encode_message(bytes(range(256)) * 8, cfg)
    topo = line_topology([1, 2, 3])
    relay_dropped = 0
    for seed in range(300):
        st = DeliveryStats()
        delivered = route_and_deliver(frames, 1, 3, topo, NoiseModel(p_sub=0.02, seed=seed), stats=st)
        assert len(delivered.get(3, [])) <= len(frames)
        relay_dropped += st.hop(1, 1, 2).dropped
    assert relay_dropped > 0


# ---- 随机拓扑上的切换性质 ----

def _random_topology(rng: random.Random):
    n = rng.randint(2, 12)
    ids = rng.sample(range(1, 500), n)
    topo = Topology()
    for nid in ids:
        topo.add_node(nid)
    adj = {nid: set() for nid in ids}
    for i in range(1, n):
        a, b = ids[i], ids[rng.randrange(i)]
        topo.add_link(a, b, threshold=rng.uniform(0.1, 0.9))
        adj[a].add(b)
        adj[b].add(a)
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(ids, 2)
        if b not in adj[a]:
            topo.add_link(a, b, threshold=rng.uniform(0.1, 0.9))
            adj[a].add(b)
            adj[b].add(a)
    dist = {}
    for src in ids:
        d = {src: 0}
        q = deque([src])
        while q:
            u = q.popleft()
            for v in sorted(adj[u]):
                if v not in d:
                    d[v] = d[u] + 1
                    q.append(v)
        dist[src] = d
    # 每个节点对每个目的地只记一个最短路的下一跳
    for at in ids:
        for dst in ids:
            if at != dst:
                via = min(v for v in adj[at] if dist[v][dst] == dist[at][dst] - 1)
                topo.add_route(at, dst, via)
    for link in topo.links.values():
        set_phosphorylation(link, rng.random())
    return topo, ids, dist


def test_switching_on_random_topologies():
    rng = random.Random(2024)
    for trial in range(100):
        topo, ids, dist = _random_topology(rng)
        src, dst = rng.sample(ids, 2)
        ttl = rng.randint(1, 6)
        noise = NoiseModel(seed=trial)

        uni = StackConfig(src_addr=Address(src), dst_addr=Address(dst), ttl=16)
        delivered = route_and_deliver(encode_message(b"uni", uni), src, dst, topo, noise)
        assert set(delivered) == {dst}
        assert decode_message(delivered[dst], uni) == b"uni"

        bcast = StackConfig(src_addr=Address(src), dst_addr=BROADCAST_ADDR, ttl=ttl)
        delivered = route_and_deliver(encode_message(b"all", bcast), src, BROADCAST_ADDR, topo, noise)
        reachable = {n for n in ids if n != src and dist[src][n] <= ttl}
        assert set(delivered) == reachable
        for node in reachable:
            assert decode_message(delivered[node], bcast, local_addr=Address(node)) == b"all"

        topo.set_all(0.0)
        assert route_and_deliver(encode_message(b"none", uni), src, dst, topo, noise,
                                 switching=False) == {}
