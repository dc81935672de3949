# -*- coding: utf-8 -*-
# dna_netstack/channel.py
"""
细胞网络物理层：间隙连接链路（磷酸化阈值控制通断）、带种子的噪声信道、逐跳转发。
"""
from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Deque, Dict, Iterable, List, Mapping, Optional, Set, Tuple, Union

import numpy as np

from .errors import DnaNetError, NoRouteError, RangeError, TopologyError
from .noise import derived_rng, from_values, to_values
from .stack import (
    BROADCAST, Address, Frame, Packet, datalink_receive, datalink_send,
)

DEFAULT_THRESHOLD = 0.5


# ========== 链路与节点 ==========

def link_id_for(a: int, b: int) -> str:
    lo, hi = sorted((a, b))
    return f"{lo:04x}-{hi:04x}"


@dataclass
class GapJunctionLink:
    endpoints: Tuple[int, int]
    phosphorylation: float = 0.0
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise RangeError(f"threshold {self.threshold} outside (0, 1)")
        if not 0.0 <= self.phosphorylation <= 1.0:
            raise RangeError(f"phosphorylation {self.phosphorylation} outside [0, 1]")

    @property
    def link_id(self) -> str:
        return link_id_for(*self.endpoints)

    @property
    def is_open(self) -> bool:
        return self.phosphorylation >= self.threshold

    def other(self, node_id: int) -> int:
        a, b = self.endpoints
        if node_id == a:
            return b
        if node_id == b:
            return a
        raise TopologyError(f"node {node_id:04x} is not an endpoint of link {self.link_id}")


def set_phosphorylation(link: GapJunctionLink, level: float) -> GapJunctionLink:
    """调节连接蛋白磷酸化水平；通断由阈值（含等号）决定。"""
    if not 0.0 <= level <= 1.0:
        raise RangeError(f"phosphorylation level {level} outside [0, 1]")
    link.phosphorylation = float(level)
    return link


@dataclass
class CellNode:
    id: int
    interfaces: List[str] = field(default_factory=list)
    routing_table: Dict[int, Set[str]] = field(default_factory=dict)

    def add_interface(self, link_id: str) -> None:
        if link_id in self.interfaces:
            raise TopologyError(f"node {self.id:04x} already has interface {link_id}")
        self.interfaces.append(link_id)

    def add_route(self, dst: int, link_id: str) -> None:
        if link_id not in self.interfaces:
            raise TopologyError(f"node {self.id:04x} has no interface {link_id}")
        self.routing_table.setdefault(dst, set()).add(link_id)

    def routed_interfaces(self, dst: Union[int, Address]) -> Set[str]:
        d = dst.value if isinstance(dst, Address) else int(dst)
        if d == BROADCAST:
            return set(self.interfaces)
        if d not in self.routing_table:
            raise NoRouteError(f"node {self.id:04x} has no route to {d:04x}")
        return set(self.routing_table[d])


@dataclass
class Topology:
    nodes: Dict[int, CellNode] = field(default_factory=dict)
    links: Dict[str, GapJunctionLink] = field(default_factory=dict)

    def add_node(self, node_id: int) -> CellNode:
        if not 0 <= node_id < BROADCAST:
            raise TopologyError(f"node id {node_id:#x} must be a unicast 16-bit address")
        if node_id in self.nodes:
            raise TopologyError(f"duplicate node {node_id:04x}")
        node = self.nodes[node_id] = CellNode(node_id)
        return node

    def add_link(self, a: int, b: int, threshold: float = DEFAULT_THRESHOLD,
                 phosphorylation: float = 0.0) -> GapJunctionLink:
        for n in (a, b):
            if n not in self.nodes:
                raise TopologyError(f"link endpoint {n:04x} is not a declared node")
        if a == b:
            raise TopologyError(f"self-link on node {a:04x}")
        link = GapJunctionLink((a, b), phosphorylation, threshold)
        if link.link_id in self.links:
            raise TopologyError(f"duplicate link {link.link_id}")
        self.links[link.link_id] = link
        self.nodes[a].add_interface(link.link_id)
        self.nodes[b].add_interface(link.link_id)
        return link

    def add_route(self, at: int, dst: int, via: int) -> None:
        if at not in self.nodes:
            raise TopologyError(f"route at unknown node {at:04x}")
        lid = link_id_for(at, via)
        if lid not in self.links:
            raise TopologyError(f"node {at:04x} has no link to {via:04x}")
        self.nodes[at].add_route(dst, lid)

    def set_all(self, level: float) -> None:
        for link in self.links.values():
            set_phosphorylation(link, level)


def switch_links(node: CellNode, dst: Union[int, Address],
                 links: Mapping[str, GapJunctionLink]) -> Set[str]:
    """为目的地址打开路由表中的接口（广播时全部打开），其余接口全部关闭。"""
    opened = node.routed_interfaces(dst)
    for lid in node.interfaces:
        set_phosphorylation(links[lid], 1.0 if lid in opened else 0.0)
    return opened


# ========== 噪声信道 ==========

@dataclass(frozen=True)
class NoiseModel:
    p_sub: float = 0.0
    p_ins: float = 0.0
    p_del: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_sub", "p_ins", "p_del"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise RangeError(f"{name}={v} outside [0, 1]")
        if self.p_sub + self.p_ins + self.p_del > 1.0 + 1e-12:
            raise RangeError("p_sub + p_ins + p_del must not exceed 1")

    @property
    def silent(self) -> bool:
        return self.p_sub == 0.0 and self.p_ins == 0.0 and self.p_del == 0.0


class _Dropped:
    def __repr__(self) -> str:
        return "DROPPED"

    def __bool__(self) -> bool:
        return False


DROPPED = _Dropped()


def stream_id(frame_index: int, hop: int, from_node: int, to_node: int) -> int:
    """由 (帧序号, 跳数, 发送端, 接收端) 派生的 64 bit 随机流编号，与执行顺序无关。"""
    key = f"{frame_index}:{hop}:{from_node}:{to_node}".encode("ascii")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


def transmit(seq: str, link: GapJunctionLink, noise: NoiseModel, stream: int):
    """
    经链路发送一条序列。链路关闭返回 DROPPED；否则每个核苷酸用同一个均匀变量
    依次判定：删除 / 替换为另外三种之一 / 保留并在其后插入一个随机碱基。
    """
    if not link.is_open:
        return DROPPED
    if noise.silent or not seq:
        return seq
    rng = derived_rng(noise.seed, stream)
    n = len(seq)
    vals = to_values(seq)
    u = rng.random(n)
    shift = rng.integers(1, 4, size=n)
    extra = rng.integers(0, 4, size=n)

    t_del = noise.p_del
    t_sub = t_del + noise.p_sub
    t_ins = t_sub + noise.p_ins
    deleted = u < t_del
    substituted = (u >= t_del) & (u < t_sub)
    inserted = (u >= t_sub) & (u < t_ins)

    out = np.where(substituted, (vals + shift) % 4, vals)
    symbols = np.stack([out, extra], axis=1).ravel()
    keep = np.stack([~deleted, inserted], axis=1).ravel()
    return from_values(symbols[keep])


# ========== 逐跳转发 ==========

@dataclass
class HopStat:
    frames_sent: int = 0
    corrupted: int = 0
    corrected: int = 0
    dropped: int = 0


@dataclass
class DeliveryStats:
    hops: Dict[Tuple[int, int, int], HopStat] = field(default_factory=dict)
    ttl_expired: int = 0

    def hop(self, hop: int, src: int, dst: int) -> HopStat:
        return self.hops.setdefault((hop, src, dst), HopStat())

    def rows(self) -> List[Dict[str, object]]:
        out = []
        for (hop, src, dst), st in sorted(self.hops.items()):
            out.append({
                "hop": hop, "src": f"{src:04x}", "dst": f"{dst:04x}",
                "frames_sent": st.frames_sent, "corrupted": st.corrupted,
                "corrected": st.corrected, "dropped": st.dropped,
            })
        return out

    def totals(self) -> HopStat:
        t = HopStat()
        for st in self.hops.values():
            t.frames_sent += st.frames_sent
            t.corrupted += st.corrupted
            t.corrected += st.corrected
            t.dropped += st.dropped
        return t


def route_and_deliver(
    frames: Iterable[Frame],
    src: Union[int, Address],
    dst: Union[int, Address],
    topo: Topology,
    noise: NoiseModel,
    stats: Optional[DeliveryStats] = None,
    switching: bool = True,
) -> Dict[int, List[Frame]]:
    """
    逐跳转发。每个转发节点：检查并递减 TTL（为 0 则丢弃）→ 切换链路 → 经噪声信道发送。
    中间节点作为中继先做数据链路层纠错与校验，失败的帧被丢弃；目的节点收到的原样帧
    记入投递表，由上层 decode_message 负责最终校验。每个节点对同一帧只处理一次。
    """
    src_id = Address.parse(src).value
    dst_addr = Address.parse(dst)
    if src_id not in topo.nodes:
        raise NoRouteError(f"source {src_id:04x} is not in the topology")
    stats = stats if stats is not None else DeliveryStats()
    delivered: Dict[int, List[Frame]] = {}

    def is_target(node_id: int) -> bool:
        return node_id != src_id and (dst_addr.is_broadcast or node_id == dst_addr.value)

    for fi, frame in enumerate(frames):
        seen = {src_id}
        queue: Deque[Tuple[int, Packet, str, int]] = deque(
            [(src_id, Packet.from_nt(datalink_receive(frame)), frame.ecc_mode, 0)]
        )
        while queue:
            node_id, packet, ecc_mode, hop = queue.popleft()
            if packet.ttl == 0:
                stats.ttl_expired += 1
                continue
            raw = datalink_send(replace(packet, ttl=packet.ttl - 1).to_nt(), ecc_mode).to_nt()

            node = topo.nodes[node_id]
            if switching:
                opened = switch_links(node, dst_addr, topo.links)
            else:
                opened = {lid for lid in node.routed_interfaces(dst_addr) if topo.links[lid].is_open}

            for lid in sorted(opened):
                link = topo.links[lid]
                nxt = link.other(node_id)
                if nxt in seen:
                    continue
                st = stats.hop(hop + 1, node_id, nxt)
                st.frames_sent += 1
                received = transmit(raw, link, noise, stream_id(fi, hop + 1, node_id, nxt))
                if received is DROPPED:
                    st.dropped += 1
                    continue
                seen.add(nxt)
                damaged = received != raw
                if damaged:
                    st.corrupted += 1
                try:
                    rx_frame = Frame.from_nt(received)
                except DnaNetError:
                    st.dropped += 1
                    continue
                # 中继需读出 TTL，网络头损坏的帧按丢弃处理
                try:
                    rx_packet = Packet.from_nt(datalink_receive(rx_frame))
                except DnaNetError:
                    rx_packet = None
                if damaged and rx_packet is not None:
                    st.corrected += 1

                if is_target(nxt):
                    delivered.setdefault(nxt, []).append(rx_frame)
                    if not dst_addr.is_broadcast:
                        continue
                if rx_packet is None:
                    if not is_target(nxt):
                        st.dropped += 1
                    continue
                queue.append((nxt, rx_packet, rx_frame.ecc_mode, hop + 1))
    return delivered
