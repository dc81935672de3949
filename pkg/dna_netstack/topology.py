# -*- coding: utf-8 -*-
# dna_netstack/topology.py
"""
拓扑文件（按行）：
  node <hex16>
  link <hex16> <hex16> [threshold] [phosphorylation]
  route <hex16> <hex16> via <hex16>      # 在节点 at 上，去往 dst 经邻居 via
'#' 之后为注释。
"""
from __future__ import annotations

import re
from typing import List, Sequence, Tuple

from .channel import DEFAULT_THRESHOLD, Topology
from .errors import DnaNetError, TopologyError

_HEX16 = re.compile(r"^(?:0x)?[0-9a-fA-F]{1,4}$")


def _tokens(line: str) -> List[Tuple[str, int]]:
    """切词并记下每个词的起始列（1 起）"""
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_topology(text: str, path: str = "<string>") -> Topology:
    topo = Topology()
    pending_routes = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue

        def fail(msg: str, col: int = toks[0][1]):
            raise TopologyError(msg, path, lineno, col)

        def hex16(i: int) -> int:
            if i >= len(toks):
                fail(f"missing field {i}", len(line.rstrip()) + 1)
            word, col = toks[i]
            if not _HEX16.match(word):
                fail(f"expected a 16-bit hex id, found {word!r}", col)
            return int(word, 16)

        def real(i: int) -> float:
            word, col = toks[i]
            try:
                return float(word)
            except ValueError:
                fail(f"expected a number, found {word!r}", col)

        kw = toks[0][0].lower()
        try:
            if kw == "node":
                if len(toks) != 2:
                    fail("usage: node <hex16>")
                topo.add_node(hex16(1))
            elif kw == "link":
                if not 3 <= len(toks) <= 5:
                    fail("usage: link <hex16> <hex16> [threshold] [phosphorylation]")
                a, b = hex16(1), hex16(2)
                threshold = real(3) if len(toks) > 3 else DEFAULT_THRESHOLD
                level = real(4) if len(toks) > 4 else 0.0
                topo.add_link(a, b, threshold, level)
            elif kw == "route":
                if len(toks) != 5 or toks[3][0].lower() != "via":
                    fail("usage: route <hex16> <hex16> via <hex16>")
                # 路由可以写在链路声明之前，最后统一挂接
                pending_routes.append((lineno, toks[0][1], hex16(1), hex16(2), hex16(4)))
            else:
                fail(f"unknown directive {toks[0][0]!r}")
        except TopologyError as e:
            if e.line:
                raise
            fail(e.reason)
        except DnaNetError as e:
            fail(str(e))

    for lineno, col, at, dst, via in pending_routes:
        try:
            topo.add_route(at, dst, via)
        except DnaNetError as e:
            raise TopologyError(getattr(e, "reason", str(e)), path, lineno, col) from None
    return topo


def read_topology(path: str) -> Topology:
    with open(path, "r", encoding="utf-8") as f:
        return parse_topology(f.read(), path=path)


def format_topology(topo: Topology) -> str:
    lines = ["# dna-netstack topology"]
    for nid in sorted(topo.nodes):
        lines.append(f"node {nid:04x}")
    for lid in sorted(topo.links):
        link = topo.links[lid]
        a, b = link.endpoints
        lines.append(f"link {a:04x} {b:04x} {link.threshold:g} {link.phosphorylation:g}")
    for nid in sorted(topo.nodes):
        node = topo.nodes[nid]
        for dst in sorted(node.routing_table):
            for lid in sorted(node.routing_table[dst]):
                via = topo.links[lid].other(nid)
                lines.append(f"route {nid:04x} {dst:04x} via {via:04x}")
    return "\n".join(lines) + "\n"


def line_topology(ids: Sequence[int], threshold: float = DEFAULT_THRESHOLD) -> Topology:
    """链状拓扑，并为每对节点写好双向的最短路由。"""
    topo = Topology()
    for nid in ids:
        topo.add_node(nid)
    for a, b in zip(ids, ids[1:]):
        topo.add_link(a, b, threshold)
    for i, at in enumerate(ids):
        for j, dst in enumerate(ids):
            if i != j:
                topo.add_route(at, dst, ids[i + 1] if j > i else ids[i - 1])
    return topo


def star_topology(center: int, leaves: Sequence[int], threshold: float = DEFAULT_THRESHOLD) -> Topology:
    topo = Topology()
    topo.add_node(center)
    for leaf in leaves:
        topo.add_node(leaf)
        topo.add_link(center, leaf, threshold)
        topo.add_route(center, leaf, leaf)
    for leaf in leaves:
        for other in [center, *leaves]:
            if other != leaf:
                topo.add_route(leaf, other, center)
    return topo
