# -*- coding: utf-8 -*-
# dna_netstack/stack.py
"""
七层编解码流水线。

编码方向（自上而下）：
  application  AA | app_id(8)       + 填充后的负载
  presentation AC | mode(2)
  session      AG | session_id(16)
  transport    AT | seg_index(8) | seg_total(8) | payload_len(8) | checksum(4)
  network      CA | dst(8) | src(8) | ttl(4)
  datalink     CC | ecc_mode(2) | frame_checksum(4) | body（ECC 之后的网络包）

每层报头都通过 ligate 连接到下层载荷前面，因此线上的顺序（最外层在前）与挂接顺序相反。
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .codons import codon_view
from .errors import (
    AddressError, ChecksumError, ConfigError, EmptyPayloadError, HeaderError,
    LengthError, MissingSegmentError, StateError, UncorrectableError,
)
from .nucleo import (
    DEFAULT_ENZYME, EnzymeSpec, base_sum, cut, destuff, int_to_nt, ligate,
    nt_to_int, pack_bytes, stuff, unpack_bytes,
)

# ---- 层标签 ----
TAG_APPLICATION = "AA"
TAG_PRESENTATION = "AC"
TAG_SESSION = "AG"
TAG_TRANSPORT = "AT"
TAG_NETWORK = "CA"
TAG_DATALINK = "CC"
LAYER_TAGS: Dict[str, str] = {
    "application": TAG_APPLICATION,
    "presentation": TAG_PRESENTATION,
    "session": TAG_SESSION,
    "transport": TAG_TRANSPORT,
    "network": TAG_NETWORK,
    "datalink": TAG_DATALINK,
}

ECC_MODES: Dict[str, str] = {"none": "AA", "triple": "AC"}
PRESENTATION_MODES: Dict[str, str] = {"raw": "AA", "codon_view": "AC"}
_ECC_BY_CODE = {v: k for k, v in ECC_MODES.items()}
_PRESENTATION_BY_CODE = {v: k for k, v in PRESENTATION_MODES.items()}

PROTECTOR_TAG = "TGTG"
BROADCAST = 0xFFFF
DEFAULT_TTL = 16

APP_HEADER_NT = 2 + 8
PRESENTATION_HEADER_NT = 2 + 2
SESSION_HEADER_NT = 2 + 16
TRANSPORT_HEADER_NT = 2 + 8 + 8 + 8 + 4
NETWORK_HEADER_NT = 2 + 8 + 8 + 4
DATALINK_HEADER_NT = 2 + 2 + 4

MAX_SEGMENT_NT = 4 ** 8 - 4  # payload_len 为 16 bit，且需被 4 整除


@dataclass(frozen=True, order=True)
class Address:
    value: int

    def __post_init__(self):
        if not 0 <= self.value <= BROADCAST:
            raise ConfigError(f"address {self.value} is not a 16-bit value")

    @property
    def is_broadcast(self) -> bool:
        return self.value == BROADCAST

    def to_nt(self) -> str:
        return int_to_nt(self.value, 8)

    @classmethod
    def from_nt(cls, seq: str) -> "Address":
        return cls(nt_to_int(seq))

    @classmethod
    def parse(cls, text) -> "Address":
        """接受 int、十六进制字符串（'0x1a' / '1a'）或 'broadcast'"""
        if isinstance(text, Address):
            return text
        if isinstance(text, int):
            return cls(text)
        t = str(text).strip().lower()
        if t in ("broadcast", "bcast", "*"):
            return cls(BROADCAST)
        try:
            return cls(int(t, 16))
        except ValueError:
            raise ConfigError(f"bad address {text!r}") from None

    def __str__(self) -> str:
        return f"{self.value:04x}"


BROADCAST_ADDR = Address(BROADCAST)


@dataclass(frozen=True)
class StackConfig:
    app_id: int = 1
    session_id: int = 1
    src_addr: Address = Address(0x0001)
    dst_addr: Address = Address(0x0002)
    enzyme: EnzymeSpec = DEFAULT_ENZYME
    max_segment_payload: int = 512
    ecc_mode: str = "triple"
    presentation_mode: str = "raw"
    ttl: int = DEFAULT_TTL

    def validate(self) -> "StackConfig":
        if not 0 <= self.app_id < 2 ** 16:
            raise ConfigError(f"app_id {self.app_id} is not a 16-bit value")
        if not 0 <= self.session_id < 2 ** 32:
            raise ConfigError(f"session_id {self.session_id} is not a 32-bit value")
        if self.src_addr.is_broadcast:
            raise ConfigError("source address must be unicast")
        if self.max_segment_payload < 64 or self.max_segment_payload % 4:
            raise ConfigError(
                f"max_segment_payload {self.max_segment_payload} must be >= 64 and divisible by 4"
            )
        if self.max_segment_payload > MAX_SEGMENT_NT:
            raise ConfigError(f"max_segment_payload {self.max_segment_payload} exceeds {MAX_SEGMENT_NT}")
        if self.ecc_mode not in ECC_MODES:
            raise ConfigError(f"unknown ecc_mode {self.ecc_mode!r}")
        if self.presentation_mode not in PRESENTATION_MODES:
            raise ConfigError(f"unknown presentation_mode {self.presentation_mode!r}")
        if not self.enzyme.stuffable:
            raise ConfigError(
                f"enzyme {self.enzyme.name or self.enzyme.recognition_site} cannot be used for "
                f"segmentation (site or guard has a border, or collides with the stuffing base)"
            )
        if not 0 <= self.ttl < 256:
            raise ConfigError(f"ttl {self.ttl} is not an 8-bit value")
        return self


# ========== 校验和 / ECC ==========

def checksum8(seq: str) -> int:
    return base_sum(seq) % 256


def ecc_encode(seq: str, mode: str) -> str:
    if mode == "none":
        return seq
    if mode == "triple":
        return "".join(ch * 3 for ch in seq)
    raise ConfigError(f"unknown ecc_mode {mode!r}")


def majority_decode(seq: str) -> Tuple[str, List[int]]:
    """逐三元组多数表决；返回 (译码结果, 三碱基各不相同的三元组下标)。不可纠的位置取首碱基。"""
    if len(seq) % 3:
        raise LengthError(f"triple-ECC body length {len(seq)} is not a multiple of 3")
    out: List[str] = []
    bad: List[int] = []
    for i, (a, b, c) in enumerate(zip(seq[0::3], seq[1::3], seq[2::3])):
        if a == b or a == c:
            out.append(a)
        elif b == c:
            out.append(b)
        else:
            out.append(a)
            bad.append(i)
    return "".join(out), bad


def ecc_decode(seq: str, mode: str) -> str:
    if mode == "none":
        return seq
    if mode != "triple":
        raise ConfigError(f"unknown ecc_mode {mode!r}")
    decoded, bad = majority_decode(seq)
    if bad:
        raise UncorrectableError(bad)
    return decoded


# ========== 上三层报头 ==========

def application_header(app_id: int) -> str:
    return TAG_APPLICATION + int_to_nt(app_id, 8)


def presentation_header(mode: str) -> str:
    return TAG_PRESENTATION + PRESENTATION_MODES[mode]


def session_header(session_id: int) -> str:
    return TAG_SESSION + int_to_nt(session_id, 16)


def _expect_tag(seq: str, tag: str, layer: str) -> None:
    if seq[:2] != tag:
        raise HeaderError(f"{layer} header expected tag {tag}, found {seq[:2] or '<empty>'}")


# ========== 传输层 ==========

@dataclass(frozen=True)
class Segment:
    seg_index: int
    seg_total: int
    payload: str
    protected: bool = False

    def __post_init__(self):
        if not (1 <= self.seg_total < 2 ** 16 and 0 <= self.seg_index < self.seg_total):
            raise HeaderError(f"bad segment numbering {self.seg_index}/{self.seg_total}")
        if len(self.payload) >= 2 ** 16:
            raise HeaderError(f"segment payload of {len(self.payload)} nt exceeds 16-bit length")

    @property
    def checksum(self) -> int:
        return checksum8(self.payload)

    @property
    def header(self) -> str:
        return (
            TAG_TRANSPORT
            + int_to_nt(self.seg_index, 8)
            + int_to_nt(self.seg_total, 8)
            + int_to_nt(len(self.payload), 8)
            + int_to_nt(self.checksum, 4)
        )

    def to_nt(self) -> str:
        body = ligate(self.header, self.payload)
        return ligate(PROTECTOR_TAG, body) if self.protected else body

    @classmethod
    def from_nt(cls, seq: str) -> "Segment":
        protected = False
        if seq.startswith(PROTECTOR_TAG):
            protected, seq = True, seq[len(PROTECTOR_TAG):]
        _expect_tag(seq, TAG_TRANSPORT, "transport")
        if len(seq) < TRANSPORT_HEADER_NT:
            raise HeaderError(f"transport header truncated ({len(seq)} nt)")
        seg_index = nt_to_int(seq[2:10])
        seg_total = nt_to_int(seq[10:18])
        payload_len = nt_to_int(seq[18:26])
        checksum = nt_to_int(seq[26:30])
        payload = seq[TRANSPORT_HEADER_NT:]
        if len(payload) != payload_len:
            raise HeaderError(f"transport payload is {len(payload)} nt, header says {payload_len}")
        if checksum8(payload) != checksum:
            raise ChecksumError(
                f"segment {seg_index} checksum mismatch ({checksum8(payload)} != {checksum})"
            )
        return cls(seg_index, seg_total, payload, protected)


def protect(seg: Segment) -> Segment:
    """挂上保护链：被保护的片段对酶切不可见。"""
    if seg.protected:
        raise StateError(f"segment {seg.seg_index} is already protected")
    return replace(seg, protected=True)


def unprotect(seg: Segment) -> Segment:
    if not seg.protected:
        raise StateError(f"segment {seg.seg_index} is not protected")
    return replace(seg, protected=False)


def cut_segment(seg: Segment, enzyme: EnzymeSpec) -> List[str]:
    """栈内的酶切入口：受保护的片段整体返回，不做切割。"""
    material = seg.to_nt()
    if seg.protected:
        return [material]
    return cut(material, enzyme)


def segment_pdu(pdu: str, cfg: StackConfig) -> List[Segment]:
    """
    先对整段会话 PDU 做位点填充，再按固定大小分块、在块之间连入识别位点，
    最后用酶切开，去掉两端残留的位点碎片即得各段负载。返回的片段均已加保护。
    """
    enzyme = cfg.enzyme
    site, off = enzyme.recognition_site, enzyme.cut_offset
    stuffed = stuff(pdu, enzyme.guard)
    size = cfg.max_segment_payload
    chunks = [stuffed[i:i + size] for i in range(0, len(stuffed), size)] or [""]
    if len(chunks) >= 2 ** 16:
        raise ConfigError(f"message needs {len(chunks)} segments; at most 65535 are addressable")

    fragments = cut(site.join(chunks), enzyme)
    if len(fragments) != len(chunks):
        raise ConfigError(
            f"enzyme {enzyme.name or site} produced {len(fragments)} fragments for {len(chunks)} chunks"
        )
    head, tail = site[off:], site[:off]
    last = len(fragments) - 1
    segments: List[Segment] = []
    for i, frag in enumerate(fragments):
        if i > 0:
            frag = frag[len(head):]
        if i < last and tail:
            frag = frag[: len(frag) - len(tail)]
        segments.append(protect(Segment(i, len(fragments), frag)))
    return segments


# ========== 网络层 ==========

@dataclass(frozen=True)
class Packet:
    dst: Address
    src: Address
    ttl: int
    segment: str

    def to_nt(self) -> str:
        header = TAG_NETWORK + self.dst.to_nt() + self.src.to_nt() + int_to_nt(self.ttl, 4)
        return ligate(header, self.segment)

    @classmethod
    def from_nt(cls, seq: str) -> "Packet":
        _expect_tag(seq, TAG_NETWORK, "network")
        if len(seq) < NETWORK_HEADER_NT:
            raise HeaderError(f"network header truncated ({len(seq)} nt)")
        return cls(
            dst=Address.from_nt(seq[2:10]),
            src=Address.from_nt(seq[10:18]),
            ttl=nt_to_int(seq[18:22]),
            segment=seq[NETWORK_HEADER_NT:],
        )


# ========== 数据链路层 ==========

@dataclass(frozen=True)
class Frame:
    ecc_mode: str
    frame_checksum: int
    body: str
    codon_view: Optional[str] = field(default=None, compare=False, repr=False)

    def to_nt(self) -> str:
        header = TAG_DATALINK + ECC_MODES[self.ecc_mode] + int_to_nt(self.frame_checksum, 4)
        return ligate(header, self.body)

    @classmethod
    def from_nt(cls, seq: str) -> "Frame":
        _expect_tag(seq, TAG_DATALINK, "datalink")
        if len(seq) < DATALINK_HEADER_NT:
            raise HeaderError(f"datalink header truncated ({len(seq)} nt)")
        mode = _ECC_BY_CODE.get(seq[2:4])
        if mode is None:
            raise HeaderError(f"unknown ecc_mode code {seq[2:4]}")
        return cls(mode, nt_to_int(seq[4:8]), seq[DATALINK_HEADER_NT:])


def datalink_send(packet: str, ecc_mode: str) -> Frame:
    return Frame(ecc_mode, checksum8(packet), ecc_encode(packet, ecc_mode))


def datalink_receive(frame: Frame) -> str:
    """ECC 纠错并核对帧校验和，返回网络包。"""
    packet = ecc_decode(frame.body, frame.ecc_mode)
    if checksum8(packet) != frame.frame_checksum:
        raise ChecksumError(
            f"frame checksum mismatch ({checksum8(packet)} != {frame.frame_checksum})"
        )
    return packet


# ========== 整体编解码 ==========

def encode_message(payload: bytes, cfg: StackConfig) -> List[Frame]:
    if not payload:
        raise EmptyPayloadError("payload must be non-empty")
    cfg.validate()
    guard = cfg.enzyme.guard

    app_pdu = ligate(application_header(cfg.app_id), stuff(pack_bytes(payload), guard))
    pres_pdu = ligate(presentation_header(cfg.presentation_mode), app_pdu)
    sess_pdu = ligate(session_header(cfg.session_id), pres_pdu)

    frames: List[Frame] = []
    for seg in segment_pdu(sess_pdu, cfg):
        packet = Packet(cfg.dst_addr, cfg.src_addr, cfg.ttl, unprotect(seg).to_nt())
        frame = datalink_send(packet.to_nt(), cfg.ecc_mode)
        if cfg.presentation_mode == "codon_view":
            frame = replace(frame, codon_view=codon_view(seg.payload))
        frames.append(frame)
    return frames


class StackDecoder:
    """单条消息的重组缓冲；一个实例只属于一个线程。"""

    def __init__(self, cfg: StackConfig, local_addr: Optional[Address] = None):
        self.cfg = cfg.validate()
        self.local_addr = local_addr or cfg.dst_addr
        self._segments: Dict[int, Segment] = {}
        self._total: Optional[int] = None

    def feed(self, frame: Frame) -> Segment:
        packet = Packet.from_nt(datalink_receive(frame))
        if packet.dst != self.local_addr and not packet.dst.is_broadcast:
            raise AddressError(f"packet for {packet.dst} delivered to {self.local_addr}")
        seg = Segment.from_nt(packet.segment)
        if self._total is None:
            self._total = seg.seg_total
        elif seg.seg_total != self._total:
            raise HeaderError(f"segment {seg.seg_index} claims {seg.seg_total} segments, expected {self._total}")
        known = self._segments.get(seg.seg_index)
        if known is not None and known.payload != seg.payload:
            raise HeaderError(f"conflicting duplicates of segment {seg.seg_index}")
        self._segments[seg.seg_index] = seg
        return seg

    def missing(self) -> List[int]:
        if self._total is None:
            return []
        return [i for i in range(self._total) if i not in self._segments]

    def finish(self) -> bytes:
        if self._total is None:
            raise MissingSegmentError([], 0)
        gaps = self.missing()
        if gaps:
            raise MissingSegmentError(gaps, self._total)

        guard = self.cfg.enzyme.guard
        pdu = destuff("".join(self._segments[i].payload for i in range(self._total)), guard)

        _expect_tag(pdu, TAG_SESSION, "session")
        if len(pdu) < SESSION_HEADER_NT + PRESENTATION_HEADER_NT:
            raise HeaderError("session PDU truncated")
        session_id = nt_to_int(pdu[2:SESSION_HEADER_NT])
        if session_id != self.cfg.session_id:
            raise HeaderError(f"session_id {session_id} does not match {self.cfg.session_id}")
        pdu = pdu[SESSION_HEADER_NT:]

        _expect_tag(pdu, TAG_PRESENTATION, "presentation")
        if pdu[2:4] not in _PRESENTATION_BY_CODE:
            raise HeaderError(f"unknown presentation mode code {pdu[2:4]}")
        pdu = pdu[PRESENTATION_HEADER_NT:]

        _expect_tag(pdu, TAG_APPLICATION, "application")
        if len(pdu) < APP_HEADER_NT:
            raise HeaderError("application header truncated")
        app_id = nt_to_int(pdu[2:APP_HEADER_NT])
        if app_id != self.cfg.app_id:
            raise HeaderError(f"app_id {app_id} does not match {self.cfg.app_id}")
        return unpack_bytes(destuff(pdu[APP_HEADER_NT:], guard))


def decode_message(frames: List[Frame], cfg: StackConfig,
                   local_addr: Optional[Address] = None) -> bytes:
    decoder = StackDecoder(cfg, local_addr)
    for frame in frames:
        decoder.feed(frame)
    return decoder.finish()
