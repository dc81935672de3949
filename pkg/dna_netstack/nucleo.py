# -*- coding: utf-8 -*-
# dna_netstack/nucleo.py
"""
核苷酸基础原语：字母表、字节<->核苷酸编码、连接（ligation）、
限制性酶切位点查找与切割、以及防伪造的填充（stuffing）。

序列一律用只含 ACGT 的 ``str`` 表示；所有函数都是纯函数。
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, List

from .errors import AlphabetError, BorderError, ConfigError, LengthError, TruncationError

BASES = "ACGT"
BASE_VALUE: Dict[str, int] = {b: i for i, b in enumerate(BASES)}
STUFF_BASE = "A"  # 填充时插入的固定核苷酸

_COMPLEMENT = str.maketrans("ACGT", "TGCA")

# A=00 C=01 G=10 T=11，字节内高位在前
_BYTE_TO_QUAD = [
    "".join(BASES[(b >> s) & 0b11] for s in (6, 4, 2, 0)) for b in range(256)
]
_QUAD_TO_BYTE = {q: b for b, q in enumerate(_BYTE_TO_QUAD)}


class Nucleotide(IntEnum):
    A = 0
    C = 1
    G = 2
    T = 3

    @property
    def base(self) -> str:
        return self.name

    @property
    def complement(self) -> "Nucleotide":
        return Nucleotide(3 - self.value)

    @classmethod
    def from_base(cls, base: str) -> "Nucleotide":
        try:
            return cls[base]
        except KeyError:
            raise AlphabetError(f"not a nucleotide: {base!r}") from None


def validate_sequence(seq: str) -> str:
    """检查序列只含大写 ACGT；返回原序列，出错时报告第一个非法位置。"""
    if seq.strip(BASES):
        for i, ch in enumerate(seq):
            if ch not in BASE_VALUE:
                raise AlphabetError(f"invalid nucleotide {ch!r} at position {i}", position=i)
    return seq


def complement(seq: str) -> str:
    return seq.translate(_COMPLEMENT)


def reverse_complement(seq: str) -> str:
    return seq.translate(_COMPLEMENT)[::-1]


def base_sum(seq: str) -> int:
    return seq.count("C") + 2 * seq.count("G") + 3 * seq.count("T")


# ========== 字节 <-> 核苷酸 ==========

def pack_bytes(data: bytes) -> str:
    return "".join(_BYTE_TO_QUAD[b] for b in bytes(data))


def unpack_bytes(seq: str) -> bytes:
    if len(seq) % 4:
        raise LengthError(f"sequence length {len(seq)} is not a multiple of 4")
    try:
        return bytes(_QUAD_TO_BYTE[seq[i:i + 4]] for i in range(0, len(seq), 4))
    except KeyError:
        validate_sequence(seq)
        raise


def int_to_nt(value: int, width: int) -> str:
    """定宽 base-4 整数字段（高位在前）。"""
    if value < 0 or value >= 4 ** width:
        raise ValueError(f"{value} does not fit in {width} nt")
    out = []
    for _ in range(width):
        out.append(BASES[value & 0b11])
        value >>= 2
    return "".join(reversed(out))


def nt_to_int(seq: str) -> int:
    value = 0
    for ch in seq:
        try:
            value = (value << 2) | BASE_VALUE[ch]
        except KeyError:
            validate_sequence(seq)
            raise
    return value


# ========== 连接 ==========

def ligate(left: str, right: str) -> str:
    return left + right


# ========== 限制性内切酶 ==========

def has_border(seq: str) -> bool:
    """是否存在非平凡边界（某个真前缀等于同长的真后缀）"""
    return any(seq[:k] == seq[-k:] for k in range(1, len(seq)))


@dataclass(frozen=True)
class EnzymeSpec:
    recognition_site: str
    cut_offset: int
    name: str = ""

    def __post_init__(self):
        validate_sequence(self.recognition_site)
        if len(self.recognition_site) < 4:
            raise ConfigError(f"recognition site {self.recognition_site!r} shorter than 4 nt")
        if not 0 <= self.cut_offset <= len(self.recognition_site):
            raise ConfigError(
                f"cut_offset {self.cut_offset} outside [0, {len(self.recognition_site)}]"
            )

    @property
    def guard(self) -> str:
        return self.recognition_site[:-1]

    @property
    def stuffable(self) -> bool:
        # 插入的 A 既不能补全位点，也不能开启新的 guard
        site, guard = self.recognition_site, self.guard
        return (
            not has_border(site)
            and not has_border(guard)
            and not guard.startswith(STUFF_BASE)
            and not site.endswith(STUFF_BASE)
        )


# 常见酶的识别位点（平端模型，cut_offset 取经典切点）
ENZYMES: Dict[str, EnzymeSpec] = {
    "EcoRI": EnzymeSpec("GAATTC", 1, "EcoRI"),
    "BamHI": EnzymeSpec("GGATCC", 1, "BamHI"),
    "HindIII": EnzymeSpec("AAGCTT", 1, "HindIII"),
    "NotI": EnzymeSpec("GCGGCCGC", 2, "NotI"),
    "Sau3AI": EnzymeSpec("GATC", 0, "Sau3AI"),
    "MluCI": EnzymeSpec("AATT", 0, "MluCI"),
}
DEFAULT_ENZYME = ENZYMES["EcoRI"]


def find_sites(seq: str, enzyme: EnzymeSpec) -> List[int]:
    """从左到右扫描，命中后从 i+|site| 继续（不重叠）。"""
    site = enzyme.recognition_site
    out: List[int] = []
    start = seq.find(site)
    while start != -1:
        out.append(start)
        start = seq.find(site, start + len(site))
    return out


def cut(seq: str, enzyme: EnzymeSpec) -> List[str]:
    """在每个位点的 site_start + cut_offset 处切断；空片段不计。"""
    fragments: List[str] = []
    last = 0
    for start in find_sites(seq, enzyme):
        pos = start + enzyme.cut_offset
        if pos > last:
            fragments.append(seq[last:pos])
        last = pos
    if last < len(seq) or not fragments:
        fragments.append(seq[last:])
    return fragments


# ========== 填充 / 去填充 ==========

def stuff(payload: str, guard: str) -> str:
    """每出现一次 guard，就在其后插入一个 A。"""
    if not guard:
        raise BorderError("empty guard")
    if has_border(guard):
        raise BorderError(f"guard {guard!r} has a nontrivial border; stuffing would be ambiguous")
    out: List[str] = []
    i = 0
    while True:
        j = payload.find(guard, i)
        if j == -1:
            out.append(payload[i:])
            return "".join(out)
        k = j + len(guard)
        out.append(payload[i:k])
        out.append(STUFF_BASE)
        i = k


def destuff(stuffed: str, guard: str) -> str:
    """删除每个 guard 之后紧跟的那个核苷酸；stuff 的逆运算。"""
    if not guard:
        raise BorderError("empty guard")
    out: List[str] = []
    i = 0
    while True:
        j = stuffed.find(guard, i)
        if j == -1:
            out.append(stuffed[i:])
            return "".join(out)
        k = j + len(guard)
        if k >= len(stuffed):
            raise TruncationError(f"guard {guard!r} at position {j} has no stuffed nucleotide after it")
        out.append(stuffed[i:k])
        i = k + 1
