# -*- coding: utf-8 -*-
# dna_netstack/codons.py
"""
遗传密码表（RNA 密码子 -> 氨基酸单字母 / stop）与翻译。

表按 NCBI 的密码子顺序压缩存储：第一、二、三位依次按 U C A G 变化。
"""
from __future__ import annotations

from itertools import product
from types import MappingProxyType
from typing import List, Mapping

from .errors import AlphabetError, LengthError

STOP = "stop"
RNA_BASES = "UCAG"

# 标准遗传码；'*' 表示终止密码子
_NCBI_STANDARD_AAS = "FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG"

CodonTable = Mapping[str, str]


def _build_table(aas: str) -> CodonTable:
    codons = ("".join(t) for t in product(RNA_BASES, repeat=3))
    return MappingProxyType({c: (STOP if a == "*" else a) for c, a in zip(codons, aas)})


STANDARD_CODON_TABLE: CodonTable = _build_table(_NCBI_STANDARD_AAS)


def check_codon_table(table: CodonTable) -> None:
    if len(table) != 64:
        raise ValueError(f"codon table has {len(table)} entries, expected 64")
    missing = [c for c in ("".join(t) for t in product(RNA_BASES, repeat=3)) if c not in table]
    if missing:
        raise ValueError(f"codon table misses {missing[:4]}")
    stops = sorted(c for c, a in table.items() if a == STOP)
    if len(stops) != 3:
        raise ValueError(f"codon table has {len(stops)} stop codons, expected 3")


def translate_codons(seq: str, table: CodonTable = STANDARD_CODON_TABLE) -> List[str]:
    """逐个密码子翻译；DNA 的 T 在查表前按 RNA 的 U 读取。stop 原样输出，不提前终止。"""
    if len(seq) % 3:
        raise LengthError(f"sequence length {len(seq)} is not a multiple of 3")
    rna = seq.replace("T", "U")
    try:
        return [table[rna[i:i + 3]] for i in range(0, len(rna), 3)]
    except KeyError as e:
        raise AlphabetError(f"not a codon: {e.args[0]!r}") from None


def translate(seq: str, table: CodonTable = STANDARD_CODON_TABLE) -> str:
    return "".join(translate_codons(seq, table))


def codon_view(seq: str, table: CodonTable = STANDARD_CODON_TABLE) -> str:
    """只翻译整密码子前缀，用于表示层的展示（有损，不参与往返）。"""
    return translate(seq[: len(seq) - len(seq) % 3], table)
