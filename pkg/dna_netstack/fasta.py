# -*- coding: utf-8 -*-
# dna_netstack/fasta.py
"""
类 FASTA 文本格式：'>' 开头为记录头，其余行只能是大写 ACGT，每行至多 80 个字符。
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, List

from .errors import FastaError
from .nucleo import BASE_VALUE

LINE_WIDTH = 80


@dataclass
class FastaRecord:
    header: str      # 不含 '>'
    sequence: str

    @property
    def fields(self) -> List[str]:
        return self.header.split()


def parse_fasta(text: str, path: str = "<string>") -> List[FastaRecord]:
    records: List[FastaRecord] = []
    chunks: List[str] = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith(">"):
            if header is not None:
                records.append(FastaRecord(header, "".join(chunks)))
            header, chunks = line[1:].strip(), []
            continue
        if header is None:
            raise FastaError("sequence line before any '>' header", path, lineno, 1)
        if len(line) > LINE_WIDTH:
            raise FastaError(f"sequence line longer than {LINE_WIDTH} characters", path, lineno, LINE_WIDTH + 1)
        for col, ch in enumerate(line, 1):
            if ch not in BASE_VALUE:
                raise FastaError(f"invalid character {ch!r}", path, lineno, col)
        chunks.append(line)
    if header is not None:
        records.append(FastaRecord(header, "".join(chunks)))
    return records


def read_fasta(path: str) -> List[FastaRecord]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_fasta(f.read(), path=path)


def format_fasta(records: Iterable[FastaRecord]) -> str:
    lines: List[str] = []
    for rec in records:
        lines.append(f">{rec.header}")
        seq = rec.sequence
        for i in range(0, len(seq), LINE_WIDTH):
            lines.append(seq[i:i + LINE_WIDTH])
    return "\n".join(lines) + "\n"


def write_fasta(records: Iterable[FastaRecord], path: str) -> str:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_fasta(records))
    return path
