# -*- coding: utf-8 -*-
# dna_netstack/noise.py
# 带种子的随机流与核苷酸数组互转（numpy 向量化）
from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF

NT_CODES = np.frombuffer(b"ACGT", dtype=np.uint8)
_NT_LOOKUP = np.zeros(256, dtype=np.int64)
_NT_LOOKUP[NT_CODES] = np.arange(4)


def derived_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """由 (seed, stream) 派生独立的随机流；同样的参数在任何平台上给出同样的序列。"""
    return np.random.default_rng([seed & _MASK64, stream & _MASK64])


def to_values(seq: str) -> np.ndarray:
    return _NT_LOOKUP[np.frombuffer(seq.encode("ascii"), dtype=np.uint8)]


def from_values(values: np.ndarray) -> str:
    return NT_CODES[values].tobytes().decode("ascii")


def substitute(seq: str, p: float, rng: np.random.Generator) -> str:
    """每个位置以概率 p 替换为另外三种碱基之一（均匀）。"""
    if not seq or p <= 0.0:
        return seq
    vals = to_values(seq)
    hit = rng.random(len(vals)) < p
    shift = rng.integers(1, 4, size=len(vals))
    return from_values(np.where(hit, (vals + shift) % 4, vals))
