# -*- coding: utf-8 -*-
# dna_netstack/ledger.py
"""
核苷酸编码的区块链：区块即 DNA，复制先于分裂，复制时的突变产生分叉，
校验即“适者生存”的检验；PoW 以摘要开头的连续 A 计难度（每个 A 相当于 2 个 0 bit）。

区块序列化（高位在前的 base-4 整数）：
  index(8) | prev_digest(64) | payload_len(8) | payload(4·payload_len) | nonce(16)
"""
from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import (
    ConfirmationConflictError, ExhaustedError, FastaError, LengthError,
    NoValidChainError, RangeError, ValidationError,
)
from .fasta import FastaRecord, format_fasta, parse_fasta, read_fasta, write_fasta
from .noise import derived_rng, substitute
from .nucleo import int_to_nt, nt_to_int, pack_bytes, unpack_bytes, validate_sequence

DIGEST_NT = 64
GENESIS_PREV = "A" * DIGEST_NT
DEFAULT_CONFIRMATIONS = 6
MAX_DIFFICULTY = 16
MAX_NONCE = 2 ** 32 - 1

INDEX_NT = 8
PAYLOAD_LEN_NT = 8
NONCE_NT = 16
FIXED_NT = INDEX_NT + DIGEST_NT + PAYLOAD_LEN_NT + NONCE_NT  # 96

Payload = Union[bytes, str]


def _as_nt(payload: Payload) -> str:
    if isinstance(payload, (bytes, bytearray)):
        return pack_bytes(payload)
    return validate_sequence(payload)


@dataclass(frozen=True)
class DnaBlock:
    index: int
    prev_digest: str
    payload: str
    nonce: int = 0
    payload_len: Optional[int] = None  # 字节数；None 时按 payload 推出

    def __post_init__(self):
        if self.payload_len is None:
            object.__setattr__(self, "payload_len", len(self.payload) // 4)
        if len(self.payload) % 4:
            raise LengthError(f"block payload of {len(self.payload)} nt is not whole bytes")
        if len(self.prev_digest) != DIGEST_NT:
            raise LengthError(f"prev_digest must be {DIGEST_NT} nt, got {len(self.prev_digest)}")
        if not 0 <= self.index < 4 ** INDEX_NT:
            raise RangeError(f"block index {self.index} does not fit in {INDEX_NT} nt")
        if not 0 <= self.nonce <= MAX_NONCE:
            raise RangeError(f"nonce {self.nonce} is not a 32-bit value")

    def prefix_nt(self) -> str:
        return (
            int_to_nt(self.index, INDEX_NT)
            + self.prev_digest
            + int_to_nt(self.payload_len, PAYLOAD_LEN_NT)
            + self.payload
        )

    def to_nt(self) -> str:
        return self.prefix_nt() + int_to_nt(self.nonce, NONCE_NT)

    @classmethod
    def from_nt(cls, seq: str) -> "DnaBlock":
        if len(seq) < FIXED_NT:
            raise LengthError(f"block record of {len(seq)} nt is shorter than {FIXED_NT}")
        return cls(
            index=nt_to_int(seq[:INDEX_NT]),
            prev_digest=seq[INDEX_NT:INDEX_NT + DIGEST_NT],
            payload_len=nt_to_int(seq[INDEX_NT + DIGEST_NT:FIXED_NT - NONCE_NT]),
            payload=seq[FIXED_NT - NONCE_NT:-NONCE_NT],
            nonce=nt_to_int(seq[-NONCE_NT:]),
        )

    @property
    def payload_bytes(self) -> bytes:
        return unpack_bytes(self.payload)


def _digest_of(raw: bytes) -> str:
    return pack_bytes(raw[:16])


def digest(block: DnaBlock) -> str:
    """SHA-256 截断到 128 bit，再按 2 bit/nt 编成 64 nt。"""
    return _digest_of(hashlib.sha256(unpack_bytes(block.to_nt())).digest())


def meets_difficulty(digest_nt: str, difficulty: int) -> bool:
    return digest_nt.startswith("A" * difficulty)


def mine_stats(index: int, prev_digest: str, payload: Payload,
               difficulty: int) -> Tuple[DnaBlock, int, float]:
    """返回 (区块, 尝试次数, 耗时 ms)。nonce 取满足难度的最小值。"""
    if not 0 <= difficulty <= MAX_DIFFICULTY:
        raise RangeError(f"difficulty {difficulty} outside [0, {MAX_DIFFICULTY}]")
    template = DnaBlock(index, prev_digest, _as_nt(payload))
    # nonce 在序列化末尾且按字节对齐，前缀哈希状态可以复用
    base = hashlib.sha256(unpack_bytes(template.prefix_nt()))
    shift = 128 - 2 * difficulty
    t0 = time.perf_counter()
    for nonce in range(MAX_NONCE + 1):
        h = base.copy()
        h.update(nonce.to_bytes(4, "big"))
        if int.from_bytes(h.digest()[:16], "big") >> shift == 0:
            block = DnaBlock(index, prev_digest, template.payload, nonce)
            return block, nonce + 1, (time.perf_counter() - t0) * 1000.0
    raise ExhaustedError(f"no 32-bit nonce reaches difficulty {difficulty} for block {index}")


def mine(index: int, prev_digest: str, payload: Payload, difficulty: int) -> DnaBlock:
    return mine_stats(index, prev_digest, payload, difficulty)[0]


# ========== 链 ==========

@dataclass(frozen=True)
class DnaChain:
    blocks: Tuple[DnaBlock, ...] = ()
    difficulty: int = 0

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def tip(self) -> DnaBlock:
        return self.blocks[-1]

    @classmethod
    def genesis(cls, difficulty: int = 0, payload: Payload = b"") -> "DnaChain":
        return cls((mine(0, GENESIS_PREV, payload, difficulty),), difficulty)

    def to_nt(self) -> str:
        return "".join(b.to_nt() for b in self.blocks)


@dataclass(frozen=True)
class Violation:
    index: Optional[int]
    kind: str       # genesis / index / linkage / pow / payload_len
    message: str

    def __str__(self) -> str:
        where = "chain" if self.index is None else f"block {self.index}"
        return f"{where}: {self.kind}: {self.message}"


def validate_chain(chain: DnaChain) -> List[Violation]:
    """返回全部违规；空列表即有效。"""
    if not chain.blocks:
        return [Violation(None, "genesis", "missing genesis block")]
    out: List[Violation] = []
    first = chain.blocks[0]
    if first.index != 0 or first.prev_digest != GENESIS_PREV:
        out.append(Violation(0, "genesis", "genesis must have index 0 and an all-A prev_digest"))

    prev: Optional[str] = None
    for i, block in enumerate(chain.blocks):
        if block.index != i:
            out.append(Violation(i, "index", f"index {block.index} where {i} was expected"))
        if block.payload_len * 4 != len(block.payload):
            out.append(Violation(
                i, "payload_len",
                f"payload_len {block.payload_len} bytes but payload holds {len(block.payload) // 4}",
            ))
        d = digest(block)
        if not meets_difficulty(d, chain.difficulty):
            out.append(Violation(i, "pow", f"digest {d[:12]}... lacks {chain.difficulty} leading A"))
        if prev is not None and block.prev_digest != prev:
            out.append(Violation(i, "linkage", "prev_digest does not match the previous block"))
        prev = d
    return out


def is_valid(chain: DnaChain) -> bool:
    return not validate_chain(chain)


def replicate(chain: DnaChain, p_mut: float, seed: int) -> DnaChain:
    """复制整条链，复制中每个核苷酸以 p_mut 发生替换突变（仅替换，无插入缺失）。"""
    if not 0.0 <= p_mut <= 1.0:
        raise RangeError(f"p_mut {p_mut} outside [0, 1]")
    records = [b.to_nt() for b in chain.blocks]
    copied = substitute("".join(records), p_mut, derived_rng(seed))
    blocks, pos = [], 0
    for rec in records:
        blocks.append(DnaBlock.from_nt(copied[pos:pos + len(rec)]))
        pos += len(rec)
    return DnaChain(tuple(blocks), chain.difficulty)


def extend_stats(chain: DnaChain, payload: Payload) -> Tuple[DnaChain, int, float]:
    violations = validate_chain(chain)
    if violations:
        raise ValidationError(violations)
    block, attempts, wall_ms = mine_stats(len(chain), digest(chain.tip), payload, chain.difficulty)
    return DnaChain(chain.blocks + (block,), chain.difficulty), attempts, wall_ms


def extend(chain: DnaChain, payload: Payload) -> DnaChain:
    """无效的链不允许增长。"""
    return extend_stats(chain, payload)[0]


def confirmed_prefix(chain: DnaChain, depth: int = DEFAULT_CONFIRMATIONS) -> List[DnaBlock]:
    if depth < 0:
        raise RangeError(f"confirmation depth {depth} must be >= 0")
    return list(chain.blocks[: max(0, len(chain) - depth)])


# ========== 副本集合与分叉消解 ==========

@dataclass
class ReplicaSet:
    replicas: Dict[int, DnaChain] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def resolve(self, depth: int = DEFAULT_CONFIRMATIONS) -> DnaChain:
        with self._lock:
            return resolve_fork(self, depth)


def _fork_key(chain: DnaChain):
    # 越长越好；等长时 tip 摘要字典序最小者胜（A<C<G<T）
    return (-len(chain), digest(chain.tip))


def resolve_fork(replicas: ReplicaSet, depth: int = DEFAULT_CONFIRMATIONS) -> DnaChain:
    """
    适者生存：在有效副本中取最长链，并覆盖全部副本。
    任何有效副本的已确认前缀若与胜者冲突，则拒绝覆盖。
    """
    valid = {nid: ch for nid, ch in replicas.replicas.items() if is_valid(ch)}
    if not valid:
        raise NoValidChainError(f"none of {len(replicas.replicas)} replica(s) validates")
    winner = min(valid.values(), key=_fork_key)
    winner_digests = [digest(b) for b in winner.blocks]

    for nid, ch in sorted(valid.items()):
        for i, block in enumerate(confirmed_prefix(ch, depth)):
            if i >= len(winner_digests) or digest(block) != winner_digests[i]:
                raise ConfirmationConflictError(
                    f"replica {nid:04x}: confirmed block {i} would be rewritten by the winning chain"
                )

    for nid in replicas.replicas:
        replicas.replicas[nid] = winner
    return winner


# ========== 文件 ==========

def chain_to_records(chain: DnaChain) -> List[FastaRecord]:
    out = []
    for i, block in enumerate(chain.blocks):
        header = f"block {block.index}"
        if i == 0:
            header += f" difficulty={chain.difficulty}"
        out.append(FastaRecord(header, block.to_nt()))
    return out


def chain_from_records(records: Sequence[FastaRecord], difficulty: Optional[int] = None,
                       path: str = "<string>") -> DnaChain:
    blocks = []
    found = None
    for rec in records:
        fields = rec.fields
        if len(fields) < 2 or fields[0] != "block" or not fields[1].isdigit():
            raise FastaError(f"expected header '>block <index>', found '>{rec.header}'", path)
        for extra in fields[2:]:
            key, _, value = extra.partition("=")
            if key == "difficulty" and value.isdigit():
                found = int(value)
        blocks.append(DnaBlock.from_nt(rec.sequence))
    d = found if found is not None else (difficulty or 0)
    return DnaChain(tuple(blocks), d)


def chain_to_fasta(chain: DnaChain) -> str:
    return format_fasta(chain_to_records(chain))


def chain_from_fasta(text: str, path: str = "<string>") -> DnaChain:
    return chain_from_records(parse_fasta(text, path), path=path)


def read_chain(path: str) -> DnaChain:
    return chain_from_records(read_fasta(path), path=path)


def write_chain(chain: DnaChain, path: str) -> str:
    return write_fasta(chain_to_records(chain), path)
