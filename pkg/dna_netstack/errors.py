# -*- coding: utf-8 -*-
# dna_netstack/errors.py
from __future__ import annotations
from typing import Optional


class DnaNetError(Exception):
    """所有领域错误的根；CLI 只捕获这一族并以退出码 1 结束。"""


# ---- 编解码 ----
class LengthError(DnaNetError, ValueError):
    pass


class AlphabetError(DnaNetError, ValueError):
    def __init__(self, message: str, position: Optional[int] = None):
        super().__init__(message)
        self.position = position


class BorderError(DnaNetError, ValueError):
    pass


class TruncationError(DnaNetError):
    pass


# ---- 协议栈 ----
class ConfigError(DnaNetError, ValueError):
    pass


class EmptyPayloadError(DnaNetError, ValueError):
    pass


class HeaderError(DnaNetError):
    pass


class ChecksumError(DnaNetError):
    pass


class MissingSegmentError(DnaNetError):
    def __init__(self, missing, total: int):
        self.missing = sorted(missing)
        self.total = total
        if total:
            super().__init__(f"segment(s) {self.missing} of {total} missing")
        else:
            super().__init__("no segments received")


class AddressError(DnaNetError):
    pass


class UncorrectableError(DnaNetError):
    def __init__(self, triples):
        self.triples = list(triples)
        shown = ", ".join(str(t) for t in self.triples[:8])
        more = " ..." if len(self.triples) > 8 else ""
        super().__init__(f"{len(self.triples)} uncorrectable triple(s) at {shown}{more}")


class StateError(DnaNetError):
    pass


# ---- 信道 ----
class RangeError(DnaNetError, ValueError):
    pass


class NoRouteError(DnaNetError):
    pass


# ---- 账本 ----
class ValidationError(DnaNetError):
    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        super().__init__(f"chain is invalid ({len(self.violations)} violation(s)): {head}")


class ExhaustedError(DnaNetError):
    pass


class NoValidChainError(DnaNetError):
    pass


class ConfirmationConflictError(DnaNetError):
    pass


# ---- 文件 ----
class _PositionedError(DnaNetError):
    """带 path:line:col 定位的文件解析错误"""

    def __init__(self, message: str, path: str = "<string>", line: int = 0, column: int = 0):
        self.path = path
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(f"{path}:{line}:{column}: {message}")


class FastaError(_PositionedError):
    pass


class TopologyError(_PositionedError):
    pass
