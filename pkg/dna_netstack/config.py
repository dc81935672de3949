from __future__ import annotations
import yaml
from dataclasses import dataclass, fields
from typing import List, Optional

from .channel import NoiseModel
from .errors import ConfigError, DnaNetError
from .nucleo import ENZYMES
from .stack import Address, StackConfig


@dataclass
class RunConfig:
    # ---- 随机性与噪声 ----
    seed: int = 0
    p_sub: float = 0.0
    p_ins: float = 0.0
    p_del: float = 0.0
    # ---- 协议栈 ----
    app_id: int = 1
    session_id: int = 1
    src: str = "0001"
    dst: str = "0002"
    enzyme: str = "EcoRI"
    segment_size: int = 512
    ecc: str = "triple"            # none / triple
    presentation: str = "raw"      # raw / codon_view
    ttl: int = 16
    # ---- 网络 ----
    topology: Optional[str] = None
    switching: bool = True
    # ---- 账本 ----
    difficulty: int = 2
    confirmations: int = 6
    p_mut: float = 0.001
    # ---- 输出 ----
    out: Optional[str] = None
    stats_csv: Optional[str] = None

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        return cls(**{k: v for k, v in data.items() if k in cls.__annotations__})

    def merge_cli(self, **overrides) -> "RunConfig":
        """CLI 参数优先；None 表示未指定。"""
        for k, v in overrides.items():
            if v is None:
                continue
            if k not in self.__annotations__:
                raise ConfigError(f"unknown setting {k!r}")
            setattr(self, k, v)
        return self

    def to_stack_config(self) -> StackConfig:
        if self.enzyme not in ENZYMES:
            raise ConfigError(f"unknown enzyme {self.enzyme!r} (known: {', '.join(sorted(ENZYMES))})")
        try:
            cfg = StackConfig(
                app_id=int(self.app_id),
                session_id=int(self.session_id),
                src_addr=Address.parse(self.src),
                dst_addr=Address.parse(self.dst),
                enzyme=ENZYMES[self.enzyme],
                max_segment_payload=int(self.segment_size),
                ecc_mode=self.ecc,
                presentation_mode=self.presentation,
                ttl=int(self.ttl),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, DnaNetError):
                raise
            raise ConfigError(f"bad stack setting: {e}") from None
        return cfg.validate()

    def to_noise_model(self) -> NoiseModel:
        try:
            return NoiseModel(float(self.p_sub), float(self.p_ins), float(self.p_del), int(self.seed))
        except (TypeError, ValueError) as e:
            if isinstance(e, DnaNetError):
                raise
            raise ConfigError(f"bad noise setting: {e}") from None

    def describe(self) -> List[str]:
        """启动时打印的可复现性头部：每个生效的设置一行。"""
        return [f"{f.name}={getattr(self, f.name)}" for f in fields(self)]
