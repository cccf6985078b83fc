"""Run configuration: a flat key/value JSON file mapped onto a validated
dataclass and echoed next to every checkpoint set."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Optional

from .policy import RLConfig


class ConfigError(Exception):
    pass


@dataclass
class Config:
    gamma: float = 1.0
    gamma_cooperative: float = 0.99
    epsilon: float = 0.05
    psi: float = 1e-4
    flush_size: int = 128
    batch_size: int = 1024
    intrinsic_weight: float = 1.0
    relax_temperature: float = 0.1
    constant_risk: Optional[float] = None
    recurrent_hidden: int = 128
    mlp_width: int = 512
    actor_count: int = 1
    p0000: float = 0.10
    deterministic: bool = True
    checkpoint_dir: str = "checkpoints"
    service_port: int = 8321
    expose_insight: bool = False

    def __post_init__(self):
        try:
            self.rl()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.recurrent_hidden < 1 or self.mlp_width < 1:
            raise ConfigError("network widths must be positive")
        if self.actor_count < 1:
            raise ConfigError("actor_count must be >= 1")
        if not 0.0 <= self.p0000 <= 1.0:
            raise ConfigError("p0000 must be a probability")
        if not 1 <= self.service_port <= 65535:
            raise ConfigError("service_port out of range")

    def rl(self) -> RLConfig:
        return RLConfig(
            gamma=self.gamma, gamma_cooperative=self.gamma_cooperative,
            epsilon=self.epsilon, psi=self.psi, flush_size=self.flush_size,
            batch_size=self.batch_size, intrinsic_weight=self.intrinsic_weight,
            relax_temperature=self.relax_temperature,
            constant_risk=self.constant_risk)


def load_config(path: Optional[str]) -> Config:
    if path is None:
        return Config()
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    known = {f.name for f in dataclasses.fields(Config)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown keys: {', '.join(unknown)}")
    try:
        return Config(**raw)
    except (TypeError, ConfigError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def echo_config(cfg: Config, checkpoint_dir: str) -> None:
    os.makedirs(checkpoint_dir, exist_ok=True)
    with open(os.path.join(checkpoint_dir, "config.json"), "w") as fh:
        json.dump(dataclasses.asdict(cfg), fh, indent=1)
