"""Checkpoint loading and agent-kind resolution shared by the CLI and
the game service."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from . import nn
from .agents import IDRLAgent, MonteCarloAgent, RandomAgent, RuleAgent
from .engine import TeamMask
from .policy import PolicyBank


class UnknownAgentKind(Exception):
    pass


@dataclass
class CheckpointSet:
    bank: Optional[PolicyBank] = None
    relation: Optional[nn.ParamStore] = None
    danger: Optional[nn.ParamStore] = None

    @classmethod
    def load(cls, directory) -> "CheckpointSet":
        out = cls()
        if any(os.path.isdir(os.path.join(directory, f"q_{b:03b}"))
               for b in range(8)):
            out.bank = PolicyBank.load(directory)
        for name in ("relation", "danger"):
            path = os.path.join(directory, name)
            if os.path.isdir(path):
                setattr(out, name, nn.ParamStore.load(path))
        return out


AGENT_KIND_HELP = ("random | rule | idrl | mc:<3 mask bits, e.g. mc:010> "
                   "| nu:<constant risk in [0,1]>")


def make_agent(kind: str, ckpt: Optional[CheckpointSet],
               epsilon: float = 0.0):
    kind = kind.strip().lower()
    if kind == "random":
        return RandomAgent()
    if kind == "rule":
        return RuleAgent()
    if ckpt is None or ckpt.bank is None:
        raise UnknownAgentKind(f"agent kind {kind!r} needs policy checkpoints")
    if kind.startswith("mc:"):
        bits = kind[3:]
        if len(bits) != 3 or set(bits) - {"0", "1"}:
            raise UnknownAgentKind(f"bad mask in {kind!r}")
        return MonteCarloAgent(ckpt.bank, TeamMask.from_bits(int(bits, 2)),
                               epsilon)
    if ckpt.relation is None or ckpt.danger is None:
        raise UnknownAgentKind(f"agent kind {kind!r} needs identification "
                               "checkpoints")
    if kind == "idrl":
        return IDRLAgent(ckpt.relation, ckpt.danger, ckpt.bank, epsilon)
    if kind.startswith("nu:"):
        nu = float(kind[3:])
        if not 0.0 <= nu <= 1.0:
            raise UnknownAgentKind("constant risk must lie in [0,1]")
        return IDRLAgent(ckpt.relation, ckpt.danger, ckpt.bank, epsilon,
                         constant_risk=nu)
    raise UnknownAgentKind(f"unknown agent kind {kind!r}; expected "
                           + AGENT_KIND_HELP)
