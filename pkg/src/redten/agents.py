"""Playable agents: the composed identify-then-act agent, its ablation
variants, and the random / fixed-rule baselines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from .engine import Category, GameState, Move, TeamMask
from .features import build_identify_features
from .identify import danger_forward, decide_mask, relation_forward
from .policy import PolicyBank, q_values, select_action


@dataclass
class InsightRecord:
    """Per-turn identification trace, for curve export and the UI."""
    t: int
    seat: int
    confidence: tuple  # (up, front, down)
    risk: float
    mask_bits: int
    move: Move


class Agent(Protocol):
    def act(self, state: GameState, rng: np.random.Generator) -> Move: ...


class RandomAgent:
    """Uniform over the legal move set."""

    def act(self, state: GameState, rng: np.random.Generator) -> Move:
        legal = state.legal_moves()
        return legal[int(rng.integers(len(legal)))]


class RuleAgent:
    """Greedy shedding heuristic: lead the lowest smallest combination;
    follow with the minimal beat, bombs only as a last resort."""

    def act(self, state: GameState, rng: np.random.Generator) -> Move:
        legal = state.legal_moves()
        plays = [m for m in legal if not m.is_pass]
        if state.lead is None:
            return min(plays, key=lambda m: (m.combo.key_rank, m.combo.size,
                                             m.combo.category))
        ordinary = [m for m in plays if m.combo.category != Category.BOMB]
        pool = ordinary or plays
        if pool:
            return min(pool, key=lambda m: (m.combo.key_rank, m.combo.size))
        return legal[-1]  # Pass


class MonteCarloAgent:
    """Policy-bank agent with a fixed cooperation mask (no identification)."""

    def __init__(self, bank: PolicyBank, mask: TeamMask, epsilon: float = 0.0):
        self.bank = bank
        self.mask = mask
        self.epsilon = epsilon

    def act(self, state: GameState, rng: np.random.Generator) -> Move:
        return select_action(self.bank, self.mask, state, state.legal_moves(),
                             self.epsilon, rng)


class GroundTruthAgent:
    """Policy-bank agent playing under the deal's true mask (training aid)."""

    def __init__(self, bank: PolicyBank, epsilon: float = 0.0):
        self.bank = bank
        self.epsilon = epsilon

    def act(self, state: GameState, rng: np.random.Generator) -> Move:
        mask = state.mask_for(state.turn)
        return select_action(self.bank, mask, state, state.legal_moves(),
                             self.epsilon, rng)


class IDRLAgent:
    """Full pipeline: identify -> pick policy head -> act.

    ``constant_risk`` replaces the danger network output with a fixed nu
    (ablation). ``mask_override`` bypasses identification entirely, which
    makes the agent coincide with MonteCarloAgent on that mask."""

    def __init__(self, theta, alpha, bank: PolicyBank, epsilon: float = 0.0,
                 constant_risk: Optional[float] = None,
                 mask_override: Optional[TeamMask] = None):
        self.theta = theta
        self.alpha = alpha
        self.bank = bank
        self.epsilon = epsilon
        self.constant_risk = constant_risk
        self.mask_override = mask_override
        self.insight: list[InsightRecord] = []

    def reset(self) -> None:
        self.insight = []

    def act(self, state: GameState, rng: np.random.Generator) -> Move:
        seat = state.turn
        if self.mask_override is not None:
            mask = self.mask_override
            c, d = (0.0, 0.0, 0.0), 0.0
        else:
            feats = build_identify_features(state, seat)
            c = tuple(float(v) for v in relation_forward(self.theta, feats))
            d = (self.constant_risk if self.constant_risk is not None
                 else danger_forward(self.alpha, feats))
            mask = decide_mask(c, d)
        move = select_action(self.bank, mask, state, state.legal_moves(),
                             self.epsilon, rng)
        self.insight.append(
            InsightRecord(state.t, seat, c, d, mask.bits, move))
        return move


def play_deck(state: GameState, agents, rng: np.random.Generator,
              max_turns: int = 400) -> GameState:
    """Run one deck to termination; ``agents`` is one Agent per seat."""
    for agent in agents:
        if hasattr(agent, "reset"):
            agent.reset()
    turns = 0
    while not state.is_terminal:
        move = agents[state.turn].act(state, rng)
        state.apply(move, check=False)
        turns += 1
        if turns > max_turns:
            raise RuntimeError("deck exceeded turn limit")
    return state
