"""Deep Monte Carlo policy bank: eight Q networks keyed by the 3-bit
cooperation mask, epsilon-greedy selection, Monte Carlo returns, and the
learner's regression update."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import nn
from .engine import ALL_MASKS, GameState, Move, TeamMask
from .features import build_q_state, encode_action


class IncompleteTrajectory(Exception):
    pass


@dataclass
class RLConfig:
    gamma: float = 1.0            # competitive masks
    gamma_cooperative: float = 0.99  # all-teammates mask: faster shedding scores higher
    epsilon: float = 0.05
    psi: float = 1e-4             # learning rate
    flush_size: int = 128         # actor -> shared buffer batch (BS)
    batch_size: int = 1024        # learner pop size (M)
    intrinsic_weight: float = 1.0  # lambda
    relax_temperature: float = 0.1  # tau
    constant_risk: Optional[float] = None  # nu (ablation only)

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0 and 0.0 <= self.gamma_cooperative <= 1.0):
            raise ValueError("discount out of range")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon out of range")
        if self.psi <= 0 or self.flush_size <= 0 or self.batch_size <= 0:
            raise ValueError("bad training sizes")
        if self.intrinsic_weight < 0:
            raise ValueError("intrinsic weight must be >= 0")
        if self.relax_temperature <= 0:
            raise ValueError("relaxation temperature must be > 0")
        if self.constant_risk is not None and not 0.0 <= self.constant_risk <= 1.0:
            raise ValueError("constant risk out of range")


@dataclass
class Transition:
    flat_state: np.ndarray   # uint8, 507
    history: np.ndarray      # uint8, 5x208
    action: np.ndarray       # uint8, 52
    reward: float
    ret: float               # discounted return G
    mask_bits: int
    seat: int
    t: int
    T: int


@dataclass
class Trajectory:
    seat: int
    steps: list = field(default_factory=list)
    complete: bool = False


class PolicyBank:
    """TeamMask -> Q ParamStore map (8 heads)."""

    def __init__(self, stores: dict):
        self.stores = dict(stores)

    @classmethod
    def fresh(cls, spec: nn.NetSpec, seed: int) -> "PolicyBank":
        return cls({m.bits: nn.init(spec, seed + m.bits) for m in ALL_MASKS})

    def store(self, mask: TeamMask) -> nn.ParamStore:
        return self.stores[mask.bits]

    def copy(self) -> "PolicyBank":
        return PolicyBank({b: s.copy() for b, s in self.stores.items()})

    def save(self, directory) -> None:
        for mask in ALL_MASKS:
            if mask.bits in self.stores:
                self.stores[mask.bits].save(
                    os.path.join(directory, f"q_{mask.label}"))

    @classmethod
    def load(cls, directory) -> "PolicyBank":
        stores = {}
        for mask in ALL_MASKS:
            path = os.path.join(directory, f"q_{mask.label}")
            if os.path.isdir(path):
                stores[mask.bits] = nn.ParamStore.load(path)
        if not stores:
            raise FileNotFoundError(f"no q_<mask> checkpoints in {directory}")
        return cls(stores)


def q_values(bank: PolicyBank, mask: TeamMask, state: GameState,
             legal: Sequence[Move]) -> np.ndarray:
    """One Q value per candidate move. The history encoding is shared
    across candidates; only the action block differs."""
    if not legal:
        raise ValueError("no legal moves")
    store = bank.store(mask)
    flat_state, history = build_q_state(state, state.turn)
    return q_values_from_features(store, flat_state, history, legal)


def q_values_from_features(store: nn.ParamStore, flat_state, history,
                           legal: Sequence[Move]) -> np.ndarray:
    encoded = nn.encode_history(store, history[None])
    n = len(legal)
    actions = np.stack([encode_action(m) for m in legal])
    flat = np.concatenate(
        [actions, np.broadcast_to(flat_state, (n, flat_state.shape[0]))], axis=1)
    out = nn.head_forward(store, np.broadcast_to(encoded, (n, encoded.shape[1])),
                          flat)
    return out[:, 0]


def select_action(bank: PolicyBank, mask: TeamMask, state: GameState,
                  legal: Sequence[Move], epsilon: float,
                  rng: np.random.Generator) -> Move:
    """Epsilon-greedy over the canonical-sorted legal list; greedy ties
    break to the first move in canonical order."""
    if epsilon > 0.0 and rng.random() < epsilon:
        return legal[int(rng.integers(len(legal)))]
    values = q_values(bank, mask, state, legal)
    return legal[int(np.argmax(values))]


def mc_returns(trajectory: Trajectory, gamma: float) -> Trajectory:
    """Fill G^t by the backward recursion G^t = r^t + gamma * G^{t+1}."""
    if not trajectory.complete:
        raise IncompleteTrajectory(f"seat {trajectory.seat} never reached terminal")
    g = 0.0
    for step in reversed(trajectory.steps):
        g = step.reward + gamma * g
        step.ret = g
    return trajectory


def returns_from_rewards(rewards: Sequence[float], gamma: float) -> np.ndarray:
    out = np.empty(len(rewards))
    g = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        g = rewards[t] + gamma * g
        out[t] = g
    return out


def batch_arrays(batch: Sequence[Transition]):
    flat = np.concatenate([
        np.stack([t.action for t in batch]).astype(np.float32),
        np.stack([t.flat_state for t in batch]).astype(np.float32)], axis=1)
    history = np.stack([t.history for t in batch]).astype(np.float32)
    targets = np.array([t.ret for t in batch], dtype=np.float32)
    return flat, history, targets


def learner_update(store: nn.ParamStore, batch: Sequence[Transition],
                   psi: float) -> float:
    """One MSE regression step of Q(s,a) toward G; returns pre-step loss."""
    flat, history, targets = batch_arrays(batch)
    out, cache = nn.forward(store, history, flat, want_cache=True)
    err = out[:, 0] - targets
    loss = float(np.mean(err ** 2))
    dout = (2.0 / len(batch)) * err[:, None]
    grads = nn.backward(cache, dout)
    nn.optimize_step(store, grads, psi, "descend")
    return loss
