"""Teammate identification: the relation network (confidence per
neighbor), the danger network (risk ratio regressed toward t/T), their
joint MSE loss, the cooperate/compete decision rule, and intrinsic-reward
fine-tuning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import nn
from .engine import GameState, TeamMask, ground_truth_mask
from .features import IdentifyFeatures, build_identify_features

# Rows: mask bits 0..7; columns: (up, front, down) membership.
_MASK_BITS = np.array([[(b >> 2) & 1, (b >> 1) & 1, b & 1] for b in range(8)],
                      dtype=np.float64)


def relation_forward(store: nn.ParamStore, feats: IdentifyFeatures) -> np.ndarray:
    """Confidence vector (up, front, down), each in [0,1]."""
    return nn.forward(store, feats.history, feats.flat_state)[0]


def danger_forward(store: nn.ParamStore, feats: IdentifyFeatures) -> float:
    return float(nn.forward(store, feats.history, feats.flat_state)[0, 0])


def decide_mask(confidence, risk: float) -> TeamMask:
    """Cooperate with a neighbor iff its confidence strictly exceeds the
    risk ratio; ties fall to compete."""
    return TeamMask(int(confidence[0] > risk), int(confidence[1] > risk),
                    int(confidence[2] > risk))


def relation_target(team_bits: int, seat: int) -> np.ndarray:
    mask = ground_truth_mask(team_bits, seat)
    return np.array([mask.up, mask.front, mask.down], dtype=np.float32)


def danger_target(t: int, T: int) -> float:
    return t / T


@dataclass
class IdentifySample:
    """One (time step, seat) training record for the identification nets."""
    flat_state: np.ndarray  # uint8, 475
    history: np.ndarray     # uint8, 5x208
    target_r: np.ndarray    # 3
    target_d: float
    seat: int
    t: int
    T: int


def make_targets(states: Sequence[GameState], final: GameState) -> list:
    """Identification samples for one completed deck: every decision step
    crossed with every seat's perspective. ``states`` are the pre-move
    states in order; ``final`` supplies T and the ground-truth teams."""
    if not final.is_terminal:
        raise ValueError("targets need a completed trajectory")
    T = final.t
    samples = []
    for state in states:
        for seat in range(4):
            feats = build_identify_features(state, seat)
            samples.append(IdentifySample(
                feats.flat_state.astype(np.uint8),
                feats.history.astype(np.uint8),
                relation_target(final.team_bits, seat),
                danger_target(state.t, T), seat, state.t, T))
    return samples


def _stack(batch: Sequence[IdentifySample]):
    flat = np.stack([s.flat_state for s in batch]).astype(np.float32)
    hist = np.stack([s.history for s in batch]).astype(np.float32)
    tr = np.stack([s.target_r for s in batch]).astype(np.float32)
    td = np.array([s.target_d for s in batch], dtype=np.float32)[:, None]
    return flat, hist, tr, td


def loss_rd(theta: nn.ParamStore, alpha: nn.ParamStore,
            batch: Sequence[IdentifySample]):
    """Summed relation + danger MSE (mean over outputs and batch) with
    gradients for both parameter sets."""
    flat, hist, tr, td = _stack(batch)
    c, cache_r = nn.forward(theta, hist, flat, want_cache=True)
    d, cache_d = nn.forward(alpha, hist, flat, want_cache=True)
    err_r, err_d = c - tr, d - td
    loss = float(np.mean(err_r ** 2) + np.mean(err_d ** 2))
    grads_r = nn.backward(cache_r, (2.0 / err_r.size) * err_r)
    grads_d = nn.backward(cache_d, (2.0 / err_d.size) * err_d)
    return loss, grads_r, grads_d


def loss_rd_value(theta: nn.ParamStore, alpha: nn.ParamStore,
                  batch: Sequence[IdentifySample]) -> float:
    flat, hist, tr, td = _stack(batch)
    c = nn.forward(theta, hist, flat)
    d = nn.forward(alpha, hist, flat)
    return float(np.mean((c - tr) ** 2) + np.mean((d - td) ** 2))


def train_step_rd(theta: nn.ParamStore, alpha: nn.ParamStore,
                  batch: Sequence[IdentifySample], psi: float) -> float:
    loss, grads_r, grads_d = loss_rd(theta, alpha, batch)
    nn.optimize_step(theta, grads_r, psi, "descend")
    nn.optimize_step(alpha, grads_d, psi, "descend")
    return loss


@dataclass
class FinetuneSample(IdentifySample):
    """Identification record augmented with the frozen bank's greedy Q
    value per mask head (constants during fine-tuning)."""
    q_star: Optional[np.ndarray] = None  # 8


def soft_selection_value(c, d, q_star, tau: float):
    """Differentiable surrogate for hard policy selection.

    Per neighbor j: w_j = sigmoid((c_j - d)/tau). A mask's weight is the
    product of w_j / (1 - w_j) factors, and the surrogate value is the
    weight-averaged greedy Q over the 8 heads. Returns the value and its
    gradients wrt c and d (Q treated as constant)."""
    s = 1.0 / (1.0 + np.exp(-(c - d) / tau))          # (B,3)
    w = np.ones((s.shape[0], 8))
    for j in range(3):
        bit = _MASK_BITS[:, j][None, :]
        w *= np.where(bit > 0, s[:, j:j + 1], 1.0 - s[:, j:j + 1])
    qw = w * q_star                                   # (B,8)
    value = qw.sum(axis=1)
    on = qw @ _MASK_BITS                              # (B,3): sum over masks with bit set
    dc = (on - s * value[:, None]) / tau
    dd = -dc.sum(axis=1, keepdims=True)
    return value, dc, dd


def intrinsic_finetune_step(theta: nn.ParamStore, alpha: nn.ParamStore,
                            batch: Sequence[FinetuneSample],
                            lam: float, tau: float, psi: float):
    """One gradient-ascent step on the intrinsic reward: the summed
    soft-selected Q surrogate minus lam times the identification loss.
    Policy parameters are not touched."""
    flat, hist, tr, td = _stack(batch)
    q_star = np.stack([s.q_star for s in batch])
    c, cache_r = nn.forward(theta, hist, flat, want_cache=True)
    d, cache_d = nn.forward(alpha, hist, flat, want_cache=True)
    value, dc, dd = soft_selection_value(
        c.astype(np.float64), d.astype(np.float64), q_star, tau)
    err_r, err_d = c - tr, d - td
    loss = float(np.mean(err_r ** 2) + np.mean(err_d ** 2))
    # both terms per-sample means so lam balances them independently of
    # the batch size
    n = float(len(batch))
    r_int = float(value.mean()) - lam * loss
    dout_r = dc / n - lam * (2.0 / err_r.size) * err_r
    dout_d = dd / n - lam * (2.0 / err_d.size) * err_d
    grads_r = nn.backward(cache_r, dout_r.astype(np.float32))
    grads_d = nn.backward(cache_d, dout_d.astype(np.float32))
    nn.optimize_step(theta, grads_r, psi, "ascend")
    nn.optimize_step(alpha, grads_d, psi, "ascend")
    return r_int, loss
