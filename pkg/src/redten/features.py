"""Observation encoders.

Everything is a {0,1} indicator in float32. Card groups become 4x13
matrices (column sum = copies of that rank), ten suits become 4-wide
indicator vectors, and the recent-action window packs the last 20 moves
into 5 rows of 4 concatenated 52-blocks, oldest first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .cards import NUM_RANKS, NUM_SUITS, rank_counts
from .engine import (
    DOWN_OFFSET,
    FRONT_OFFSET,
    UP_OFFSET,
    GameState,
    Move,
    relative_seat,
)

CARD_BLOCK = 52
COUNT_BLOCK = 13
HISTORY_ROWS = 5
MOVES_PER_ROW = 4
HISTORY_COLS = MOVES_PER_ROW * CARD_BLOCK  # 208
WINDOW_MOVES = HISTORY_ROWS * MOVES_PER_ROW  # 20

Q_FLAT_STATE = 9 * CARD_BLOCK + 3 * COUNT_BLOCK  # 507
IDENTIFY_FLAT = 8 * CARD_BLOCK + 3 * COUNT_BLOCK + 5 * NUM_SUITS  # 475


def _layout(zones):
    table, offset = [], 0
    for name, width in zones:
        table.append((name, offset, width))
        offset += width
    return tuple(table)


# Offsets cover the concatenated [action | state] vector fed to the Q net.
Q_LAYOUT = _layout([
    ("action", CARD_BLOCK),
    ("own_hand", CARD_BLOCK),
    ("union_others_hands", CARD_BLOCK),
    ("current_lead", CARD_BLOCK),
    ("up_recent_play", CARD_BLOCK),
    ("front_recent_play", CARD_BLOCK),
    ("down_recent_play", CARD_BLOCK),
    ("up_played_union", CARD_BLOCK),
    ("front_played_union", CARD_BLOCK),
    ("down_played_union", CARD_BLOCK),
    ("up_hand_count", COUNT_BLOCK),
    ("front_hand_count", COUNT_BLOCK),
    ("down_hand_count", COUNT_BLOCK),
])

IDENTIFY_LAYOUT = _layout([
    ("own_hand", CARD_BLOCK),
    ("union_others_hands", CARD_BLOCK),
    ("up_recent_play", CARD_BLOCK),
    ("front_recent_play", CARD_BLOCK),
    ("down_recent_play", CARD_BLOCK),
    ("up_played_union", CARD_BLOCK),
    ("front_played_union", CARD_BLOCK),
    ("down_played_union", CARD_BLOCK),
    ("up_hand_count", COUNT_BLOCK),
    ("front_hand_count", COUNT_BLOCK),
    ("down_hand_count", COUNT_BLOCK),
    ("up_tens_played", NUM_SUITS),
    ("front_tens_played", NUM_SUITS),
    ("down_tens_played", NUM_SUITS),
    ("own_tens_ever_held", NUM_SUITS),
    ("tens_union_others_hands", NUM_SUITS),
])


def layout_tables() -> dict:
    """Zone name -> (offset, width) maps, for debug tooling and the UI."""
    return {
        "q": {name: {"offset": off, "width": w} for name, off, w in Q_LAYOUT},
        "identify": {name: {"offset": off, "width": w}
                     for name, off, w in IDENTIFY_LAYOUT},
        "history_window": {"rows": HISTORY_ROWS, "cols": HISTORY_COLS},
    }


def encode_counts(counts) -> np.ndarray:
    """Rank-count vector -> flattened 4x13 matrix, rows filled top-down."""
    mat = np.zeros((NUM_SUITS, NUM_RANKS), dtype=np.float32)
    for r, k in enumerate(counts):
        if k:
            mat[:k, r] = 1.0
    return mat.reshape(CARD_BLOCK)


def encode_cards(cards: Iterable[int]) -> np.ndarray:
    return encode_counts(rank_counts(cards))


def encode_suits10(tens) -> np.ndarray:
    """Suit set (iterable of suit indices, or a 4-bit mask) -> indicator."""
    if isinstance(tens, int):
        bits = tens
    else:
        bits = 0
        for s in tens:
            bits |= 1 << s
    return np.array([(bits >> s) & 1 for s in range(NUM_SUITS)],
                    dtype=np.float32)


def encode_hand_count(n: int) -> np.ndarray:
    vec = np.zeros(COUNT_BLOCK, dtype=np.float32)
    if n > 0:
        vec[n - 1] = 1.0
    return vec


def history_window(history_counts) -> np.ndarray:
    """Last 20 moves as a 5x208 window (passes are zero blocks)."""
    window = np.zeros((HISTORY_ROWS, HISTORY_COLS), dtype=np.float32)
    recent = history_counts[-WINDOW_MOVES:]
    start = WINDOW_MOVES - len(recent)
    for i, counts in enumerate(recent):
        slot = start + i
        row, col = divmod(slot, MOVES_PER_ROW)
        window[row, col * CARD_BLOCK:(col + 1) * CARD_BLOCK] = encode_counts(counts)
    return window


@dataclass
class QFeatures:
    action: np.ndarray      # 52
    flat_state: np.ndarray  # 507
    history: np.ndarray     # 5x208


@dataclass
class IdentifyFeatures:
    flat_state: np.ndarray  # 475
    history: np.ndarray     # 5x208


def _union_others(state: GameState, seat: int) -> np.ndarray:
    played = [sum(state.played_counts[s][r] for s in range(4))
              for r in range(NUM_RANKS)]
    return encode_counts([
        NUM_SUITS - state.hand_counts[seat][r] - played[r]
        for r in range(NUM_RANKS)])


def _recent_play(state: GameState, seat: int) -> np.ndarray:
    counts = state.last_play_counts[seat]
    if counts is None:
        return np.zeros(CARD_BLOCK, dtype=np.float32)
    return encode_counts(counts)


def build_q_state(state: GameState, seat: int) -> tuple[np.ndarray, np.ndarray]:
    """State portion of the Q input (507 flat values, 5x208 window).
    Shared across all candidate actions of one decision."""
    up = relative_seat(seat, UP_OFFSET)
    front = relative_seat(seat, FRONT_OFFSET)
    down = relative_seat(seat, DOWN_OFFSET)
    lead = state.lead_combination()
    parts = [
        encode_counts(state.hand_counts[seat]),
        _union_others(state, seat),
        encode_counts(_combo_counts(lead)) if lead is not None
        else np.zeros(CARD_BLOCK, dtype=np.float32),
        _recent_play(state, up),
        _recent_play(state, front),
        _recent_play(state, down),
        encode_counts(state.played_counts[up]),
        encode_counts(state.played_counts[front]),
        encode_counts(state.played_counts[down]),
        encode_hand_count(sum(state.hand_counts[up])),
        encode_hand_count(sum(state.hand_counts[front])),
        encode_hand_count(sum(state.hand_counts[down])),
    ]
    return np.concatenate(parts), history_window(state.history_counts)


def _combo_counts(combo) -> list[int]:
    counts = [0] * NUM_RANKS
    for r in combo.ranks:
        counts[r] += 1
    return counts


def encode_action(move: Move) -> np.ndarray:
    if move.is_pass:
        return np.zeros(CARD_BLOCK, dtype=np.float32)
    return encode_counts(_combo_counts(move.combo))


def build_q_features(state: GameState, seat: int, action: Move) -> QFeatures:
    flat, hist = build_q_state(state, seat)
    return QFeatures(encode_action(action), flat, hist)


def build_identify_features(state: GameState, seat: int) -> IdentifyFeatures:
    up = relative_seat(seat, UP_OFFSET)
    front = relative_seat(seat, FRONT_OFFSET)
    down = relative_seat(seat, DOWN_OFFSET)
    all_played_tens = (state.tens_played[0] | state.tens_played[1]
                       | state.tens_played[2] | state.tens_played[3])
    others_tens = 0xF & ~(state.tens_ever[seat] | all_played_tens)
    parts = [
        encode_counts(state.hand_counts[seat]),
        _union_others(state, seat),
        _recent_play(state, up),
        _recent_play(state, front),
        _recent_play(state, down),
        encode_counts(state.played_counts[up]),
        encode_counts(state.played_counts[front]),
        encode_counts(state.played_counts[down]),
        encode_hand_count(sum(state.hand_counts[up])),
        encode_hand_count(sum(state.hand_counts[front])),
        encode_hand_count(sum(state.hand_counts[down])),
        encode_suits10(state.tens_played[up]),
        encode_suits10(state.tens_played[front]),
        encode_suits10(state.tens_played[down]),
        encode_suits10(state.tens_ever[seat]),
        encode_suits10(others_tens),
    ]
    return IdentifyFeatures(np.concatenate(parts),
                            history_window(state.history_counts))
