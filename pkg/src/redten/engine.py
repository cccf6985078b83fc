"""Deterministic Red-10 rules engine.

Dealing, the combination taxonomy, move legality, turn order, team and
pattern derivation, termination, and replay files.

Conventions fixed here (the rules text is silent on them):
  * seat 0 always leads the first trick
  * rank 2 never appears in a chain or airplane
  * a chain only beats a chain of the same length
  * bomb vs bomb compares key rank
  * passing is forbidden when leading
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Iterable, NamedTuple, Optional

import numpy as np

from .cards import (
    CHAIN_MAX_RANK,
    DECK_SIZE,
    NUM_RANKS,
    NUM_SUITS,
    RED_SUITS,
    TEN,
    card_code,
    card_rank,
    card_suit,
    make_card,
    parse_card,
    rank_counts,
)


class IllegalMove(Exception):
    pass


class GameOver(Exception):
    pass


class NotACombination(Exception):
    pass


class Category(IntEnum):
    SOLO = 0
    PAIR = 1
    TRIO = 2
    TRIO_SOLO = 3
    TRIO_PAIR = 4
    SOLO_CHAIN = 5
    PAIR_CHAIN = 6
    AIRPLANE = 7
    AIRPLANE_SMALL = 8
    AIRPLANE_LARGE = 9
    FOUR_TWO_SINGLES = 10
    FOUR_TWO_PAIRS = 11
    BOMB = 12


@dataclass(frozen=True)
class Combination:
    """A categorized card group.

    ``ranks`` is the sorted multiset of rank indices. ``ten_suits`` is a
    4-bit mask naming which physical tens are used (suits of non-ten cards
    carry no game meaning and are resolved canonically at play time).
    ``cards`` is the concrete card list, filled in once the move is applied.
    """

    category: Category
    key_rank: int
    ranks: tuple[int, ...]
    ten_suits: int = 0
    cards: Optional[tuple[int, ...]] = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return len(self.ranks)

    def with_cards(self, cards: Iterable[int]) -> "Combination":
        return replace(self, cards=tuple(sorted(cards)))

    def __str__(self) -> str:
        if self.cards is not None:
            body = " ".join(card_code(c) for c in self.cards)
        else:
            body = ",".join(str(r) for r in self.ranks)
        return f"{self.category.name}({body})"


@dataclass(frozen=True)
class Move:
    combo: Optional[Combination] = None

    @property
    def is_pass(self) -> bool:
        return self.combo is None

    def __str__(self) -> str:
        return "Pass" if self.combo is None else str(self.combo)


PASS_MOVE = Move(None)


class TeamMask(NamedTuple):
    """Relative cooperation decision toward the up/front/down players."""

    up: int
    front: int
    down: int

    @property
    def bits(self) -> int:
        return self.up * 4 + self.front * 2 + self.down

    @property
    def label(self) -> str:
        return f"{self.up}{self.front}{self.down}"

    @classmethod
    def from_bits(cls, bits: int) -> "TeamMask":
        return cls((bits >> 2) & 1, (bits >> 1) & 1, bits & 1)


ALL_MASKS = tuple(TeamMask.from_bits(b) for b in range(8))

# Relative seat offsets: the player after me is "down", opposite is
# "front", the one before me is "up".
UP_OFFSET, FRONT_OFFSET, DOWN_OFFSET = 3, 2, 1


def relative_seat(seat: int, offset: int) -> int:
    return (seat + offset) % 4


def ground_truth_mask(team_bits: int, seat: int) -> TeamMask:
    mine = (team_bits >> seat) & 1
    return TeamMask(
        int((team_bits >> relative_seat(seat, UP_OFFSET)) & 1 == mine),
        int((team_bits >> relative_seat(seat, FRONT_OFFSET)) & 1 == mine),
        int((team_bits >> relative_seat(seat, DOWN_OFFSET)) & 1 == mine),
    )


def pattern_of(team_bits: int) -> str:
    """Canonical pattern label for a team bitmap."""
    seats = [s for s in range(4) if (team_bits >> s) & 1]
    if not seats:
        return "0000"
    if len(seats) == 1:
        return "1000"
    if len(seats) == 2:
        return "1010" if (seats[1] - seats[0]) == 2 else "1100"
    raise ValueError(f"impossible team bitmap {team_bits:04b}")


# ---------------------------------------------------------------------------
# Combination classification
# ---------------------------------------------------------------------------

def classify(cards: Iterable[int]) -> Combination:
    """Categorize a concrete card multiset or raise NotACombination."""
    cards = tuple(sorted(cards))
    if not cards:
        raise NotACombination("empty card set")
    counts = rank_counts(cards)
    ten_suits = 0
    for c in cards:
        if card_rank(c) == TEN:
            ten_suits |= 1 << card_suit(c)
    shape = _classify_counts(counts)
    if shape is None:
        raise NotACombination(f"no category matches {[card_code(c) for c in cards]}")
    category, key_rank = shape
    ranks = tuple(sorted(card_rank(c) for c in cards))
    return Combination(category, key_rank, ranks, ten_suits, cards)


def _classify_counts(counts: list[int]) -> Optional[tuple[Category, int]]:
    present = [r for r in range(NUM_RANKS) if counts[r]]
    n = sum(counts)
    if len(present) == 1:
        r = present[0]
        return ([Category.SOLO, Category.PAIR, Category.TRIO, Category.BOMB][counts[r] - 1], r)
    by_count: dict[int, list[int]] = {}
    for r in present:
        by_count.setdefault(counts[r], []).append(r)

    if sorted(by_count) == [1, 3] and len(by_count[3]) == 1 and len(by_count[1]) == 1:
        return (Category.TRIO_SOLO, by_count[3][0])
    if sorted(by_count) == [2, 3] and len(by_count[3]) == 1 and len(by_count[2]) == 1:
        return (Category.TRIO_PAIR, by_count[3][0])
    if 4 in by_count and len(by_count[4]) == 1:
        four = by_count[4][0]
        kickers = n - 4
        if kickers == 2 and sorted(by_count) in ([1, 4], [2, 4]):
            return (Category.FOUR_TWO_SINGLES, four)
        if kickers == 4 and by_count.get(2) is not None and len(by_count.get(2, [])) == 2 \
                and sorted(by_count) == [2, 4]:
            return (Category.FOUR_TWO_PAIRS, four)

    def consecutive(ranks: list[int]) -> bool:
        return ranks[-1] <= CHAIN_MAX_RANK and ranks == list(range(ranks[0], ranks[0] + len(ranks)))

    values = set(counts[r] for r in present)
    if values == {1} and len(present) >= 5 and consecutive(present):
        return (Category.SOLO_CHAIN, present[0])
    if values == {2} and len(present) >= 3 and consecutive(present):
        return (Category.PAIR_CHAIN, present[0])
    if values == {3} and len(present) >= 2 and consecutive(present):
        return (Category.AIRPLANE, present[0])

    # Winged airplanes: a consecutive run of trios plus kickers drawn from
    # ranks outside the run.
    trio_ranks = [r for r in present if counts[r] >= 3 and r <= CHAIN_MAX_RANK]
    for wings, per_kicker in ((Category.AIRPLANE_SMALL, 1), (Category.AIRPLANE_LARGE, 2)):
        unit = 3 + per_kicker
        if n % unit:
            continue
        length = n // unit
        if length < 2:
            continue
        for start in trio_ranks:
            run = list(range(start, start + length))
            if run[-1] > CHAIN_MAX_RANK or any(counts[r] < 3 for r in run):
                continue
            rest = counts[:]
            for r in run:
                rest[r] -= 3
            if any(rest[r] for r in run):
                continue
            kick = [rest[r] for r in range(NUM_RANKS) if rest[r]]
            if per_kicker == 1 and sum(kick) == length:
                return (wings, start)
            if per_kicker == 2 and kick == [2] * length:
                return (wings, start)
    return None


# ---------------------------------------------------------------------------
# Beat relation
# ---------------------------------------------------------------------------

def beats(challenger: Combination, lead: Combination) -> bool:
    if challenger.category == Category.BOMB:
        if lead.category != Category.BOMB:
            return True
        return challenger.key_rank > lead.key_rank
    if lead.category == Category.BOMB:
        return False
    return (
        challenger.category == lead.category
        and challenger.size == lead.size
        and challenger.key_rank > lead.key_rank
    )


# ---------------------------------------------------------------------------
# Move generation
# ---------------------------------------------------------------------------

def _iter_shapes(counts: list[int]):
    """Yield (category, key_rank, ranks) for every combination shape
    formable from a rank-count vector. Sizes are capped at 13 cards
    (the largest legal hand)."""
    have = [r for r in range(NUM_RANKS) if counts[r]]

    for r in have:
        yield (Category.SOLO, r, (r,))
        if counts[r] >= 2:
            yield (Category.PAIR, r, (r, r))
        if counts[r] >= 3:
            yield (Category.TRIO, r, (r, r, r))
        if counts[r] >= 4:
            yield (Category.BOMB, r, (r, r, r, r))

    for r in have:
        if counts[r] < 3:
            continue
        for s in have:
            if s == r:
                continue
            yield (Category.TRIO_SOLO, r, tuple(sorted((r, r, r, s))))
            if counts[s] >= 2:
                yield (Category.TRIO_PAIR, r, tuple(sorted((r, r, r, s, s))))

    for r in have:
        if counts[r] < 4:
            continue
        others = [s for s in have if s != r]
        for k1, k2 in itertools.combinations_with_replacement(others, 2):
            if k1 == k2 and counts[k1] < 2:
                continue
            yield (Category.FOUR_TWO_SINGLES, r, tuple(sorted((r, r, r, r, k1, k2))))
        for k1, k2 in itertools.combinations(others, 2):
            if counts[k1] >= 2 and counts[k2] >= 2:
                yield (Category.FOUR_TWO_PAIRS, r,
                       tuple(sorted((r, r, r, r, k1, k1, k2, k2))))

    def runs(min_count: int, min_len: int, max_len: int):
        for start in range(CHAIN_MAX_RANK + 1):
            length = 0
            while (start + length <= CHAIN_MAX_RANK
                   and counts[start + length] >= min_count):
                length += 1
                if min_len <= length <= max_len:
                    yield start, length

    for start, length in runs(1, 5, 12):
        yield (Category.SOLO_CHAIN, start, tuple(range(start, start + length)))
    for start, length in runs(2, 3, 6):
        run = tuple(sorted(list(range(start, start + length)) * 2))
        yield (Category.PAIR_CHAIN, start, run)
    for start, length in runs(3, 2, 4):
        run = tuple(sorted(list(range(start, start + length)) * 3))
        yield (Category.AIRPLANE, start, run)

    for start, length in runs(3, 2, 3):
        chain = list(range(start, start + length))
        base = tuple(sorted(chain * 3))
        rest = [s for s in have if s not in chain]
        # small wings: one solo kicker per trio
        for kick in itertools.combinations_with_replacement(rest, length):
            usage: dict[int, int] = {}
            for s in kick:
                usage[s] = usage.get(s, 0) + 1
            if all(usage[s] <= counts[s] for s in usage):
                yield (Category.AIRPLANE_SMALL, start, tuple(sorted(base + kick)))
        # large wings: one pair kicker per trio (13 cards caps this at two trios)
        if length == 2:
            pair_ranks = [s for s in rest if counts[s] >= 2]
            for k1, k2 in itertools.combinations(pair_ranks, 2):
                yield (Category.AIRPLANE_LARGE, start,
                       tuple(sorted(base + (k1, k1, k2, k2))))


def _ten_suit_variants(ranks: tuple[int, ...], hand_tens: int):
    """Ten suit choices for a shape. Only tens carry suit identity, so a
    shape using k tens expands into one move per k-subset of the held
    ten suits."""
    n_tens = sum(1 for r in ranks if r == TEN)
    if n_tens == 0:
        return (0,)
    suits = [s for s in range(NUM_SUITS) if (hand_tens >> s) & 1]
    return tuple(sum(1 << s for s in pick)
                 for pick in itertools.combinations(suits, n_tens))


def generate_combinations(counts: list[int], hand_tens: int) -> list[Combination]:
    out = []
    for category, key_rank, ranks in _iter_shapes(counts):
        for tens in _ten_suit_variants(ranks, hand_tens):
            out.append(Combination(category, key_rank, ranks, tens))
    out.sort(key=lambda c: (c.category, c.key_rank, c.ranks, c.ten_suits))
    return out


def legal_moves_from_counts(counts: list[int], hand_tens: int,
                            lead: Optional[Combination]) -> list[Move]:
    combos = generate_combinations(counts, hand_tens)
    if lead is None:
        return [Move(c) for c in combos]
    return [Move(c) for c in combos if beats(c, lead)] + [PASS_MOVE]


def legal_moves(hand: Iterable[int], lead: Optional[Combination] = None) -> list[Move]:
    """All legal moves for a concrete hand against an optional lead."""
    hand = list(hand)
    tens = 0
    for c in hand:
        if card_rank(c) == TEN:
            tens |= 1 << card_suit(c)
    return legal_moves_from_counts(rank_counts(hand), tens, lead)


def combination_census() -> int:
    """Count the distinct combination shapes formable from the full deck
    (ten-suit choices not counted; size capped at a 13-card hand)."""
    seen = set()
    for category, key_rank, ranks in _iter_shapes([4] * NUM_RANKS):
        seen.add((category, key_rank, ranks))
    return len(seen)


# ---------------------------------------------------------------------------
# Game state
# ---------------------------------------------------------------------------

class GameState:
    """Authoritative table state for one deck.

    Owns the four hands plus derived trackers (per-seat played unions,
    last non-pass plays, ten-suit exposure) that the feature encoders
    read in O(1).
    """

    __slots__ = (
        "seed", "team_bits", "hands", "hand_counts", "hand_tens",
        "history", "history_counts", "played_counts", "last_play_counts",
        "tens_played", "tens_ever", "lead", "consecutive_passes", "turn",
        "terminal_winners",
    )

    def __init__(self, hands: list[list[int]], team_bits: int,
                 seed: Optional[int] = None):
        dealt = [c for h in hands for c in h]
        if len(set(dealt)) != len(dealt):
            raise ValueError("hands contain duplicate cards")
        self.seed = seed
        self.team_bits = team_bits
        self.hands = [set(h) for h in hands]
        self.hand_counts = [rank_counts(h) for h in hands]
        self.hand_tens = [self._tens_of(h) for h in hands]
        self.tens_ever = list(self.hand_tens)
        self.history: list[tuple[int, Move]] = []
        self.history_counts: list[tuple[int, ...]] = []
        self.played_counts = [[0] * NUM_RANKS for _ in range(4)]
        self.last_play_counts: list[Optional[tuple[int, ...]]] = [None] * 4
        self.tens_played = [0] * 4
        self.lead: Optional[tuple[int, Combination]] = None
        self.consecutive_passes = 0
        self.turn = 0
        self.terminal_winners: Optional[tuple[int, ...]] = None

    @staticmethod
    def _tens_of(cards: Iterable[int]) -> int:
        tens = 0
        for c in cards:
            if card_rank(c) == TEN:
                tens |= 1 << card_suit(c)
        return tens

    @property
    def t(self) -> int:
        return len(self.history)

    @property
    def is_terminal(self) -> bool:
        return self.terminal_winners is not None

    @property
    def pattern(self) -> str:
        return pattern_of(self.team_bits)

    def team_of(self, seat: int) -> int:
        return (self.team_bits >> seat) & 1

    def mask_for(self, seat: int) -> TeamMask:
        return ground_truth_mask(self.team_bits, seat)

    def lead_combination(self) -> Optional[Combination]:
        return self.lead[1] if self.lead else None

    def legal_moves(self) -> list[Move]:
        if self.is_terminal:
            raise GameOver("game is over")
        seat = self.turn
        return legal_moves_from_counts(
            self.hand_counts[seat], self.hand_tens[seat], self.lead_combination())

    def copy(self) -> "GameState":
        other = GameState.__new__(GameState)
        other.seed = self.seed
        other.team_bits = self.team_bits
        other.hands = [set(h) for h in self.hands]
        other.hand_counts = [list(c) for c in self.hand_counts]
        other.hand_tens = list(self.hand_tens)
        other.tens_ever = list(self.tens_ever)
        other.history = list(self.history)
        other.history_counts = list(self.history_counts)
        other.played_counts = [list(c) for c in self.played_counts]
        other.last_play_counts = list(self.last_play_counts)
        other.tens_played = list(self.tens_played)
        other.lead = self.lead
        other.consecutive_passes = self.consecutive_passes
        other.turn = self.turn
        other.terminal_winners = self.terminal_winners
        return other

    def _resolve_cards(self, seat: int, combo: Combination) -> list[int]:
        """Pick concrete cards for a shape: tens by the stated suit mask,
        everything else lowest suit first."""
        cards = []
        counts: dict[int, int] = {}
        for r in combo.ranks:
            counts[r] = counts.get(r, 0) + 1
        for r, k in counts.items():
            if r == TEN:
                if bin(combo.ten_suits).count("1") != k or \
                        (combo.ten_suits & ~self.hand_tens[seat]):
                    raise IllegalMove("ten suits not in hand")
                cards.extend(make_card(TEN, s) for s in range(NUM_SUITS)
                             if (combo.ten_suits >> s) & 1)
            else:
                picked = [make_card(r, s) for s in range(NUM_SUITS)
                          if make_card(r, s) in self.hands[seat]][:k]
                if len(picked) < k:
                    raise IllegalMove(f"hand lacks {k} cards of rank index {r}")
                cards.extend(picked)
        return cards

    def apply(self, move: Move, check: bool = True) -> None:
        """Apply a move in place. With check=True the move is validated
        against the current legal set semantics."""
        if self.is_terminal:
            raise GameOver("game is over")
        seat = self.turn
        if move.is_pass:
            if self.lead is None:
                raise IllegalMove("cannot pass when leading")
            self.history.append((seat, PASS_MOVE))
            self.history_counts.append((0,) * NUM_RANKS)
            self.consecutive_passes += 1
            if self.consecutive_passes == 3:
                self.lead = None
                self.consecutive_passes = 0
            self.turn = (self.turn + 1) % 4
            return

        combo = move.combo
        assert combo is not None
        if check:
            hc = self.hand_counts[seat]
            need: dict[int, int] = {}
            for r in combo.ranks:
                need[r] = need.get(r, 0) + 1
            if any(hc[r] < k for r, k in need.items()):
                raise IllegalMove("cards not in hand")
            lead = self.lead_combination()
            if lead is not None and not beats(combo, lead):
                raise IllegalMove(f"{combo} does not beat {lead}")
        cards = self._resolve_cards(seat, combo)
        played = combo.with_cards(cards)
        counts = rank_counts(cards)
        hc = self.hand_counts[seat]
        pc = self.played_counts[seat]
        for r in range(NUM_RANKS):
            hc[r] -= counts[r]
            pc[r] += counts[r]
            if check and hc[r] < 0:
                raise IllegalMove("cards not in hand")
        self.hands[seat].difference_update(cards)
        self.hand_tens[seat] &= ~played.ten_suits
        self.tens_played[seat] |= played.ten_suits
        self.history.append((seat, Move(played)))
        self.history_counts.append(tuple(counts))
        self.last_play_counts[seat] = tuple(counts)
        self.lead = (seat, played)
        self.consecutive_passes = 0
        if not self.hands[seat]:
            mine = self.team_of(seat)
            self.terminal_winners = tuple(
                s for s in range(4) if self.team_of(s) == mine)
        self.turn = (self.turn + 1) % 4


def step(state: GameState, move: Move) -> GameState:
    """Pure transition: returns a new state, leaving the input untouched."""
    nxt = state.copy()
    nxt.apply(move)
    return nxt


def deal(seed: int) -> GameState:
    """Deal a fresh deck: 13 cards each, in turn, seat 0 to lead."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(DECK_SIZE)
    hands = [[int(c) for c in perm[i::4]] for i in range(4)]
    team_bits = 0
    for s, hand in enumerate(hands):
        for c in hand:
            if card_rank(c) == TEN and card_suit(c) in RED_SUITS:
                team_bits |= 1 << s
    return GameState(hands, team_bits, seed=seed)


def rigged_deal(hands: list[list[int]], team_bits: int) -> GameState:
    """Build a state from explicit hands (training patterns, micro games)."""
    return GameState(hands, team_bits)


def force_pattern(state: GameState, team_bits: int) -> GameState:
    """Override team assignment (used to inject the all-cooperative
    training pattern, which no real deal produces)."""
    state.team_bits = team_bits
    return state


# ---------------------------------------------------------------------------
# Replay files
# ---------------------------------------------------------------------------

def write_replay(path, state: GameState) -> None:
    if state.seed is None:
        raise ValueError("replay files require a seeded deal")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"seed={state.seed}\n")
        for seat, move in state.history:
            if move.is_pass:
                fh.write(f"{seat},Pass,\n")
            else:
                assert move.combo is not None and move.combo.cards is not None
                cards = " ".join(card_code(c) for c in move.combo.cards)
                fh.write(f"{seat},{move.combo.category.name},{cards}\n")


def read_replay(path, verify: bool = True) -> GameState:
    """Rebuild a game from a replay file, re-validating every move."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("seed="):
        raise ValueError("replay missing seed header")
    state = deal(int(lines[0][5:]))
    for ln in lines[1:]:
        seat_s, category, cards_s = ln.split(",", 2)
        seat = int(seat_s)
        if seat != state.turn:
            raise IllegalMove(f"replay seat {seat} out of turn")
        if category == "Pass":
            move = PASS_MOVE
        else:
            combo = classify(parse_card(c) for c in cards_s.split())
            if combo.category.name != category:
                raise IllegalMove(f"replay category mismatch on line {ln!r}")
            move = Move(combo)
        if verify and not move.is_pass:
            key = (move.combo.category, move.combo.key_rank,
                   move.combo.ranks, move.combo.ten_suits)
            legal = {(m.combo.category, m.combo.key_rank, m.combo.ranks,
                      m.combo.ten_suits)
                     for m in state.legal_moves() if not m.is_pass}
            if key not in legal:
                raise IllegalMove(f"replayed move not legal: {ln!r}")
        state.apply(move)
    return state
