"""Card primitives for the Red-10 deck.

A card is an int in 0..51: ``card = rank_index * 4 + suit_index``.
Rank indices 0..12 map to 3,4,5,6,7,8,9,10,J,Q,K,A,2 (shedding order,
3 lowest, 2 highest). Suit indices 0..3 map to Heart, Diamond, Club, Spade.
"""

from __future__ import annotations

NUM_RANKS = 13
NUM_SUITS = 4
DECK_SIZE = 52

RANK_NAMES = ["3", "4", "5", "6", "7", "8", "9", "T", "J", "Q", "K", "A", "2"]
SUIT_NAMES = ["H", "D", "C", "S"]

TEN = RANK_NAMES.index("T")  # rank index 7
RANK_TWO = RANK_NAMES.index("2")  # rank index 12; excluded from chains
# Highest rank index allowed inside a chain (Ace).
CHAIN_MAX_RANK = RANK_NAMES.index("A")

HEART, DIAMOND, CLUB, SPADE = range(4)
RED_SUITS = (HEART, DIAMOND)

FULL_DECK = tuple(range(DECK_SIZE))
RED_TENS = (TEN * 4 + HEART, TEN * 4 + DIAMOND)


def card_rank(card: int) -> int:
    return card >> 2


def card_suit(card: int) -> int:
    return card & 3


def make_card(rank: int, suit: int) -> int:
    return rank * 4 + suit


def card_code(card: int) -> str:
    """Two-letter code, e.g. 'TH' for the ten of hearts."""
    return RANK_NAMES[card_rank(card)] + SUIT_NAMES[card_suit(card)]


def parse_card(code: str) -> int:
    code = code.strip().upper()
    if len(code) != 2 or code[0] not in RANK_NAMES or code[1] not in SUIT_NAMES:
        raise ValueError(f"bad card code: {code!r}")
    return make_card(RANK_NAMES.index(code[0]), SUIT_NAMES.index(code[1]))


def is_red_ten(card: int) -> bool:
    return card_rank(card) == TEN and card_suit(card) in RED_SUITS


def rank_counts(cards) -> list[int]:
    counts = [0] * NUM_RANKS
    for c in cards:
        counts[card_rank(c)] += 1
    return counts
