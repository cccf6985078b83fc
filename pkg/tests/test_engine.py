import numpy as np
import pytest

import _oracles
from redten.cards import DECK_SIZE, parse_card, rank_counts
from redten.engine import (
    ALL_MASKS,
    Category,
    GameOver,
    GameState,
    IllegalMove,
    Move,
    NotACombination,
    PASS_MOVE,
    TeamMask,
    beats,
    classify,
    combination_census,
    deal,
    ground_truth_mask,
    legal_moves,
    pattern_of,
    read_replay,
    rigged_deal,
    step,
    write_replay,
)


def cards(*codes):
    return [parse_card(c) for c in codes]


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

def test_classify_solo_chain():
    combo = classify(cards("3H", "4C", "5D", "6S", "7H"))
    assert combo.category == Category.SOLO_CHAIN
    assert combo.key_rank == 0


def test_classify_solo_ten():
    combo = classify(cards("TH"))
    assert combo.category == Category.SOLO
    assert combo.key_rank == 7
    assert combo.ten_suits == 1  # heart bit


def test_classify_bomb():
    combo = classify(cards("9H", "9D", "9C", "9S"))
    assert combo.category == Category.BOMB
    assert combo.key_rank == 6


@pytest.mark.parametrize("codes,category,key", [
    (("3H", "3D"), Category.PAIR, 0),
    (("KH", "KD", "KC"), Category.TRIO, 10),
    (("KH", "KD", "KC", "2S"), Category.TRIO_SOLO, 10),
    (("KH", "KD", "KC", "2S", "2H"), Category.TRIO_PAIR, 10),
    (("3H", "3D", "4H", "4D", "5H", "5D"), Category.PAIR_CHAIN, 0),
    (("3H", "3D", "3C", "4H", "4D", "4C"), Category.AIRPLANE, 0),
    (("3H", "3D", "3C", "4H", "4D", "4C", "9S", "KD"),
     Category.AIRPLANE_SMALL, 0),
    (("3H", "3D", "3C", "4H", "4D", "4C", "9S", "9D", "KD", "KC"),
     Category.AIRPLANE_LARGE, 0),
    (("5H", "5D", "5C", "5S", "8H", "9D"), Category.FOUR_TWO_SINGLES, 2),
    (("5H", "5D", "5C", "5S", "8H", "8D", "9C", "9D"),
     Category.FOUR_TWO_PAIRS, 2),
])
def test_classify_categories(codes, category, key):
    combo = classify(cards(*codes))
    assert combo.category == category
    assert combo.key_rank == key


def test_classify_rejects_shapeless():
    with pytest.raises(NotACombination):
        classify(cards("3H", "5D"))
    with pytest.raises(NotACombination):
        classify([])
    # chains with rank 2 are not combinations
    with pytest.raises(NotACombination):
        classify(cards("JH", "QD", "KC", "AS", "2H"))


# ---------------------------------------------------------------------------
# beats
# ---------------------------------------------------------------------------

def test_beats_same_category_higher_rank():
    assert beats(classify(cards("KH", "KD")), classify(cards("9H", "9D")))
    assert not beats(classify(cards("9H", "9D")), classify(cards("KH", "KD")))


def test_bomb_beats_everything_but_higher_bomb():
    bomb5 = classify(cards("5H", "5D", "5C", "5S"))
    chain = classify(cards("3H", "4C", "5D", "6S", "7H"))
    assert beats(bomb5, chain)
    assert not beats(chain, bomb5)
    bomb9 = classify(cards("9H", "9D", "9C", "9S"))
    assert beats(bomb9, bomb5)
    assert not beats(bomb5, bomb9)


def test_chain_length_mismatch_never_beats():
    five = classify(cards("3H", "4C", "5D", "6S", "7H"))
    six = classify(cards("4H", "5C", "6D", "7S", "8H", "9D"))
    assert not beats(five, six)
    assert not beats(six, five)


def test_beats_irreflexive_antisymmetric():
    combos = [classify(cards("3H", "3D")), classify(cards("9H", "9D")),
              classify(cards("KH", "KD")), classify(cards("TH"))]
    for a in combos:
        assert not beats(a, a)
        for b in combos:
            assert not (beats(a, b) and beats(b, a))


# ---------------------------------------------------------------------------
# legal_moves + oracle
# ---------------------------------------------------------------------------

def test_single_card_hand():
    moves = legal_moves(cards("3H"))
    assert len(moves) == 1 and moves[0].combo.category == Category.SOLO


def test_cannot_beat_higher_pair():
    moves = legal_moves(cards("3H", "3D"), classify(cards("4H", "4D")))
    assert moves == [PASS_MOVE]


def test_ten_suit_variants_enumerated():
    moves = legal_moves(cards("TH", "TD", "TS"))
    solos = [m for m in moves if m.combo.category == Category.SOLO]
    pairs = [m for m in moves if m.combo.category == Category.PAIR]
    trios = [m for m in moves if m.combo.category == Category.TRIO]
    assert len(solos) == 3 and len(pairs) == 3 and len(trios) == 1
    assert {m.combo.ten_suits for m in solos} == {0b0001, 0b0010, 0b1000}


def test_legal_moves_sorted_deterministic():
    hand = cards("3H", "3D", "4H", "5S", "TH", "TD")
    a = legal_moves(hand)
    b = legal_moves(hand)
    assert a == b
    keys = [(m.combo.category, m.combo.key_rank, m.combo.ranks,
             m.combo.ten_suits) for m in a]
    assert keys == sorted(keys)


def _random_midgame_states(n, seed):
    return _oracles.random_midgame_states(n, seed)


def test_legal_moves_match_bruteforce_oracle_sample():
    for state in _random_midgame_states(40, 7):
        hand = list(state.hands[state.turn])
        lead = state.lead_combination()
        assert _oracles.engine_legal_keys(state.legal_moves()) == \
            _oracles.oracle_legal_keys(hand, lead)


def test_census_matches_independent_enumerator():
    assert combination_census() == _oracles.census_oracle()


# ---------------------------------------------------------------------------
# masks and patterns
# ---------------------------------------------------------------------------

def test_mask_bits_round_trip():
    assert len(ALL_MASKS) == 8
    for mask in ALL_MASKS:
        assert TeamMask.from_bits(mask.bits) == mask


def test_p1010_mask():
    for seat in range(4):
        assert ground_truth_mask(0b0101, seat) == TeamMask(0, 1, 0)


def test_p0000_mask():
    for seat in range(4):
        assert ground_truth_mask(0, seat) == TeamMask(1, 1, 1)


def test_p1000_masks():
    bits = 0b0001  # lone seat 0
    assert ground_truth_mask(bits, 0) == TeamMask(0, 0, 0)
    assert ground_truth_mask(bits, 1) == TeamMask(0, 1, 1)
    assert ground_truth_mask(bits, 2) == TeamMask(1, 0, 1)
    assert ground_truth_mask(bits, 3) == TeamMask(1, 1, 0)


def test_mask_symmetry():
    # i considers j a teammate iff j considers i one
    offsets = {3: 1, 2: 2, 1: 3}  # up<->down, front<->front
    for team_bits in (0b0011, 0b0101, 0b0110, 0b0001, 0b0100, 0):
        for i in range(4):
            mi = ground_truth_mask(team_bits, i)
            for off, inv in offsets.items():
                j = (i + off) % 4
                mj = ground_truth_mask(team_bits, j)
                assert mi[[3, 2, 1].index(off)] == mj[[3, 2, 1].index(inv)]


def test_real_deals_realize_seven_masks():
    seen = set()
    rng = np.random.default_rng(11)
    for _ in range(300):
        state = deal(int(rng.integers(2 ** 63)))
        for seat in range(4):
            seen.add(state.mask_for(seat).bits)
    assert seen == {m.bits for m in ALL_MASKS} - {TeamMask(1, 1, 1).bits}


def test_pattern_of():
    assert pattern_of(0b0011) == "1100"
    assert pattern_of(0b0110) == "1100"
    assert pattern_of(0b0101) == "1010"
    assert pattern_of(0b0010) == "1000"
    assert pattern_of(0) == "0000"


# ---------------------------------------------------------------------------
# dealing and stepping
# ---------------------------------------------------------------------------

def test_deal_thirteen_each_and_deterministic():
    a, b = deal(123), deal(123)
    for h in a.hands:
        assert len(h) == 13
    assert sorted(c for h in a.hands for c in h) == list(range(DECK_SIZE))
    assert [sorted(h) for h in a.hands] == [sorted(h) for h in b.hands]
    assert a.team_bits == b.team_bits


def test_duplicate_cards_rejected():
    with pytest.raises(ValueError):
        GameState([[0, 1], [1, 2], [3], [4]], 0)


def test_card_conservation_through_game():
    rng = np.random.default_rng(3)
    state = deal(99)
    while not state.is_terminal:
        moves = state.legal_moves()
        state.apply(moves[int(rng.integers(len(moves)))])
        in_hands = sum(len(h) for h in state.hands)
        played = sum(len(m.combo.cards) for _, m in state.history
                     if not m.is_pass)
        assert in_hands + played == DECK_SIZE
        # tracker consistency
        for s in range(4):
            assert rank_counts(state.hands[s]) == state.hand_counts[s]


def test_three_passes_clear_lead():
    state = deal(5)
    first = state.legal_moves()[0]
    state.apply(first)
    for _ in range(3):
        state.apply(PASS_MOVE)
    assert state.lead is None
    assert state.consecutive_passes == 0
    # next mover leads: pass is now illegal
    with pytest.raises(IllegalMove):
        state.apply(PASS_MOVE)


def test_cannot_pass_when_leading():
    state = deal(5)
    with pytest.raises(IllegalMove):
        state.apply(PASS_MOVE)


def test_terminal_winner_is_movers_team():
    # rig a two-card endgame
    state = rigged_deal([[parse_card("3H")], [parse_card("4H")],
                         [parse_card("5H")], [parse_card("6H")]], 0b0101)
    state.apply(state.legal_moves()[0])
    assert state.is_terminal
    assert state.terminal_winners == (0, 2)
    with pytest.raises(GameOver):
        state.apply(PASS_MOVE)


def test_step_is_pure():
    state = deal(5)
    before = [sorted(h) for h in state.hands]
    nxt = step(state, state.legal_moves()[0])
    assert [sorted(h) for h in state.hands] == before
    assert sum(len(h) for h in nxt.hands) == DECK_SIZE - 1


def test_illegal_move_rejected():
    state = None
    for seed in range(50):
        state = deal(seed)
        if 0 in state.hand_counts[0]:
            break
    missing_rank = state.hand_counts[0].index(0)
    with pytest.raises(IllegalMove):
        state.apply(Move(classify([missing_rank * 4])))


def test_turn_rotation():
    state = deal(5)
    seats = []
    rng = np.random.default_rng(0)
    for _ in range(12):
        seats.append(state.turn)
        moves = state.legal_moves()
        state.apply(moves[int(rng.integers(len(moves)))])
    assert seats == [i % 4 for i in range(12)]


# ---------------------------------------------------------------------------
# replay files
# ---------------------------------------------------------------------------

def _play_random_game(seed):
    rng = np.random.default_rng(seed)
    state = deal(seed)
    while not state.is_terminal:
        moves = state.legal_moves()
        state.apply(moves[int(rng.integers(len(moves)))])
    return state


def test_replay_round_trip(tmp_path):
    state = _play_random_game(17)
    path = tmp_path / "game.replay"
    write_replay(path, state)
    loaded = read_replay(path, verify=True)
    assert loaded.is_terminal
    assert loaded.terminal_winners == state.terminal_winners
    assert [(s, str(m)) for s, m in loaded.history] == \
        [(s, str(m)) for s, m in state.history]


def test_replay_header_and_format(tmp_path):
    state = _play_random_game(21)
    path = tmp_path / "game.replay"
    write_replay(path, state)
    lines = path.read_text().splitlines()
    assert lines[0] == f"seed={state.seed}"
    for ln in lines[1:]:
        seat, category, rest = ln.split(",", 2)
        assert seat in "0123"


def test_replay_detects_tampering(tmp_path):
    state = _play_random_game(33)
    path = tmp_path / "game.replay"
    write_replay(path, state)
    lines = path.read_text().splitlines()
    # swap the seat of the first move out of turn
    first = lines[1].split(",")
    first[0] = str((int(first[0]) + 1) % 4)
    path.write_text("\n".join([lines[0], ",".join(first)] + lines[2:]) + "\n")
    with pytest.raises(IllegalMove):
        read_replay(path)
