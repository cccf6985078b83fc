"""Tournament protocol (paired seat-swapped decks), win-rate reports,
ablation runners, and identification-curve export."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .agents import IDRLAgent, play_deck
from .cards import TEN, card_code, card_rank, card_suit, RED_SUITS
from .engine import GameState, deal

AgentFactory = Callable[[], object]


@dataclass
class MatchResult:
    deck_seed: int
    pattern: str
    x_controls_seat0: bool
    seat0_team_won: bool
    x_scored: bool
    seat0_team: int  # 1 = landlord
    insight: Optional[list] = None


@dataclass
class WinRateReport:
    decks: int
    games: int
    x_score: int
    rate: float
    interval: tuple          # normal-approximation 95% bounds
    per_pattern: dict
    per_identity: dict       # seat-0 holder's team: Landlord / Peasant
    decks_per_second: float = 0.0


def _score(x_controls_seat0: bool, seat0_team_won: bool) -> bool:
    # A deck scores for X iff the seat-0 team wins when X holds seat 0,
    # and iff it loses when X holds the other three seats.
    return seat0_team_won == x_controls_seat0


def play_match(make_x: AgentFactory, make_y: AgentFactory, decks: int,
               seed: int, record_insight: bool = False) -> list[MatchResult]:
    """Paired design: every deck seed is played twice, X at seat 0 then X
    at seats 1-3, with the identical deal."""
    rng = np.random.default_rng(seed)
    deck_seeds = [int(s) for s in rng.integers(2 ** 63, size=decks)]
    results = []
    for k, deck_seed in enumerate(deck_seeds):
        for x_at_zero in (True, False):
            state = deal(deck_seed)
            agents = [(make_x() if (s == 0) == x_at_zero else make_y())
                      for s in range(4)]
            game_rng = np.random.default_rng((seed, k, int(x_at_zero)))
            play_deck(state, agents, game_rng)
            won = 0 in state.terminal_winners
            insight = None
            if record_insight:
                insight = [getattr(a, "insight", None) for a in agents]
            results.append(MatchResult(
                deck_seed, state.pattern, x_at_zero, won,
                _score(x_at_zero, won), state.team_of(0), insight))
    return results


def normalized_win_rate(results: list[MatchResult],
                        decks_per_second: float = 0.0) -> WinRateReport:
    if not results:
        raise ValueError("no results")
    games = len(results)
    score = sum(r.x_scored for r in results)
    rate = score / games
    half = 1.96 * np.sqrt(max(rate * (1 - rate), 1e-12) / games)
    per_pattern: dict = {}
    for r in results:
        won, total = per_pattern.get(r.pattern, (0, 0))
        per_pattern[r.pattern] = (won + r.x_scored, total + 1)
    per_identity: dict = {}
    for r in results:
        name = "Landlord" if r.seat0_team else "Peasant"
        won, total = per_identity.get(name, (0, 0))
        per_identity[name] = (won + r.x_scored, total + 1)
    return WinRateReport(
        decks=games // 2, games=games, x_score=score, rate=rate,
        interval=(rate - half, rate + half),
        per_pattern={p: {"scored": w, "games": n, "rate": w / n}
                     for p, (w, n) in sorted(per_pattern.items())},
        per_identity={p: {"scored": w, "games": n, "rate": w / n}
                      for p, (w, n) in sorted(per_identity.items())},
        decks_per_second=decks_per_second)


def timed_match(make_x, make_y, decks, seed) -> WinRateReport:
    start = time.perf_counter()
    results = play_match(make_x, make_y, decks, seed)
    elapsed = time.perf_counter() - start
    return normalized_win_rate(results, decks_per_second=2 * decks / elapsed)


# ---------------------------------------------------------------------------
# Result files (re-tallied by an independent script in the tests)
# ---------------------------------------------------------------------------

RESULT_HEADER = "deck_seed,pattern,x_controls_seat0,seat0_team_won,seat0_team"


def write_results(path, results: list[MatchResult]) -> None:
    with open(path, "w") as fh:
        fh.write(RESULT_HEADER + "\n")
        for r in results:
            fh.write(f"{r.deck_seed},{r.pattern},{int(r.x_controls_seat0)},"
                     f"{int(r.seat0_team_won)},{r.seat0_team}\n")


def read_results(path) -> list[MatchResult]:
    out = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != RESULT_HEADER:
            raise ValueError("bad result file header")
        for line in fh:
            seed_s, pattern, x0, won, team = line.strip().split(",")
            x_at_zero, seat0_won = bool(int(x0)), bool(int(won))
            out.append(MatchResult(int(seed_s), pattern, x_at_zero, seat0_won,
                                   _score(x_at_zero, seat0_won), int(team)))
    return out


# ---------------------------------------------------------------------------
# Curve export (confidence / risk traces with red-10 event flags)
# ---------------------------------------------------------------------------

CURVE_HEADER = "deck,turn,seat,c_up,c_front,c_down,d,mask,move,event"


def move_event(move) -> str:
    if move.is_pass or not (move.combo.ten_suits):
        return ""
    red = any(s in RED_SUITS for s in range(4) if (move.combo.ten_suits >> s) & 1)
    black = any(s not in RED_SUITS for s in range(4)
                if (move.combo.ten_suits >> s) & 1)
    return ("R" if red else "") + ("B" if black else "")


def move_code(move) -> str:
    """Canonical comma-free move string; works for unresolved shapes
    (tens carry their suit, other ranks print rank only)."""
    if move.is_pass:
        return "Pass"
    combo = move.combo
    if combo.cards is not None:
        body = "+".join(card_code(c) for c in combo.cards)
    else:
        parts, tens = [], [s for s in range(4) if (combo.ten_suits >> s) & 1]
        for r in combo.ranks:
            if r == TEN:
                parts.append(card_code(TEN * 4 + tens.pop(0)))
            else:
                parts.append(card_code(r * 4)[:-1])
        body = "+".join(parts)
    return f"{combo.category.name}:{body}"


def export_curves(make_agent: Callable[[], IDRLAgent], decks: int, seed: int,
                  path) -> None:
    """Play decks with four identification agents and dump every per-turn
    (confidence, risk, mask, move) record plus red/black ten event flags."""
    rng = np.random.default_rng(seed)
    with open(path, "w") as fh:
        fh.write(CURVE_HEADER + "\n")
        for k in range(decks):
            deck_seed = int(rng.integers(2 ** 63))
            state = deal(deck_seed)
            agents = [make_agent() for _ in range(4)]
            # game rng keyed by the deck seed so a service session created
            # with the same seed replays the identical deck
            play_deck(state, agents, np.random.default_rng(deck_seed))
            records = sorted((rec for a in agents for rec in a.insight),
                             key=lambda rec: rec.t)
            for rec in records:
                c = rec.confidence
                fh.write(f"{k},{rec.t},{rec.seat},{c[0]:.6f},{c[1]:.6f},"
                         f"{c[2]:.6f},{rec.risk:.6f},{rec.mask_bits:03b},"
                         f"{move_code(rec.move)},{move_event(rec.move)}\n")


# ---------------------------------------------------------------------------
# Ablations
# ---------------------------------------------------------------------------

def run_ablation(make_full: AgentFactory, make_ablated: AgentFactory,
                 decks: int, seed: int) -> WinRateReport:
    """Full pipeline (X) against an ablated variant (Y)."""
    return normalized_win_rate(play_match(make_full, make_ablated, decks, seed))
