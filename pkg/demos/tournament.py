"""Paired seat-swap tournaments between the built-in agents.

Every deck seed is played twice (X at seat 0, then X at seats 1-3) with
the identical deal, and a deck scores for X iff the seat-0 team outcome
matches X's side. With trained checkpoints present the identification
agent joins the table.

Run:  python3 demos/tournament.py [decks]
"""

import sys
from pathlib import Path

from redten.evaluation import normalized_win_rate, play_match
from redten.runtime import CheckpointSet, make_agent

decks = int(sys.argv[1]) if len(sys.argv) > 1 else 100
desk = Path(__file__).resolve().parent.parent / "checkpoints" / "desk"
ckpt = CheckpointSet.load(desk) if desk.is_dir() else None

pairings = [("rule", "random"), ("random", "random")]
if ckpt is not None and ckpt.relation is not None and ckpt.danger is not None:
    pairings += [("idrl", "random"), ("idrl", "rule"), ("idrl", "mc:000")]
else:
    print("(no trained checkpoints found; baselines only)\n")

for x, y in pairings:
    results = play_match(lambda: make_agent(x, ckpt),
                         lambda: make_agent(y, ckpt), decks, seed=11)
    r = normalized_win_rate(results)
    lo, hi = r.interval
    print(f"{x:8s} vs {y:8s}  rate {r.rate:.3f}  "
          f"[{lo:.3f}, {hi:.3f}]  over {r.games} games")
    for name, row in r.per_identity.items():
        print(f"    as {name:8s} {row['scored']}/{row['games']}"
              f" = {row['rate']:.3f}")
