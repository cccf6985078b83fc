"""Watch the identification module at work: play decks with four
identification agents and trace per-turn confidence and danger, marking
the turns where red or black tens hit the table.

Needs trained checkpoints (checkpoints/desk). Also writes the same trace
in the curve CSV format used by `redten export-curves`.

Run:  python3 demos/identification_curves.py
"""

import tempfile
from pathlib import Path

import numpy as np

from redten.agents import IDRLAgent, play_deck
from redten.engine import deal
from redten.evaluation import export_curves, move_event
from redten.runtime import CheckpointSet

desk = Path(__file__).resolve().parent.parent / "checkpoints" / "desk"
ckpt = CheckpointSet.load(desk)

deck_seed = 2026
state = deal(deck_seed)
agents = [IDRLAgent(ckpt.relation, ckpt.danger, ckpt.bank)
          for _ in range(4)]
play_deck(state, agents, np.random.default_rng(deck_seed))

print(f"deck {deck_seed}, pattern {state.pattern}, "
      f"{state.t} moves, winners {state.terminal_winners}\n")
print(" t seat  c_up c_fr c_dn     d  mask  event  truth")
records = sorted((r for a in agents for r in a.insight), key=lambda r: r.t)
for rec in records:
    truth = state.mask_for(rec.seat)
    flag = move_event(rec.move)
    c = rec.confidence
    print(f"{rec.t:2d}  {rec.seat}   {c[0]:.2f} {c[1]:.2f} {c[2]:.2f}"
          f"  {rec.risk:.2f}   {rec.mask_bits:03b}   {flag or '-':>3s}"
          f"    {truth.bits:03b}")

# the same trace, machine-readable
with tempfile.NamedTemporaryFile(suffix=".csv", delete=False) as fh:
    export_curves(lambda: IDRLAgent(ckpt.relation, ckpt.danger, ckpt.bank),
                  decks=1, seed=5, path=fh.name)
    print("\ncurve CSV written to", fh.name)
