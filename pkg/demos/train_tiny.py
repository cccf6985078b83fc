"""Run the full three-phase training schedule at toy scale and poke at
the resulting checkpoints. Finishes in well under a minute.

Phase 1 regresses the 8-head policy bank with epsilon-greedy self-play
Monte Carlo returns; phase 2 fits the relation + danger nets against
ground truth; phase 3 fine-tunes them on the intrinsic selection reward.

Run:  python3 demos/train_tiny.py
"""

import tempfile

import numpy as np

from redten.engine import deal
from redten.features import build_identify_features
from redten.identify import danger_forward, relation_forward
from redten.nn import ParamStore
from redten.policy import PolicyBank, RLConfig
from redten.training import TrainRun, run_phase

cfg = RLConfig(epsilon=0.2, psi=1e-3, flush_size=16, batch_size=64)
out = tempfile.mkdtemp(prefix="redten_tiny_")

for phase, decks in (("policy", 30), ("identify", 20), ("finetune", 10)):
    run = TrainRun(phase=phase, config=cfg, decks=decks, seed=3,
                   checkpoint_dir=out, recurrent_hidden=8, mlp_width=16)
    run_phase(run)
    print(f"{phase:8s} done ({decks} decks)")

print("\ncheckpoints in", out)
bank = PolicyBank.load(out)
print("policy heads:", ", ".join(f"q_{b:03b}" for b in range(8)),
      "| versions:", [s.version for s in bank.stores.values()])

theta = ParamStore.load(f"{out}/relation")
alpha = ParamStore.load(f"{out}/danger")
state = deal(1)
feats = build_identify_features(state, seat=0)
print("seat 0 confidence toward (up, front, down):",
      np.round(relation_forward(theta, feats), 3))
print("seat 0 danger estimate at t=0:",
      round(danger_forward(alpha, feats), 3))
print("(toy nets: values hover near 0.5 until real training)")
