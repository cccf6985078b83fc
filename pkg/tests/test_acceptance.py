"""Release gate: every acceptance criterion at its stated tolerance.

The desk-scale criteria load the shipped checkpoints under
checkpoints/desk (and the pre-finetune snapshot next to it); everything
else is self-contained.
"""

import filecmp
import os
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

import _oracles
import test_nn
from redten import nn
from redten.agents import GroundTruthAgent, play_deck
from redten.cards import RED_SUITS, TEN, parse_card
from redten.engine import TeamMask, combination_census, deal, rigged_deal
from redten.features import build_identify_features, build_q_state
from redten.policy import (
    PolicyBank,
    RLConfig,
    Trajectory,
    Transition,
    learner_update,
    mc_returns,
    q_values_from_features,
    returns_from_rewards,
)
from redten.runtime import CheckpointSet, make_agent
from redten.training import TrainRun, play_policy_deck, run_phase

ROOT = Path(__file__).resolve().parent.parent
DESK = ROOT / "checkpoints" / "desk"
PRE = ROOT / "checkpoints" / "desk_prefinetune"

EVAL_DECKS = 2000
HELD_OUT_DECKS = 500
HELD_OUT_BASE = 10_000_000


# ===========================================================================
# Criterion 1: engine equivalence against brute-force oracles
# ===========================================================================

def test_legal_moves_match_bruteforce_oracle():
    start = time.monotonic()
    mismatches = 0
    for state in _oracles.random_midgame_states(1000, seed=20260824):
        seat = state.turn
        want = _oracles.oracle_legal_keys(state.hands[seat],
                                          state.lead_combination())
        got = _oracles.engine_legal_keys(state.legal_moves())
        mismatches += want != got
    assert mismatches == 0
    assert time.monotonic() - start < 300


def test_census_identical_across_enumerators():
    assert combination_census() == _oracles.census_oracle()


# ===========================================================================
# Criterion 2: deal statistics
# ===========================================================================

def test_deal_statistics():
    start = time.monotonic()
    same = adjacent = opposite = 0
    n = 100_000
    th, td = TEN * 4 + 0, TEN * 4 + 1
    for seed in range(n):
        state = deal(seed)
        a = next(s for s in range(4) if th in state.hands[s])
        b = next(s for s in range(4) if td in state.hands[s])
        if a == b:
            same += 1
        elif (a - b) % 4 == 2:
            opposite += 1
        else:
            adjacent += 1
    assert abs(same / n - 0.2353) <= 0.01
    ratio = adjacent / opposite
    assert abs(ratio / 2.0 - 1.0) <= 0.02
    assert time.monotonic() - start < 60


# ===========================================================================
# Criterion 3: gradient correctness
# ===========================================================================

def test_backward_matches_finite_differences_twenty_nets():
    start = time.monotonic()
    for activation in ("identity", "sigmoid"):
        for seed in range(10):
            err = test_nn.max_rel_grad_error(seed, activation)
            assert err <= 1e-3, (activation, seed, err)
    assert time.monotonic() - start < 120


# ===========================================================================
# Criterion 4: Monte Carlo returns
# ===========================================================================

def test_returns_match_forward_sum_oracle():
    rng = np.random.default_rng(8)
    for _ in range(100):
        n = int(rng.integers(1, 60))
        gamma = float(rng.uniform(0, 1))
        rewards = rng.standard_normal(n)
        got = returns_from_rewards(rewards, gamma)
        want = np.array([
            sum(gamma ** (k - t) * rewards[k] for k in range(t, n))
            for t in range(n)])
        assert np.max(np.abs(got - want)) < 1e-9


def test_terminal_only_unit_gamma_is_constant():
    def step():
        return Transition(np.zeros(507, np.uint8), np.zeros((5, 208), np.uint8),
                          np.zeros(52, np.uint8), 0.0, 0.0, 0, 0, 0, 0)

    traj = Trajectory(0, [step() for _ in range(12)], complete=True)
    traj.steps[-1].reward = -1.0
    mc_returns(traj, 1.0)
    assert all(s.ret == -1.0 for s in traj.steps)


# ===========================================================================
# Criterion 5: micro-game optimality
# ===========================================================================

MICRO_HANDS = [["3H", "3D", "4H"], ["3C", "4D", "4C"], ["4S"], ["3S"]]
MICRO_BITS = 0b0101  # seats 0/2 versus 1/3; every mask is "cooperate front"


def micro_state():
    return rigged_deal([[parse_card(c) for c in h] for h in MICRO_HANDS],
                       MICRO_BITS)


def _abstract_key(state):
    return (tuple(tuple(hc[:2]) for hc in state.hand_counts),
            (None if state.lead is None else
             (state.lead[1].category, state.lead[1].key_rank,
              tuple(state.lead[1].ranks))),
            state.consecutive_passes, state.turn)


class MicroOracle:
    """Memoized team minimax over the enumerable two-rank variant."""

    def __init__(self):
        self.memo = {}

    def value(self, state):
        if state.is_terminal:
            return 1 if 0 in state.terminal_winners else -1
        key = _abstract_key(state)
        if key in self.memo:
            return self.memo[key]
        sign = 1 if state.team_of(state.turn) == state.team_of(0) else -1
        best = None
        for move in state.legal_moves():
            child = state.copy()
            child.apply(move, check=False)
            v = sign * self.value(child)
            if best is None or v > best:
                best = v
            if best == 1:
                break
        out = sign * best
        self.memo[key] = out
        return out

    def optimal_indices(self, state):
        sign = 1 if state.team_of(state.turn) == state.team_of(0) else -1
        target = sign * self.value(state)
        out = []
        for i, move in enumerate(state.legal_moves()):
            child = state.copy()
            child.apply(move, check=False)
            if sign * self.value(child) == target:
                out.append(i)
        return out


def _micro_reachable():
    """Every decision state reachable under any legal play, deduped by
    the exact feature bytes the policy net consumes."""
    seen = {}
    stack = [micro_state()]
    while stack:
        state = stack.pop()
        if state.is_terminal:
            continue
        flat, hist = build_q_state(state, state.turn)
        key = (state.turn, flat.tobytes(), hist.tobytes())
        if key in seen:
            continue
        seen[key] = state
        for move in state.legal_moves():
            child = state.copy()
            child.apply(move, check=False)
            stack.append(child)
    return list(seen.values())


def test_micro_game_training_reaches_bruteforce_optimum():
    start = time.monotonic()
    oracle = MicroOracle()
    states = _micro_reachable()
    assert len(states) > 50  # the variant is small but not degenerate

    bank = PolicyBank.fresh(nn.q_net_spec(8, 32), 0)
    rng = np.random.default_rng(0)
    pool = []
    decks = 8000
    for k in range(decks):
        # GLIE-style schedule: explore early, act greedily late
        eps = max(0.05, 1.0 - k / (0.8 * decks))
        cfg = RLConfig(epsilon=eps, psi=1e-3, batch_size=64, flush_size=8)
        pool.extend(play_policy_deck(bank, cfg, rng, micro_state()))
        while len(pool) >= 64:
            learner_update(bank.stores[pool[0].mask_bits], pool[:64], 1e-3)
            del pool[:64]

    mask = TeamMask(0, 1, 0)
    suboptimal = []
    for state in states:
        legal = state.legal_moves()
        if len(legal) == 1:
            continue
        flat, hist = build_q_state(state, state.turn)
        q = q_values_from_features(bank.store(mask), flat, hist, legal)
        if int(np.argmax(q)) not in oracle.optimal_indices(state):
            suboptimal.append(_abstract_key(state))
    assert suboptimal == []
    assert time.monotonic() - start < 600


# ===========================================================================
# Desk-scale criteria: shared checkpoint fixtures and cached matches
# ===========================================================================

@pytest.fixture(scope="module")
def desk():
    assert DESK.is_dir(), "trained desk checkpoints are missing"
    return CheckpointSet.load(DESK)


@pytest.fixture(scope="module")
def desk_pre():
    assert PRE.is_dir(), "pre-finetune checkpoint snapshot is missing"
    return CheckpointSet.load(PRE)


@lru_cache(maxsize=None)
def _match_rate(x_kind, y_kind, ckpt_name, seed):
    from redten.evaluation import normalized_win_rate, play_match

    ckpt = CheckpointSet.load(DESK if ckpt_name == "desk" else PRE)
    results = play_match(lambda: make_agent(x_kind, ckpt),
                         lambda: make_agent(y_kind, ckpt),
                         EVAL_DECKS, seed)
    return normalized_win_rate(results).rate


# ===========================================================================
# Criteria 6 and 7: win rates against baselines
# ===========================================================================

def test_idrl_beats_always_compete(desk):
    assert _match_rate("idrl", "mc:000", "desk", 101) >= 0.55


def test_idrl_beats_random(desk):
    assert _match_rate("idrl", "random", "desk", 102) >= 0.60


def test_idrl_beats_rule(desk):
    assert _match_rate("idrl", "rule", "desk", 103) >= 0.55


# ===========================================================================
# Criterion 8: identification quality and fine-tune regression guards
# ===========================================================================

def _held_out_samples(bank):
    """Per-step observer features plus ground truth over held-out decks."""
    flats, hists, rel_targets, dan_targets, post_exposure = [], [], [], [], []
    for k in range(HELD_OUT_DECKS):
        state = deal(HELD_OUT_BASE + k)
        agent = GroundTruthAgent(bank, epsilon=0.05)
        rng = np.random.default_rng(k)
        snapshots = []
        while not state.is_terminal:
            snapshots.append(state.copy())
            state.apply(agent.act(state, rng), check=False)
        T = state.t
        red_seen = 0
        exposed_flags = []
        for snap in snapshots:
            exposed_flags.append(red_seen == len(RED_SUITS))
            move = state.history[snap.t][1]
            if not move.is_pass:
                red_seen += sum(1 for s in RED_SUITS
                                if (move.combo.ten_suits >> s) & 1)
        for snap, exposed in zip(snapshots, exposed_flags):
            for seat in range(4):
                feats = build_identify_features(snap, seat)
                flats.append(feats.flat_state)
                hists.append(feats.history)
                rel_targets.append(list(state.mask_for(seat)))
                dan_targets.append(snap.t / T)
                post_exposure.append(exposed)
    return (np.array(flats, np.float32), np.array(hists, np.float32),
            np.array(rel_targets, np.float32),
            np.array(dan_targets, np.float32),
            np.array(post_exposure, bool))


def _batched_forward(store, hists, flats, chunk=512):
    outs = []
    for i in range(0, len(flats), chunk):
        outs.append(nn.forward(store, hists[i:i + chunk], flats[i:i + chunk]))
    return np.concatenate(outs, axis=0)


@pytest.fixture(scope="module")
def held_out(desk):
    return _held_out_samples(desk.bank)


def _identify_metrics(ckpt, held_out):
    flats, hists, rel_t, dan_t, exposed = held_out
    c = _batched_forward(ckpt.relation, hists, flats)
    d = _batched_forward(ckpt.danger, hists, flats)[:, 0]
    mae = float(np.mean(np.abs(d - dan_t)))
    mates = (rel_t == 1) & exposed[:, None]
    foes = (rel_t == 0) & exposed[:, None]
    return mae, float(c[mates].mean()), float(c[foes].mean())


def test_danger_tracks_game_progress(desk, held_out):
    mae, _, _ = _identify_metrics(desk, held_out)
    assert mae <= 0.10


def test_post_exposure_confidence_polarized(desk, held_out):
    _, mate_conf, foe_conf = _identify_metrics(desk, held_out)
    assert mate_conf >= 0.8
    assert foe_conf <= 0.2


def test_finetune_does_not_regress_danger(desk, desk_pre, held_out):
    mae_post, _, _ = _identify_metrics(desk, held_out)
    mae_pre, _, _ = _identify_metrics(desk_pre, held_out)
    assert mae_post <= mae_pre + 0.05


def test_finetune_does_not_regress_win_rate(desk, desk_pre):
    post = _match_rate("idrl", "mc:000", "desk", 101)
    pre = _match_rate("idrl", "mc:000", "pre", 101)
    assert post >= pre - 0.02


# ===========================================================================
# Criterion 9: constant-risk ablation sweep
# ===========================================================================

@pytest.mark.parametrize("risk", [0.2, 0.4, 0.6, 0.8])
def test_idrl_at_least_matches_constant_risk(desk, risk):
    rate = _match_rate("idrl", f"nu:{risk}", "desk", 110 + int(risk * 10))
    assert rate >= 0.50


# ===========================================================================
# Criterion 10: deterministic training reproducibility
# ===========================================================================

def test_deterministic_training_is_bit_identical(tmp_path):
    cfg = RLConfig(epsilon=0.2, psi=1e-3, flush_size=8, batch_size=32)
    for name in ("r1", "r2"):
        run = TrainRun(phase="policy", config=cfg, decks=5, seed=424242,
                       checkpoint_dir=str(tmp_path / name),
                       recurrent_hidden=4, mlp_width=8, deterministic=True)
        run_phase(run)
    for bits in range(8):
        a = tmp_path / "r1" / f"q_{bits:03b}" / "params.bin"
        b = tmp_path / "r2" / f"q_{bits:03b}" / "params.bin"
        assert filecmp.cmp(a, b, shallow=False)


# ===========================================================================
# Criterion 11: service smoke and redaction fuzz
# ===========================================================================

VIEW_KEYS = {"game_id", "revision", "turn", "human_seat", "pattern_public",
             "hand_counts", "history", "current_lead", "lead_seat",
             "terminal", "hand", "legal_moves"}


def _service_client(desk):
    from fastapi.testclient import TestClient

    from redten.service import create_app

    return TestClient(create_app(desk, expose_insight=False))


def _pick_cards(hand, entry):
    pool = list(hand)
    out = []
    for code in entry["cards"]:
        if code.endswith("?"):
            code = next(c for c in pool if c[0] == code[0])
        pool.remove(code)
        out.append(code)
    return out


def test_scripted_client_full_deck_against_idrl(desk):
    client = _service_client(desk)
    resp = client.post("/v1/games", json={
        "agents": ["human", "idrl", "idrl", "idrl"], "seed": 77})
    assert resp.status_code == 200
    gid = resp.json()["game_id"]
    for _ in range(200):
        view = client.get(f"/v1/games/{gid}").json()
        if view["terminal"]:
            break
        entry = view["legal_moves"][0]
        cards = "pass" if entry.get("pass") else _pick_cards(view["hand"],
                                                            entry)
        assert client.post(f"/v1/games/{gid}/moves",
                           json={"cards": cards}).status_code == 200
    else:
        raise AssertionError("deck did not finish")
    assert view["terminal"]["team"] in ("Landlord", "Peasant")


def test_views_never_leak_hidden_information(desk):
    client = _service_client(desk)
    gids = []
    for seed in range(4):
        resp = client.post("/v1/games", json={
            "agents": ["idrl"] * 4, "seed": seed})
        gids.append((resp.json()["game_id"], None))
    for seat in range(4):
        agents = ["idrl"] * 4
        agents[seat] = "human"
        resp = client.post("/v1/games", json={
            "agents": agents, "seed": 100 + seat})
        gids.append((resp.json()["game_id"], seat))

    rng = np.random.default_rng(0)
    for _ in range(1000):
        gid, human = gids[int(rng.integers(len(gids)))]
        view = client.get(f"/v1/games/{gid}").json()
        assert set(view) <= VIEW_KEYS
        assert view["pattern_public"] is None
        assert view["human_seat"] == human
        if human is None:
            assert "hand" not in view and "legal_moves" not in view
        else:
            assert len(view["hand"]) == view["hand_counts"][human]
            if view["terminal"] or view["turn"] != human:
                assert view["legal_moves"] == []
