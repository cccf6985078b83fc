"""Parallel actor/learner training and the three-phase schedule:
policy bank first, then relation + danger regression, then
intrinsic-reward fine-tuning."""

from __future__ import annotations

import os
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import nn
from .agents import GroundTruthAgent
from .engine import GameState, TeamMask, deal, force_pattern
from .features import build_identify_features, build_q_state, encode_action
from .identify import (
    FinetuneSample,
    IdentifySample,
    danger_target,
    intrinsic_finetune_step,
    relation_target,
    train_step_rd,
)
from .policy import (
    PolicyBank,
    RLConfig,
    Trajectory,
    Transition,
    learner_update,
    mc_returns,
    q_values_from_features,
)

COOP_BITS = TeamMask(1, 1, 1).bits


class MissingCheckpoint(Exception):
    pass


class BufferClosed(Exception):
    pass


class SharedBuffer:
    """Bounded multi-producer/single-consumer transition queue with
    conservation counters. Producers stall when full."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: deque = deque()
        self._cond = threading.Condition()
        self.pushed = 0
        self.popped = 0
        self.closed = False

    def __len__(self):
        with self._cond:
            return len(self._items)

    def put_batch(self, batch) -> None:
        with self._cond:
            while len(self._items) + len(batch) > self.capacity and not self.closed:
                self._cond.wait(0.05)
            if self.closed:
                raise BufferClosed
            self._items.extend(batch)
            self.pushed += len(batch)
            self._cond.notify_all()

    def take(self, n: int, timeout: float = 0.1):
        """Pop exactly n transitions, or None if not available in time."""
        with self._cond:
            if len(self._items) < n:
                self._cond.wait(timeout)
            if len(self._items) < n:
                return None
            out = [self._items.popleft() for _ in range(n)]
            self.popped += n
            self._cond.notify_all()
            return out

    def close(self) -> None:
        with self._cond:
            self.closed = True
            self._cond.notify_all()


@dataclass
class TrainRun:
    phase: str                  # "policy" | "identify" | "finetune"
    config: RLConfig
    decks: int
    seed: int
    checkpoint_dir: str
    recurrent_hidden: int = 128
    mlp_width: int = 512
    actor_count: int = 1
    deterministic: bool = True
    p0000: float = 0.10
    deck_sampler: Optional[Callable] = None
    log_label: str = field(default="", repr=False)

    def __post_init__(self):
        if self.phase not in ("policy", "identify", "finetune"):
            raise ValueError(f"unknown phase {self.phase}")

    def q_spec(self):
        return nn.q_net_spec(self.recurrent_hidden, self.mlp_width)

    def sample_deck(self, rng: np.random.Generator) -> GameState:
        if self.deck_sampler is not None:
            return self.deck_sampler(rng)
        state = deal(int(rng.integers(2 ** 63)))
        if self.p0000 > 0 and rng.random() < self.p0000:
            force_pattern(state, 0)
        return state


def seat_gamma(cfg: RLConfig, mask_bits: int) -> float:
    return cfg.gamma_cooperative if mask_bits == COOP_BITS else cfg.gamma


def play_policy_deck(bank: PolicyBank, cfg: RLConfig,
                     rng: np.random.Generator, state: GameState):
    """Self-play one deck with epsilon-greedy acting under ground-truth
    masks; returns the return-annotated transitions."""
    trajectories = {seat: Trajectory(seat) for seat in range(4)}
    while not state.is_terminal:
        seat = state.turn
        mask = state.mask_for(seat)
        legal = state.legal_moves()
        flat, hist = build_q_state(state, seat)
        if cfg.epsilon > 0.0 and rng.random() < cfg.epsilon:
            idx = int(rng.integers(len(legal)))
        elif len(legal) == 1:
            idx = 0
        else:
            values = q_values_from_features(bank.store(mask), flat, hist, legal)
            idx = int(np.argmax(values))
        move = legal[idx]
        trajectories[seat].steps.append(Transition(
            flat.astype(np.uint8), hist.astype(np.uint8),
            encode_action(move).astype(np.uint8),
            0.0, 0.0, mask.bits, seat, state.t, 0))
        state.apply(move, check=False)

    T = state.t
    winners = set(state.terminal_winners)
    out = []
    for seat, traj in trajectories.items():
        if not traj.steps:
            continue
        traj.steps[-1].reward = 1.0 if seat in winners else -1.0
        traj.complete = True
        mc_returns(traj, seat_gamma(cfg, traj.steps[0].mask_bits))
        for tr in traj.steps:
            tr.T = T
        out.extend(traj.steps)
    return out


def play_identify_deck(bank: PolicyBank, cfg: RLConfig,
                       rng: np.random.Generator, state: GameState,
                       with_q_star: bool = False):
    """Play a real deal with the frozen bank under ground-truth masks,
    recording identification samples from every seat's perspective (all
    four per step, or the acting seat only when collecting fine-tune
    records with per-head greedy Q values)."""
    agent = GroundTruthAgent(bank, epsilon=cfg.epsilon)
    raw = []
    while not state.is_terminal:
        t = state.t
        if with_q_star:
            seat = state.turn
            legal = state.legal_moves()
            flat, hist = build_q_state(state, seat)
            q_star = np.array([
                float(np.max(q_values_from_features(
                    bank.stores[bits], flat, hist, legal)))
                for bits in range(8)])
            feats = build_identify_features(state, seat)
            raw.append((t, seat, feats, q_star))
        else:
            for seat in range(4):
                feats = build_identify_features(state, seat)
                raw.append((t, seat, feats, None))
        state.apply(agent.act(state, rng), check=False)

    T = state.t
    samples = []
    for t, seat, feats, q_star in raw:
        args = (feats.flat_state.astype(np.uint8),
                feats.history.astype(np.uint8),
                relation_target(state.team_bits, seat),
                danger_target(t, T), seat, t, T)
        samples.append(FinetuneSample(*args, q_star=q_star) if with_q_star
                       else IdentifySample(*args))
    return samples


class ParamServer:
    """Versioned global parameters with snapshot-on-read semantics."""

    def __init__(self, bank: PolicyBank):
        self._bank = bank
        self._lock = threading.Lock()

    def snapshot(self) -> PolicyBank:
        with self._lock:
            return self._bank.copy()

    def update(self, bits: int, batch, psi: float) -> float:
        with self._lock:
            return learner_update(self._bank.stores[bits], batch, psi)

    @property
    def bank(self) -> PolicyBank:
        return self._bank


def run_actor(server: ParamServer, buffers: dict, run: TrainRun,
              rng: np.random.Generator, deck_budget,
              stop_event: threading.Event) -> int:
    """Actor loop: refresh snapshot, self-play one deck, flush whole
    batches of flush_size per mask head. Returns decks played."""
    cfg = run.config
    local: dict[int, list] = {bits: [] for bits in range(8)}
    played = 0
    while not stop_event.is_set() and deck_budget.claim():
        bank = server.snapshot()
        trans = play_policy_deck(bank, cfg, rng, run.sample_deck(rng))
        for tr in trans:
            local[tr.mask_bits].append(tr)
        try:
            for bits, pool in local.items():
                while len(pool) >= cfg.flush_size:
                    buffers[bits].put_batch(pool[:cfg.flush_size])
                    del pool[:cfg.flush_size]
        except BufferClosed:
            break
        played += 1
    return played


def run_learner(server: ParamServer, buffers: dict, run: TrainRun,
                stop_event: threading.Event, log) -> int:
    """Learner loop: pop batch_size transitions per head whenever
    available and regress that head."""
    cfg = run.config
    updates = 0
    while True:
        idle = True
        for bits in range(8):
            batch = buffers[bits].take(cfg.batch_size, timeout=0.02)
            if batch is not None:
                loss = server.update(bits, batch, cfg.psi)
                updates += 1
                idle = False
                log(f"{updates},policy,{loss:.6f},-,{len(buffers[bits])}")
        if stop_event.is_set() and idle:
            drained = all(len(buffers[b]) < cfg.batch_size for b in range(8))
            if drained:
                return updates


class _DeckBudget:
    def __init__(self, total: int):
        self.remaining = total
        self._lock = threading.Lock()

    def claim(self) -> bool:
        with self._lock:
            if self.remaining <= 0:
                return False
            self.remaining -= 1
            return True


def _open_log(run: TrainRun):
    os.makedirs(run.checkpoint_dir, exist_ok=True)
    path = os.path.join(run.checkpoint_dir, "train_log.txt")
    fh = open(path, "a")

    def log(line: str) -> None:
        fh.write(line + "\n")
        fh.flush()

    return fh, log


def run_phase(run: TrainRun) -> dict:
    """Execute one training phase and write its checkpoints. Phases must
    run in order: policy, identify, finetune."""
    if run.phase == "policy":
        return _run_policy_phase(run)
    bank_dir = os.path.join(run.checkpoint_dir, "q_000")
    if not os.path.isdir(bank_dir):
        raise MissingCheckpoint("policy phase checkpoints not found")
    if run.phase == "identify":
        return _run_identify_phase(run)
    for name in ("relation", "danger"):
        if not os.path.isdir(os.path.join(run.checkpoint_dir, name)):
            raise MissingCheckpoint("identify phase checkpoints not found")
    return _run_finetune_phase(run)


def _run_policy_phase(run: TrainRun) -> dict:
    cfg = run.config
    rng = np.random.default_rng(run.seed)
    if os.path.isdir(os.path.join(run.checkpoint_dir, "q_000")):
        bank = PolicyBank.load(run.checkpoint_dir)  # resume
    else:
        bank = PolicyBank.fresh(run.q_spec(), run.seed)
    fh, log = _open_log(run)
    try:
        if run.deterministic:
            _policy_deterministic(run, bank, rng, log)
        else:
            _policy_threaded(run, bank, rng, log)
    finally:
        fh.close()
    bank.save(run.checkpoint_dir)
    return {"bank": run.checkpoint_dir}


def _policy_deterministic(run: TrainRun, bank: PolicyBank,
                          rng: np.random.Generator, log) -> None:
    cfg = run.config
    pools: dict[int, list] = {bits: [] for bits in range(8)}
    updates = 0
    for deck_i in range(run.decks):
        trans = play_policy_deck(bank, cfg, rng, run.sample_deck(rng))
        for tr in trans:
            pools[tr.mask_bits].append(tr)
        for bits in range(8):
            pool = pools[bits]
            while len(pool) >= cfg.batch_size:
                loss = learner_update(bank.stores[bits],
                                      pool[:cfg.batch_size], cfg.psi)
                del pool[:cfg.batch_size]
                updates += 1
                log(f"{updates},policy,{loss:.6f},{deck_i + 1},{len(pool)}")


def _policy_threaded(run: TrainRun, bank: PolicyBank,
                     rng: np.random.Generator, log) -> None:
    cfg = run.config
    server = ParamServer(bank)
    buffers = {bits: SharedBuffer(capacity=8 * cfg.batch_size)
               for bits in range(8)}
    stop = threading.Event()
    budget = _DeckBudget(run.decks)
    actor_rngs = rng.spawn(run.actor_count)
    threads = [threading.Thread(
        target=run_actor, args=(server, buffers, run, r, budget, stop),
        daemon=True) for r in actor_rngs]
    for th in threads:
        th.start()

    learner_done = []

    def learner():
        learner_done.append(run_learner(server, buffers, run, stop, log))

    lt = threading.Thread(target=learner, daemon=True)
    lt.start()
    for th in threads:
        th.join()
    stop.set()
    lt.join()
    for buf in buffers.values():
        buf.close()


def _identify_stores(run: TrainRun, fresh: bool):
    rel_spec = nn.relation_net_spec(run.recurrent_hidden, run.mlp_width)
    dan_spec = nn.danger_net_spec(run.recurrent_hidden, run.mlp_width)
    if fresh:
        return nn.init(rel_spec, run.seed + 1001), nn.init(dan_spec, run.seed + 1002)
    return (nn.ParamStore.load(os.path.join(run.checkpoint_dir, "relation")),
            nn.ParamStore.load(os.path.join(run.checkpoint_dir, "danger")))


def _real_deal(run: TrainRun, rng: np.random.Generator) -> GameState:
    if run.deck_sampler is not None:
        return run.deck_sampler(rng)
    return deal(int(rng.integers(2 ** 63)))


def _run_identify_phase(run: TrainRun) -> dict:
    cfg = run.config
    rng = np.random.default_rng(run.seed)
    bank = PolicyBank.load(run.checkpoint_dir)
    theta, alpha = _identify_stores(run, fresh=True)
    fh, log = _open_log(run)
    pool: list = []
    updates = 0
    try:
        for deck_i in range(run.decks):
            pool.extend(play_identify_deck(bank, cfg, rng, _real_deal(run, rng)))
            while len(pool) >= cfg.batch_size:
                order = rng.permutation(len(pool))[:cfg.batch_size]
                chosen = set(int(i) for i in order)
                batch = [pool[i] for i in sorted(chosen)]
                pool = [s for i, s in enumerate(pool) if i not in chosen]
                loss = train_step_rd(theta, alpha, batch, cfg.psi)
                updates += 1
                log(f"{updates},identify,{loss:.6f},{deck_i + 1},{len(pool)}")
    finally:
        fh.close()
    theta.save(os.path.join(run.checkpoint_dir, "relation"))
    alpha.save(os.path.join(run.checkpoint_dir, "danger"))
    return {"relation": os.path.join(run.checkpoint_dir, "relation"),
            "danger": os.path.join(run.checkpoint_dir, "danger")}


def _run_finetune_phase(run: TrainRun) -> dict:
    cfg = run.config
    rng = np.random.default_rng(run.seed)
    bank = PolicyBank.load(run.checkpoint_dir)
    theta, alpha = _identify_stores(run, fresh=False)
    fh, log = _open_log(run)
    pool: list = []
    updates = 0
    try:
        for deck_i in range(run.decks):
            pool.extend(play_identify_deck(bank, cfg, rng,
                                           _real_deal(run, rng),
                                           with_q_star=True))
            while len(pool) >= cfg.batch_size:
                batch = pool[:cfg.batch_size]
                del pool[:cfg.batch_size]
                r_int, loss = intrinsic_finetune_step(
                    theta, alpha, batch, cfg.intrinsic_weight,
                    cfg.relax_temperature, cfg.psi)
                updates += 1
                log(f"{updates},finetune,{loss:.6f},{deck_i + 1},{r_int:.4f}")
    finally:
        fh.close()
    theta.save(os.path.join(run.checkpoint_dir, "relation"))
    alpha.save(os.path.join(run.checkpoint_dir, "danger"))
    return {"relation": os.path.join(run.checkpoint_dir, "relation"),
            "danger": os.path.join(run.checkpoint_dir, "danger")}
