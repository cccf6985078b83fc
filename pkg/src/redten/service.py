"""Live game service: HTTP + server-push event stream consumed by the
browser UI and scripted clients. The engine on the server is the single
source of truth; submitted moves are re-validated before acceptance."""

from __future__ import annotations

import itertools
import json
import threading
import time
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .agents import IDRLAgent
from .cards import card_code, parse_card
from .engine import (
    GameState,
    IllegalMove,
    Move,
    NotACombination,
    PASS_MOVE,
    classify,
    deal,
)
from .runtime import CheckpointSet, UnknownAgentKind, make_agent

HUMAN = "human"


class CreateGame(BaseModel):
    agents: list[str]
    human_seat: Optional[int] = None
    seed: Optional[int] = None


class MoveBody(BaseModel):
    cards: object  # list of card codes, or the string "pass"


def _move_repr(move: Move) -> dict:
    if move.is_pass:
        return {"pass": True}
    return {"category": move.combo.category.name,
            "cards": [card_code(c) for c in (move.combo.cards or ())]}


def _legal_repr(move: Move) -> dict:
    if move.is_pass:
        return {"pass": True}
    cards = []
    # unresolved combos: name ranks canonically, tens by their suit mask
    from .cards import NUM_SUITS, TEN, make_card
    counts: dict[int, int] = {}
    for r in move.combo.ranks:
        counts[r] = counts.get(r, 0) + 1
    for r, k in sorted(counts.items()):
        if r == TEN:
            cards.extend(card_code(make_card(TEN, s)) for s in range(NUM_SUITS)
                         if (move.combo.ten_suits >> s) & 1)
        else:
            cards.extend([f"{'3456789TJQKA2'[r]}?"] * k)
    return {"category": move.combo.category.name,
            "key_rank": move.combo.key_rank,
            "ranks": list(move.combo.ranks),
            "ten_suits": move.combo.ten_suits,
            "cards": cards}


class GameSession:
    def __init__(self, sid: str, state: GameState, controllers: list,
                 human_seat: Optional[int], rng: np.random.Generator):
        self.sid = sid
        self.state = state
        self.controllers = controllers
        self.human_seat = human_seat
        self.rng = rng
        self.lock = threading.Lock()
        self.revision = 0
        self.frames: list[dict] = []

    def _record(self, seat: int, move: Move) -> None:
        self.revision += 1
        self.frames.append({
            "revision": self.revision,
            "seat": seat,
            "move": _move_repr(move),
            "terminal": self._terminal_repr(),
        })

    def _terminal_repr(self):
        if not self.state.is_terminal:
            return None
        winners = list(self.state.terminal_winners)
        label = "Landlord" if self.state.team_of(winners[0]) else "Peasant"
        return {"winners": winners, "team": label}

    def advance_agents(self) -> None:
        while not self.state.is_terminal and \
                self.controllers[self.state.turn] != HUMAN:
            seat = self.state.turn
            move = self.controllers[seat].act(self.state, self.rng)
            self.state.apply(move, check=True)
            self._record(seat, move)

    def apply_human(self, move: Move) -> None:
        seat = self.state.turn
        self.state.apply(move, check=True)
        self._record(seat, move)
        self.advance_agents()

    def view(self) -> dict:
        state = self.state
        human = self.human_seat
        out = {
            "game_id": self.sid,
            "revision": self.revision,
            "turn": state.turn,
            "human_seat": human,
            "pattern_public": None,  # identities stay hidden
            "hand_counts": [sum(c) for c in state.hand_counts],
            "history": [{"seat": s, "move": _move_repr(m)}
                        for s, m in state.history],
            "current_lead": (_move_repr(Move(state.lead[1]))
                             if state.lead else None),
            "lead_seat": state.lead[0] if state.lead else None,
            "terminal": self._terminal_repr(),
        }
        if human is not None:
            out["hand"] = sorted(
                (card_code(c) for c in state.hands[human]),
                key=lambda code: parse_card(code))
            if not state.is_terminal and state.turn == human:
                out["legal_moves"] = [_legal_repr(m) for m in state.legal_moves()]
            else:
                out["legal_moves"] = []
        return out

    def insight_series(self) -> list:
        from .evaluation import move_code, move_event
        rows = []
        for seat, ctrl in enumerate(self.controllers):
            if isinstance(ctrl, IDRLAgent):
                for rec in ctrl.insight:
                    rows.append({
                        "turn": rec.t, "seat": rec.seat,
                        "c_up": rec.confidence[0],
                        "c_front": rec.confidence[1],
                        "c_down": rec.confidence[2],
                        "d": rec.risk, "mask": f"{rec.mask_bits:03b}",
                        "move": move_code(rec.move),
                        "event": move_event(rec.move)})
        rows.sort(key=lambda r: r["turn"])
        return rows


def create_app(ckpt: Optional[CheckpointSet] = None,
               expose_insight: bool = False) -> FastAPI:
    app = FastAPI(title="red-ten game service")
    sessions: dict[str, GameSession] = {}
    counter = itertools.count(1)
    registry_lock = threading.Lock()

    def get_session(game_id: str) -> GameSession:
        with registry_lock:
            session = sessions.get(game_id)
        if session is None:
            raise HTTPException(404, "unknown game")
        return session

    @app.post("/v1/games")
    def create_game(body: CreateGame):
        if len(body.agents) != 4:
            raise HTTPException(400, "need exactly 4 agents")
        kinds = list(body.agents)
        if body.human_seat is not None:
            if not 0 <= body.human_seat <= 3:
                raise HTTPException(400, "human_seat out of range")
            kinds[body.human_seat] = HUMAN
        if kinds.count(HUMAN) > 1:
            raise HTTPException(400, "at most one human seat")
        human_seat = kinds.index(HUMAN) if HUMAN in kinds else None
        seed = body.seed if body.seed is not None else int(time.time_ns() % (2 ** 63))
        try:
            controllers = [HUMAN if k == HUMAN else make_agent(k, ckpt)
                           for k in kinds]
        except UnknownAgentKind as exc:
            raise HTTPException(400, str(exc))
        session = GameSession(f"g{next(counter)}", deal(seed), controllers,
                              human_seat, np.random.default_rng(seed))
        with registry_lock:
            sessions[session.sid] = session
        with session.lock:
            session.advance_agents()
        return {"game_id": session.sid, "seed": seed}

    @app.get("/v1/games/{game_id}")
    def get_game(game_id: str):
        session = get_session(game_id)
        with session.lock:
            return session.view()

    @app.post("/v1/games/{game_id}/moves")
    def post_move(game_id: str, body: MoveBody):
        session = get_session(game_id)
        with session.lock:
            if session.state.is_terminal:
                raise HTTPException(409, "game is over")
            if session.human_seat is None or \
                    session.state.turn != session.human_seat:
                raise HTTPException(409, "not your turn")
            if body.cards == "pass":
                move = PASS_MOVE
            else:
                if not isinstance(body.cards, list) or not body.cards:
                    raise HTTPException(400, "cards must be a list or 'pass'")
                try:
                    cards = [parse_card(c) for c in body.cards]
                    move = Move(classify(cards))
                except (ValueError, NotACombination) as exc:
                    raise HTTPException(400, f"not in legal set: {exc}")
                hand = session.state.hands[session.human_seat]
                if len(set(cards)) != len(cards) or any(c not in hand
                                                        for c in cards):
                    raise HTTPException(400, "not in legal set: cards not in hand")
            try:
                session.apply_human(move)
            except IllegalMove as exc:
                raise HTTPException(400, f"not in legal set: {exc}")
            return {"accepted": True, "revision": session.revision,
                    "terminal": session._terminal_repr()}

    @app.get("/v1/games/{game_id}/insight")
    def get_insight(game_id: str):
        if not expose_insight:
            raise HTTPException(404, "insight not exposed")
        session = get_session(game_id)
        with session.lock:
            return {"series": session.insight_series()}

    @app.get("/v1/games/{game_id}/stream")
    def stream(game_id: str, since: int = 0):
        session = get_session(game_id)

        def frames():
            cursor = since
            while True:
                with session.lock:
                    fresh = [f for f in session.frames
                             if f["revision"] > cursor]
                    done = session.state.is_terminal
                for frame in fresh:
                    cursor = frame["revision"]
                    yield f"data: {json.dumps(frame)}\n\n"
                if done and not fresh:
                    return
                if not fresh:
                    time.sleep(0.05)

        return StreamingResponse(frames(), media_type="text/event-stream")

    return app
