"""HTTP session API for interactive play against the engine's strategies.

Endpoints (JSON bodies):

* ``POST /sessions``        {model?, variant, humanRole, claim} -> {sessionId, position, ...}
* ``GET /sessions/{id}``    full session state including the legal-move schema
* ``POST /sessions/{id}/move`` {move} -> {verdict, engineReply?, position, witnessSoFar?}
* ``DELETE /sessions/{id}``

Invalid human moves are rejected with status 422 and the violated inequality;
the session state is left untouched so the move can be corrected.  The engine
derives its moves from the synthesized strategies and witnesses; sessions are
independent and each one is serialized by its own lock.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Any, Optional

from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import HTMLResponse

from .errors import FixwitError, StructuralError, SynthesisError, TurnError
from .game import (
    DUAL,
    PRIMAL,
    ExistsMove,
    ExistsTurn,
    ForallTurn,
    MoveVerdict,
    TranscriptEntry,
    adversarial_forall_policy,
    dual_forall_strategy,
    exhaustive_forall_candidates,
    infinite_play_winner,
    primal_exists_strategy,
    synthesize_dual_strategy,
    synthesize_primal_strategy,
    validate_move,
)
from .lattice import BasisElement, basis_from_json, basis_to_json
from .modelio import LoadedModel, parse_model
from .witness import (
    DualWitnessPlayer,
    PrimalWitnessPlayer,
    dual_witness_from_strategy,
    primal_witness_from_strategy,
    witness_to_json,
)

MAX_ROUNDS = 200


@dataclass
class Session:
    sid: str
    model: LoadedModel
    instance: Any
    variant: str
    human_role: str
    position: ExistsTurn | ForallTurn
    history: list[TranscriptEntry] = field(default_factory=list)
    status: str = "active"
    winner: Optional[str] = None
    reason: str = ""
    exists_player: Optional[PrimalWitnessPlayer] = None
    forall_player: Optional[DualWitnessPlayer] = None
    initial_witness: Optional[dict] = None
    seen: set = field(default_factory=set)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def engine_role(self) -> str:
        return "forall" if self.human_role == "exists" else "exists"

    def turn(self) -> str:
        return "exists" if isinstance(self.position, ExistsTurn) else "forall"


def _position_json(session: Session) -> dict:
    pos = session.position
    inst = session.instance
    if isinstance(pos, ExistsTurn):
        return {
            "turn": "exists",
            "round": pos.round_index,
            "basis": basis_to_json(pos.basis),
            "description": f"claim position {pos.basis}",
        }
    return {
        "turn": "forall",
        "round": pos.round_index,
        "value": inst.behaviour.value_to_json(pos.value),
        "fromBasis": basis_to_json(pos.from_basis) if pos.from_basis else None,
        "description": "reply to the exists move",
    }


def _legal_moves(session: Session) -> dict:
    """Schema describing the moves available at the current position."""
    inst = session.instance
    model = session.model
    turn = session.turn()
    schema: dict[str, Any] = {"turn": turn, "states": list(model.names)}
    if session.status != "active":
        schema["moveType"] = "none"
        return schema
    if turn == "forall":
        candidates = _forall_candidates(session)
        schema["moveType"] = "basis"
        schema["candidates"] = [
            {"element": basis_to_json(c), "description": str(c)} for c in candidates
        ]
        return schema
    if model.kind == "bisim":
        schema["moveType"] = "relation"
    elif model.kind == "termination":
        schema["moveType"] = "valuation"
    else:
        schema["moveType"] = "distance"
        basis = session.position.basis
        if hasattr(basis, "x1"):
            lmc = model.model
            schema["couplingHelper"] = {
                "rows": [
                    {"state": model.state_name(y), "marginal": str(p)}
                    for y, p in lmc.delta[basis.x1]
                ],
                "cols": [
                    {"state": model.state_name(y), "marginal": str(p)}
                    for y, p in lmc.delta[basis.x2]
                ],
            }
    return schema


def _forall_candidates(session: Session) -> list[BasisElement]:
    inst = session.instance
    pos = session.position
    assert isinstance(pos, ForallTurn)
    if session.variant == PRIMAL:
        return exhaustive_forall_candidates(inst, pos.value)
    try:
        replies = dual_forall_strategy(inst, pos.from_basis)
    except (SynthesisError, FixwitError):
        replies = ()
    lat = inst.behaviour
    return [r for r in replies if lat.way_above(pos.value, lat.embed(r))]


def _exists_can_move(session: Session) -> bool:
    inst = session.instance
    lat = inst.behaviour
    basis = session.position.basis
    target = lat.embed(basis)
    if session.variant == PRIMAL:
        return lat.way_below(target, inst.behaviour_step(lat.top))
    return lat.leq(inst.behaviour_step(lat.bottom), target)


def _engine_exists_move(session: Session) -> Optional[ExistsMove]:
    inst = session.instance
    basis = session.position.basis
    if session.variant == PRIMAL:
        if session.exists_player is not None:
            try:
                if session.exists_player.current_basis != basis:
                    session.exists_player.observe(basis)
                return session.exists_player.move()
            except FixwitError:
                session.exists_player = None
        try:
            return ExistsMove(basis_set=primal_exists_strategy(inst, basis))
        except SynthesisError:
            pass
        if _exists_can_move(session):
            return ExistsMove(value=inst.behaviour.top)
        return None
    # dual game: defend with the highest computed iterate that stays valid
    chain = list(inst.iterates())
    for value in reversed(chain):
        candidate = ExistsMove(value=value)
        pos = session.position
        if validate_move(inst, session.variant, pos, candidate).ok:
            return candidate
    return None


def _engine_forall_move(session: Session) -> Optional[BasisElement]:
    inst = session.instance
    pos = session.position
    if session.variant == PRIMAL:
        return adversarial_forall_policy(inst)(pos)
    if session.forall_player is not None:
        try:
            return session.forall_player.respond(pos.value)
        except FixwitError:
            session.forall_player = None
    candidates = _forall_candidates(session)
    return candidates[0] if candidates else None


def _finish(session: Session, winner: str, reason: str) -> None:
    session.status = "finished"
    session.winner = winner
    session.reason = reason


def _apply_move(session: Session, player: str, move: Any, verdict: MoveVerdict) -> None:
    inst = session.instance
    pos = session.position
    if player == "exists":
        rendered = move.to_json(inst)
        session.history.append(
            TranscriptEntry(pos.round_index, "exists", rendered, verdict.ok, verdict.reason)
        )
        session.position = ForallTurn(
            move.materialize(inst), pos.round_index, from_basis=pos.basis
        )
    else:
        session.history.append(
            TranscriptEntry(pos.round_index, "forall", basis_to_json(move), verdict.ok, verdict.reason)
        )
        nxt = ExistsTurn(move, pos.round_index + 1)
        key = ("exists", move)
        if key in session.seen:
            _finish(
                session,
                infinite_play_winner(session.variant),
                "position repeated; infinite plays are won by " + infinite_play_winner(session.variant),
            )
        session.seen.add(key)
        session.position = nxt
        if nxt.round_index >= MAX_ROUNDS:
            _finish(session, infinite_play_winner(session.variant), "round limit reached")


def _run_engine(session: Session) -> list[dict]:
    """Let the engine move while it is its turn; returns its transcript entries."""
    replies: list[dict] = []
    inst = session.instance
    while session.status == "active" and session.turn() == session.engine_role:
        if session.turn() == "exists":
            move = _engine_exists_move(session)
            if move is None:
                _finish(session, "forall", "exists (engine) has no move")
                break
            verdict = validate_move(inst, session.variant, session.position, move)
            if not verdict.ok:
                _finish(session, "forall", f"engine played an invalid move: {verdict.reason}")
                break
            _apply_move(session, "exists", move, verdict)
            replies.append({"player": "exists", "move": move.to_json(inst), "detail": verdict.reason})
        else:
            reply = _engine_forall_move(session)
            if reply is None:
                _finish(session, "exists", "forall (engine) has no move")
                break
            verdict = validate_move(inst, session.variant, session.position, reply)
            if not verdict.ok:
                _finish(session, "exists", f"engine played an invalid move: {verdict.reason}")
                break
            _apply_move(session, "forall", reply, verdict)
            replies.append({"player": "forall", "move": basis_to_json(reply), "detail": verdict.reason})
    # after the engine's move, a stuck human loses immediately
    if session.status == "active" and session.turn() == session.human_role:
        if session.turn() == "forall" and not _forall_candidates(session):
            _finish(session, "exists", "forall is stuck (no legal reply)")
        elif session.turn() == "exists" and not _exists_can_move(session):
            _finish(session, "forall", "exists is stuck (no legal move)")
    return replies


def _witness_so_far(session: Session) -> Optional[dict]:
    inst = session.instance
    if session.exists_player is not None:
        return {
            "initial": session.initial_witness,
            "current": witness_to_json(inst, session.exists_player.current),
        }
    if session.forall_player is not None:
        return {
            "initial": session.initial_witness,
            "current": witness_to_json(inst, session.forall_player.current),
        }
    return {"initial": session.initial_witness, "current": None} if session.initial_witness else None


def _session_json(session: Session, engine_replies: Optional[list[dict]] = None) -> dict:
    out = {
        "sessionId": session.sid,
        "variant": session.variant,
        "humanRole": session.human_role,
        "status": session.status,
        "winner": session.winner,
        "reason": session.reason,
        "model": {"kind": session.model.kind, "names": list(session.model.names)},
        "position": _position_json(session),
        "legalMoves": _legal_moves(session),
        "history": [e.to_json() for e in session.history],
        "witnessSoFar": _witness_so_far(session),
    }
    if engine_replies is not None:
        out["engineReply"] = engine_replies
    return out


def create_app(
    default_model: Optional[LoadedModel] = None,
    default_variant: str = PRIMAL,
    default_role: str = "exists",
    max_iter: Optional[int] = None,
) -> FastAPI:
    app = FastAPI(title="fixwit game explorer", version="1")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def get_session(sid: str) -> Session:
        with registry_lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {sid}")
        return session

    @app.get("/", response_class=HTMLResponse)
    def index() -> str:
        return (
            "<html><body><h1>fixwit game explorer API</h1>"
            "<p>POST /sessions, GET /sessions/{id}, POST /sessions/{id}/move, "
            "DELETE /sessions/{id}</p></body></html>"
        )

    @app.post("/sessions")
    def create_session(body: dict = Body(...)) -> dict:
        try:
            if body.get("model") is not None:
                model = parse_model(body["model"])
            elif default_model is not None:
                model = default_model
            else:
                raise StructuralError("no model supplied and the server has no default")
            variant = body.get("variant", default_variant)
            if variant not in (PRIMAL, DUAL):
                raise StructuralError(f"unknown variant {variant!r}")
            human_role = body.get("humanRole", default_role)
            if human_role not in ("exists", "forall"):
                raise StructuralError(f"unknown role {human_role!r}")
            claim_text = body.get("claim")
            if not claim_text:
                raise StructuralError("a 'claim' field is required, e.g. 'x > 3/5' or 'u,v'")
            from .cli import UsageError, parse_claim_spec

            try:
                mode = PRIMAL if variant == PRIMAL else DUAL
                claim, _stmt = parse_claim_spec(model, claim_text, mode)
            except UsageError as exc:
                raise StructuralError(str(exc)) from exc
            instance = model.make_instance(max_iter)
            session = Session(
                sid=uuid.uuid4().hex,
                model=model,
                instance=instance,
                variant=variant,
                human_role=human_role,
                position=ExistsTurn(claim.element, 0),
            )
            session.seen.add(("exists", claim.element))
            # precompute the engine's witness when it plays from a provable claim
            try:
                if variant == PRIMAL and session.engine_role == "exists":
                    strategy = synthesize_primal_strategy(instance, claim.element)
                    witness = primal_witness_from_strategy(instance, claim.element, strategy)
                    session.exists_player = PrimalWitnessPlayer(instance, witness, claim.element)
                    session.initial_witness = witness_to_json(instance, witness)
                elif variant == DUAL and session.engine_role == "forall":
                    strategy = synthesize_dual_strategy(instance, claim.element)
                    witness = dual_witness_from_strategy(instance, claim.element, strategy)
                    session.forall_player = DualWitnessPlayer(instance, witness, claim.element)
                    session.initial_witness = witness_to_json(instance, witness)
            except (SynthesisError, FixwitError):
                pass  # unprovable claims: the engine falls back to best-effort moves
        except StructuralError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with session.lock:
            replies = _run_engine(session)
        with registry_lock:
            sessions[session.sid] = session
        return _session_json(session, replies)

    @app.get("/sessions/{sid}")
    def get_state(sid: str) -> dict:
        session = get_session(sid)
        with session.lock:
            return _session_json(session)

    @app.post("/sessions/{sid}/move")
    def post_move(sid: str, body: dict = Body(...)) -> dict:
        session = get_session(sid)
        with session.lock:
            if session.status != "active":
                raise HTTPException(status_code=422, detail="session is finished")
            if session.turn() != session.human_role:
                raise HTTPException(status_code=422, detail="not your turn")
            move_data = body.get("move")
            if move_data is None:
                raise HTTPException(status_code=422, detail="a 'move' field is required")
            inst = session.instance
            try:
                if session.turn() == "exists":
                    if isinstance(move_data, dict) and move_data.get("kind") == "basis_join":
                        move: Any = ExistsMove(
                            basis_set=tuple(
                                basis_from_json(e) for e in move_data["elements"]
                            )
                        )
                    else:
                        move = ExistsMove(value=inst.behaviour.value_from_json(move_data))
                else:
                    move = basis_from_json(move_data)
                verdict = validate_move(inst, session.variant, session.position, move)
            except (StructuralError, TurnError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            if not verdict.ok:
                raise HTTPException(status_code=422, detail=verdict.reason)
            _apply_move(session, session.turn(), move, verdict)
            replies = _run_engine(session)
            out = _session_json(session, replies)
            out["verdict"] = "accepted"
            return out

    @app.delete("/sessions/{sid}")
    def delete_session(sid: str) -> dict:
        with registry_lock:
            session = sessions.pop(sid, None)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {sid}")
        return {"deleted": sid}

    return app


def serve(
    model: LoadedModel,
    variant: str,
    human_role: str,
    host: str,
    port: int,
    max_iter: Optional[int] = None,
) -> None:
    import uvicorn

    app = create_app(model, variant, human_role, max_iter)
    uvicorn.run(app, host=host, port=port, log_level="warning")
