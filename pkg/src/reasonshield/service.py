"""HTTP + push service exposing live sessions to a judge console.

A session wraps one run of the step engine.  In ``live-human`` mode the
loop pauses after every executed action until a verdict (an accusation
or an explicit "no accusation") arrives; in ``batch-oracle`` mode the
oracle judges inline and stepping never pauses.  Step records and theory
revisions are also broadcast over a per-session WebSocket so consoles
can render without polling.

Sessions are fully isolated: each owns its engine, seeds, history, and
subscriber queues, and all commands for one session are serialized by
its lock.
"""

from __future__ import annotations

import asyncio
import json
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .bridge_env import CONSTELLATIONS, BridgeEnv, EnvConfig, WorldState
from .bridge_domain import action_type_specs, build_registry
from .judge import Accusation, InvalidVerdictError, OracleJudge
from .learner import InconsistentFeedbackError, ReasonTheory
from .logs import ListWriter
from .loop import StepEngine
from .replay import build_header
from .rl import QTable, RLConfig
from .theory_io import (
    TheoryFormatError,
    reason_theory_from_dict,
    reason_theory_to_dict,
    registry_from_dict,
)

MODES = ("live-human", "batch-oracle")


class CreateSessionRequest(BaseModel):
    mode: str = "live-human"
    constellation: str = "dilemma"
    seed: int = 0
    env: dict = {}
    rl: dict = {}
    theory: dict | None = None
    oracle_theory: dict | None = None
    shield_cap: int = 16
    verdict_timeout: float = 0.0  # seconds; 0 means wait forever


class VerdictRequest(BaseModel):
    accusation: dict | None = None


@dataclass
class Session:
    sid: str
    mode: str
    engine: StepEngine
    history: ListWriter
    verdict_timeout: float
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    subscribers: list[asyncio.Queue] = field(default_factory=list)
    pending_since: float | None = None
    pending_record: dict | None = None

    def state_view(self) -> dict:
        state = self.engine.state
        return world_state_view(state) if state is not None else None


def world_state_view(state: WorldState) -> dict:
    return {
        "agent": list(state.agent),
        "goal": list(state.goal),
        "persons": [
            {
                "id": p.pid,
                "pos": list(p.pos),
                "in_water_since": p.entered_water_at,
            }
            for p in state.persons
        ],
        "step": state.step,
        "delivered": state.delivered,
    }


def grid_view(env: BridgeEnv) -> dict:
    return {
        "width": env.grid.width,
        "height": env.grid.height,
        "terrain": list(env.grid.terrain),
        "spawn_row": env.grid.spawn_row,
        "goal_row": env.grid.goal_row,
    }


def create_app(console_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="reasonshield live service")
    sessions: dict[str, Session] = {}

    if console_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    def get_session(sid: str) -> Session:
        try:
            return sessions[sid]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no session {sid}") from None

    async def broadcast(session: Session, message: dict) -> None:
        for queue in list(session.subscribers):
            await queue.put(message)

    def theory_message(session: Session) -> dict:
        return {
            "type": "theory",
            "session": session.sid,
            "revision": session.engine.theory.revision,
            "theory": reason_theory_to_dict(session.engine.theory),
        }

    @app.post("/sessions")
    async def create_session(req: CreateSessionRequest):
        if req.mode not in MODES:
            raise HTTPException(status_code=422, detail=f"unknown mode {req.mode!r}")
        if req.constellation not in CONSTELLATIONS:
            raise HTTPException(
                status_code=422, detail=f"unknown constellation {req.constellation!r}"
            )
        try:
            env_config = EnvConfig.from_dict(req.env)
            rl_config = RLConfig.from_dict(req.rl)
        except ValueError as err:
            raise HTTPException(status_code=422, detail=str(err)) from None
        env = BridgeEnv(env_config)
        try:
            if req.theory is not None:
                theory = reason_theory_from_dict(req.theory)
                registry = registry_from_dict(req.theory, config=env_config)
                if not registry.action_type_names():
                    registry = build_registry(env_config)
            else:
                theory = ReasonTheory()
                registry = build_registry(env_config)
        except TheoryFormatError as err:
            raise HTTPException(status_code=422, detail=str(err)) from None
        judge = None
        judge_mode = "external"
        if req.mode == "batch-oracle":
            judge_mode = "oracle"
            from .bridge_domain import exemplary_theory

            oracle = (
                reason_theory_from_dict(req.oracle_theory)
                if req.oracle_theory is not None
                else exemplary_theory()
            )
            judge = OracleJudge(oracle, registry)
        history = ListWriter()
        theory_doc = dict(req.theory) if req.theory is not None else reason_theory_to_dict(theory)
        theory_doc.setdefault("actionTypes", action_type_specs())
        header = build_header(
            seed=req.seed,
            constellation=req.constellation,
            episodes=0,  # sessions run open-ended; epsilon stays at its floor
            env_config=env_config,
            rl_config=rl_config,
            theory_doc=theory_doc,
            judge_mode=judge_mode,
            shield_cap=req.shield_cap,
            learn=True,
            started_at=time.strftime("%Y-%m-%dT%H:%M:%S"),
        )
        if judge is not None:
            header["oracle_theory"] = reason_theory_to_dict(judge.ground_truth)
            header["oracle_theory"]["actionTypes"] = action_type_specs()
        history.write(header)
        engine = StepEngine(
            env=env,
            registry=registry,
            theory=theory,
            qtable=QTable(alpha=rl_config.alpha, gamma=rl_config.gamma),
            seed=req.seed,
            constellation=req.constellation,
            judge=judge,
            judge_mode=judge_mode,
            rl_config=rl_config,
            anneal_episodes=0,
            shield_cap=req.shield_cap,
            log_writer=history,
        )
        sid = uuid.uuid4().hex[:12]
        session = Session(
            sid=sid,
            mode=req.mode,
            engine=engine,
            history=history,
            verdict_timeout=req.verdict_timeout,
        )
        sessions[sid] = session
        return {
            "session": sid,
            "mode": req.mode,
            "revision": theory.revision,
            "grid": grid_view(env),
            "action_types": sorted(registry.action_type_names()),
            "theory": reason_theory_to_dict(theory),
        }

    @app.post("/sessions/{sid}/step")
    async def step(sid: str):
        session = get_session(sid)
        async with session.lock:
            engine = session.engine
            if session.pending_record is not None:
                expired = (
                    session.verdict_timeout > 0
                    and time.monotonic() - session.pending_since > session.verdict_timeout
                )
                if not expired:
                    raise HTTPException(
                        status_code=409,
                        detail="verdict pending; submit one or wait for the timeout",
                    )
                engine.resolve_verdict(None, source="timeout")
                await broadcast(session, {**session.pending_record, "verdict_source": "timeout"})
                session.pending_record = None
                session.pending_since = None
            outcome = engine.step_once()
            record = dict(outcome.record)
            record["session"] = sid
            record["pending_verdict"] = outcome.awaiting_verdict
            record["state_after"] = session.state_view()
            if outcome.awaiting_verdict:
                session.pending_record = record
                session.pending_since = time.monotonic()
            await broadcast(session, record)
            if record.get("verdict"):
                await broadcast(session, theory_message(session))
            return record

    @app.post("/sessions/{sid}/verdict")
    async def verdict(sid: str, req: VerdictRequest):
        session = get_session(sid)
        async with session.lock:
            engine = session.engine
            if session.pending_record is None:
                raise HTTPException(status_code=409, detail="no step awaiting a verdict")
            accusation = None
            if req.accusation is not None:
                try:
                    accusation = Accusation(
                        obligation=req.accusation["obligation"],
                        reason=req.accusation["reason"],
                    )
                except KeyError as err:
                    raise HTTPException(
                        status_code=422, detail=f"accusation missing field {err}"
                    ) from None
            try:
                revision = engine.resolve_verdict(accusation, source="human")
            except (InvalidVerdictError, InconsistentFeedbackError) as err:
                return {
                    "accepted": False,
                    "reason": str(err),
                    "revision": engine.theory.revision,
                }
            verdict_msg = {
                "type": "verdict",
                "session": sid,
                "t": session.pending_record["t"],
                "episode": session.pending_record["episode"],
                "accusation": (
                    {"obligation": accusation.obligation, "reason": accusation.reason}
                    if accusation
                    else None
                ),
                "source": "human",
                "revision": revision,
            }
            session.pending_record = None
            session.pending_since = None
            await broadcast(session, verdict_msg)
            if accusation is not None:
                await broadcast(session, theory_message(session))
            return {"accepted": True, "revision": revision}

    @app.get("/sessions/{sid}")
    async def session_state(sid: str):
        session = get_session(sid)
        return {
            "session": sid,
            "mode": session.mode,
            "episode": session.engine.episode,
            "revision": session.engine.theory.revision,
            "pending_verdict": session.pending_record is not None,
            "state": session.state_view(),
        }

    @app.get("/sessions/{sid}/theory")
    async def theory(sid: str):
        session = get_session(sid)
        return {
            "revision": session.engine.theory.revision,
            "theory": reason_theory_to_dict(session.engine.theory),
        }

    @app.get("/sessions/{sid}/history")
    async def history(sid: str):
        session = get_session(sid)
        return {"records": session.history.records}

    @app.websocket("/sessions/{sid}/stream")
    async def stream(websocket: WebSocket, sid: str):
        session = sessions.get(sid)
        if session is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        session.subscribers.append(queue)
        try:
            while True:
                message = await queue.get()
                await websocket.send_text(json.dumps(message, sort_keys=True))
        except WebSocketDisconnect:
            pass
        finally:
            if queue in session.subscribers:
                session.subscribers.remove(queue)

    return app
