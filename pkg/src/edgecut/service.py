"""Live adaptive-elicitation sessions over HTTP.

Each session holds a grid posterior, presents one adaptively selected lottery
pair at a time, and ingests binary choices.  Every state transition (created,
presented, answered, completed) is appended to a per-session newline-
delimited JSON log and fsynced before the response is sent; replaying a log
reconstructs the session exactly, which is also how the service recovers
after a restart.

Responses are pure functions of (config, history): selection is
deterministic with lowest-index ties, so the random criterion is rejected in
configs.  Within a session, mutations are serialized; a concurrent second
mutation gets a conflict response.  Session ids are 128-bit random tokens;
there is no authentication (lab-LAN deployment).
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field, replace

import numpy as np
from pydantic import BaseModel, Field

from .econ import (
    THEORIES,
    EconConfig,
    GridPosterior,
    canonical_points,
    choice_prob_matrix,
    enumerate_tests,
    grid_points,
    select_econ_test,
    theory_indices,
    uniform_over_points,
    uniform_over_theories,
)

EVENTS = ("created", "presented", "answered", "completed")


class ReplayError(ValueError):
    """The session log is incomplete or inconsistent with the engine."""


@dataclass(frozen=True)
class ServiceConfig:
    """Session defaults: model space, prior, budget, selection criterion."""

    points: str = "canonical"  # "canonical" (4 models) or "grid" (58 points)
    prior: str = "uniform_theories"  # or "uniform_points"
    budget: int = 30
    criterion: str = "eff"
    cors: bool = True
    econ: EconConfig = field(default_factory=EconConfig)

    def __post_init__(self) -> None:
        if self.points not in ("canonical", "grid"):
            raise ValueError(f"unknown point set {self.points!r}")
        if self.prior not in ("uniform_theories", "uniform_points"):
            raise ValueError(f"unknown prior {self.prior!r}")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        # "random" would break determinism of (config, history) -> response
        if self.criterion not in ("eff", "ig", "us", "vs"):
            raise ValueError(f"criterion {self.criterion!r} not usable in sessions")

    def to_dict(self) -> dict:
        return {
            "points": self.points,
            "prior": self.prior,
            "budget": self.budget,
            "criterion": self.criterion,
            "cors": self.cors,
            "econ": self.econ.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ServiceConfig":
        base = cls()
        return cls(
            points=doc.get("points", base.points),
            prior=doc.get("prior", base.prior),
            budget=int(doc.get("budget", base.budget)),
            criterion=doc.get("criterion", base.criterion),
            cors=bool(doc.get("cors", base.cors)),
            econ=EconConfig.from_dict(doc.get("econ", {})),
        )


def save_service_config(config: ServiceConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")


def load_service_config(path: str) -> ServiceConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return ServiceConfig.from_dict(json.load(fh))


class _Engine:
    """Immutable per-config machinery: points, prior, choice probabilities."""

    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        self.pairs = enumerate_tests()
        pts = canonical_points(config.econ) if config.points == "canonical" else grid_points(config.econ)
        self.points = pts
        self.theory_idx = theory_indices(pts)
        prior = uniform_over_theories(pts) if config.prior == "uniform_theories" else uniform_over_points(pts)
        self.prior = prior.weights
        self.prob1 = choice_prob_matrix(pts, self.pairs, config.econ.crra_wealth_shift)

    def select(self, weights: np.ndarray, presented: np.ndarray) -> int:
        return select_econ_test(
            weights, self.theory_idx, self.prob1, presented, self.config.criterion
        )

    def update(self, weights: np.ndarray, pair_index: int, choice: int) -> np.ndarray:
        lik = self.prob1[:, pair_index] if choice == 1 else 1.0 - self.prob1[:, pair_index]
        w = weights * lik
        return w / w.sum()


_ENGINES: dict[str, _Engine] = {}


def get_engine(config: ServiceConfig) -> _Engine:
    key = json.dumps(config.to_dict(), sort_keys=True)
    if key not in _ENGINES:
        _ENGINES[key] = _Engine(config)
    return _ENGINES[key]


def pair_payload(engine: _Engine, pair_index: int) -> dict:
    pair = engine.pairs[pair_index]
    return {
        "pair_index": pair_index,
        "lottery1": {"payoffs": list(pair.first.payoffs), "probs": list(pair.first.probs)},
        "lottery2": {"payoffs": list(pair.second.payoffs), "probs": list(pair.second.probs)},
    }


@dataclass
class ElicitSession:
    """Mutable session state; the log is the durable source of truth."""

    session_id: str
    config: ServiceConfig
    engine: _Engine
    weights: np.ndarray
    presented: np.ndarray
    history: list  # (k, pair_index, choice, timestamp)
    pending: int | None  # pair index awaiting an answer
    seq: int  # next log sequence number

    @property
    def status(self) -> str:
        return "completed" if len(self.history) >= self.config.budget else "active"

    def posterior(self) -> GridPosterior:
        return GridPosterior(self.engine.points, self.weights)

    def posterior_payload(self) -> dict:
        post = self.posterior()
        marg = post.theory_marginals()
        return {
            "session_id": self.session_id,
            "history_length": len(self.history),
            "status": self.status,
            "theory_marginals": {th: float(m) for th, m in zip(THEORIES, marg)},
            "map_theory": post.map_theory(),
            "top_points": [
                {"theory": pt.theory, "params": list(pt.params), "weight": w}
                for pt, w in post.top_points(5)
            ],
        }


class SessionStore:
    """Sessions plus their append-only logs under one data directory."""

    def __init__(self, data_dir: str) -> None:
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)
        self.sessions: dict[str, ElicitSession] = {}
        self.locks: dict[str, threading.Lock] = {}
        self._recover()

    def _log_path(self, sid: str) -> str:
        return os.path.join(self.data_dir, f"{sid}.ndjson")

    def _append(self, session: ElicitSession, event: str, payload: dict) -> None:
        record = {
            "session_id": session.session_id,
            "seq": session.seq,
            "event": event,
            "payload": payload,
        }
        session.seq += 1
        with open(self._log_path(session.session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _recover(self) -> None:
        for name in sorted(os.listdir(self.data_dir)):
            if not name.endswith(".ndjson"):
                continue
            records = read_log(os.path.join(self.data_dir, name))
            session = session_from_log(records)
            self.sessions[session.session_id] = session
            self.locks[session.session_id] = threading.Lock()

    def create(self, config: ServiceConfig) -> ElicitSession:
        engine = get_engine(config)
        sid = secrets.token_hex(16)
        session = ElicitSession(
            session_id=sid,
            config=config,
            engine=engine,
            weights=engine.prior.copy(),
            presented=np.zeros(len(engine.pairs), dtype=bool),
            history=[],
            pending=None,
            seq=0,
        )
        self.sessions[sid] = session
        self.locks[sid] = threading.Lock()
        self._append(session, "created", {"config": config.to_dict()})
        first = engine.select(session.weights, session.presented)
        session.pending = first
        session.presented[first] = True
        self._append(session, "presented", {"k": 0, "pair_index": first})
        return session

    def answer(self, session: ElicitSession, choice: int, k: int | None = None) -> dict:
        """Apply one answer; the caller already holds the session lock."""
        if session.status == "completed" or session.pending is None:
            raise ConflictError("session is completed")
        step = len(session.history)
        if k is not None and k != step:
            raise ConflictError(f"answer targets step {k} but step {step} is pending")
        pair_index = session.pending
        session.weights = session.engine.update(session.weights, pair_index, choice)
        session.history.append((step, pair_index, choice, time.time()))
        session.pending = None
        self._append(
            session,
            "answered",
            {
                "k": step,
                "pair_index": pair_index,
                "choice": choice,
                "presented_seq": session.seq - 1,
                "timestamp": session.history[-1][3],
            },
        )
        if len(session.history) >= session.config.budget:
            self._append(session, "completed", {"history_length": len(session.history)})
            return {"posterior": session.posterior_payload(), "completed": True}
        nxt = session.engine.select(session.weights, session.presented)
        session.pending = nxt
        session.presented[nxt] = True
        self._append(session, "presented", {"k": len(session.history), "pair_index": nxt})
        return {
            "posterior": session.posterior_payload(),
            "next_test": pair_payload(session.engine, nxt),
        }


class ConflictError(RuntimeError):
    pass


class AnswerBody(BaseModel):
    choice: int = Field(ge=1, le=2)
    k: int | None = None


def read_log(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def session_from_log(records: list[dict]) -> ElicitSession:
    """Rebuild a session by replaying its log.

    Verifies dense sequence numbers, created-first, strict presented/answered
    alternation with matching steps and pairs, and that each logged
    presentation equals the engine's recomputed selection.
    """
    if not records:
        raise ReplayError("empty log")
    for i, rec in enumerate(records):
        if rec.get("seq") != i:
            raise ReplayError(f"sequence numbers not dense at position {i}")
        if rec.get("event") not in EVENTS:
            raise ReplayError(f"unknown event {rec.get('event')!r}")
    if records[0]["event"] != "created":
        raise ReplayError("log must start with a created record")
    config = ServiceConfig.from_dict(records[0]["payload"]["config"])
    engine = get_engine(config)
    session = ElicitSession(
        session_id=records[0]["session_id"],
        config=config,
        engine=engine,
        weights=engine.prior.copy(),
        presented=np.zeros(len(engine.pairs), dtype=bool),
        history=[],
        pending=None,
        seq=len(records),
    )
    completed = False
    for rec in records[1:]:
        if rec["session_id"] != session.session_id:
            raise ReplayError("log mixes sessions")
        if completed:
            raise ReplayError("records after completion")
        event, payload = rec["event"], rec["payload"]
        if event == "presented":
            if session.pending is not None:
                raise ReplayError(
                    f"presented at seq {rec['seq']} while step {len(session.history)} is unanswered"
                )
            if payload["k"] != len(session.history):
                raise ReplayError(f"presented step {payload['k']} out of order")
            expect = engine.select(session.weights, session.presented)
            if payload["pair_index"] != expect:
                raise ReplayError(
                    f"log presents pair {payload['pair_index']} but selection gives {expect}"
                )
            session.pending = payload["pair_index"]
            session.presented[payload["pair_index"]] = True
        elif event == "answered":
            if session.pending is None or payload["pair_index"] != session.pending:
                raise ReplayError(f"answer at seq {rec['seq']} has no matching presented record")
            if payload["k"] != len(session.history):
                raise ReplayError(f"answered step {payload['k']} out of order")
            if payload["choice"] not in (1, 2):
                raise ReplayError(f"invalid choice {payload['choice']!r}")
            session.weights = engine.update(session.weights, session.pending, payload["choice"])
            session.history.append(
                (payload["k"], session.pending, payload["choice"], payload.get("timestamp"))
            )
            session.pending = None
        else:  # completed
            if session.pending is not None:
                raise ReplayError("completed with an unanswered presented record")
            if payload.get("history_length") != len(session.history):
                raise ReplayError("completed record disagrees with history length")
            completed = True
    if completed and len(session.history) != config.budget:
        raise ReplayError("completed before reaching the budget")
    return session


def replay_posterior(records: list[dict]) -> dict:
    """Final posterior summary after replaying an exported log."""
    return session_from_log(records).posterior_payload()


def create_app(config: ServiceConfig, data_dir: str):
    """Build the FastAPI application bound to one store."""
    from fastapi import Body, FastAPI, HTTPException

    app = FastAPI(title="edgecut elicitation service")
    if config.cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )
    store = SessionStore(data_dir)
    app.state.store = store
    app.state.config = config

    def _get(sid: str) -> ElicitSession:
        session = store.sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.post("/sessions")
    def create_session(body: dict | None = Body(default=None)):
        overrides = (body or {}).get("config", {})
        try:
            session_config = ServiceConfig.from_dict({**config.to_dict(), **overrides})
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        session = store.create(session_config)
        return {
            "session_id": session.session_id,
            "budget": session_config.budget,
            "k": 0,
            "test": pair_payload(session.engine, session.pending),
        }

    @app.post("/sessions/{sid}/answer")
    def submit_answer(sid: str, body: AnswerBody):
        session = _get(sid)
        lock = store.locks[sid]
        if not lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a mutation is already in flight")
        try:
            return store.answer(session, body.choice, body.k)
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        finally:
            lock.release()

    @app.get("/sessions/{sid}/posterior")
    def get_posterior(sid: str):
        return _get(sid).posterior_payload()

    @app.get("/sessions/{sid}/log")
    def get_log(sid: str):
        _get(sid)
        return {"records": read_log(store._log_path(sid))}

    return app
