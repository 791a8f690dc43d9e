"""HTTP boundary: sensor measurements, device control, bubbles, events.

One background thread per session owns all mutation; handlers enqueue
commands and read the immutable snapshot published after each tick, so GET
paths never touch simulation state and stay fast. The event feed is a
bounded replay buffer addressed by gapless sequence numbers; clients poll
``/api/events/{sid}?since=N`` (optionally long-polling with ``wait``).

Plain HTTP: TLS termination is a deployment concern, not handled here.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from .scenario import Scenario, available_scenarios, load_scenario
from .session import Command, CommandError, Session
from .errors import InsufficientDataError, ScenarioError

EVENT_BUFFER = 100_000


class SessionHost:
    """Drives one session on a wall-clock tick loop and publishes snapshots."""

    def __init__(self, session: Session, tick_wall_s: float = 0.25, log_path: Path | None = None):
        self.session = session
        self.tick_wall_s = tick_wall_s
        self.events: deque[dict] = deque(maxlen=EVENT_BUFFER)
        self.first_seq = 1
        self._cond = threading.Condition()
        self._log_file = open(log_path, "a") if log_path else None
        session.event_sink = self._on_event
        for ev in session.events:  # session_start happened before the sink attached
            self._on_event(ev)
        self.snapshot = session.snapshot()
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name=f"tick-{session.id}", daemon=True)

    def _on_event(self, event: dict) -> None:
        from .wire import event_line

        if self.events and len(self.events) == self.events.maxlen:
            self.first_seq = self.events[0]["seq"] + 1
        self.events.append(event)
        if self._log_file is not None:
            self._log_file.write(event_line(event) + "\n")
            self._log_file.flush()

    def start(self) -> None:
        self._thread.start()

    def _run(self) -> None:
        while not self._stop.is_set() and not self.session.ended:
            t0 = time.monotonic()
            with self._cond:
                try:
                    self.session.advance(self.tick_wall_s)
                except Exception:
                    pass  # fault event already recorded; loop exits via ended flag
                self.snapshot = self.session.snapshot()
                self._cond.notify_all()
            elapsed = time.monotonic() - t0
            delay = self.tick_wall_s - elapsed
            if delay > 0:
                self._stop.wait(delay)
        with self._cond:
            self.snapshot = self.session.snapshot()
            self._cond.notify_all()
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    def stop(self) -> None:
        self._stop.set()
        if self._thread.is_alive():
            self._thread.join(timeout=5.0)

    def submit(self, command: Command, timeout_s: float = 5.0):
        """Queue a command and wait for its application at the tick boundary."""
        done = threading.Event()
        box: dict = {}

        def on_applied(result, error):
            box["result"], box["error"] = result, error
            done.set()

        with self._cond:
            self.session.submit(command, on_applied)
        if not done.wait(timeout_s):
            raise HTTPException(status_code=503, detail="session loop not responding")
        with self._cond:
            pass  # the tick loop publishes its snapshot before releasing the lock
        if box["error"] is not None:
            err: CommandError = box["error"]
            raise HTTPException(status_code=err.code, detail=err.detail)
        return box["result"]

    def events_since(self, since: int, wait_s: float = 0.0) -> list[dict]:
        deadline = time.monotonic() + wait_s
        with self._cond:
            while True:
                if self.events and since < self.first_seq - 1:
                    raise HTTPException(
                        status_code=410,
                        detail=f"events before seq {self.first_seq} expired; resync",
                    )
                out = [e for e in self.events if e["seq"] > since]
                if out or self.session.ended:
                    return out
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                self._cond.wait(remaining)


class StartSessionRequest(BaseModel):
    scenario: str
    mode: str = "ar_bubbles"
    seed: int = 0
    time_scale: float | None = Field(default=None, gt=0)


class ActionRequest(BaseModel):
    session_id: str
    target: str
    verb: str
    args: dict = Field(default_factory=dict)


def create_app(
    scenario: Scenario | None = None,
    seed: int = 0,
    time_scale: float | None = None,
    tick_wall_s: float = 0.25,
    log_dir: str | None = None,
    ui_dir: str | None = None,
) -> FastAPI:
    from contextlib import asynccontextmanager

    hosts: dict[str, SessionHost] = {}

    @asynccontextmanager
    async def lifespan(_app):
        yield
        for host in hosts.values():
            host.stop()

    app = FastAPI(title="ventlab", docs_url=None, redoc_url=None, lifespan=lifespan)
    counter = {"n": 0}
    lock = threading.Lock()
    default = {"scenario": scenario, "seed": seed, "time_scale": time_scale}

    def host_of(session_id: str) -> SessionHost:
        host = hosts.get(session_id)
        if host is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return host

    def start_host(sc: Scenario, mode: str, sd: int, ts: float | None) -> SessionHost:
        with lock:
            counter["n"] += 1
            sid = f"session-{counter['n']}"
        sess = Session(sc, mode=mode, seed=sd, session_id=sid, time_scale=ts)
        log_path = Path(log_dir) / f"{sid}.jsonl" if log_dir else None
        host = SessionHost(sess, tick_wall_s=tick_wall_s, log_path=log_path)
        hosts[sid] = host
        host.start()
        return host

    @app.get("/api/scenarios")
    def list_scenarios():
        return {"scenarios": available_scenarios()}

    @app.post("/api/session", status_code=201)
    def start_session(req: StartSessionRequest):
        try:
            sc = load_scenario(req.scenario)
        except ScenarioError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        ts = req.time_scale if req.time_scale is not None else default["time_scale"]
        try:
            host = start_host(sc, req.mode, req.seed, ts)
        except ScenarioError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return host.snapshot

    @app.get("/api/session/{session_id}")
    def get_session(session_id: str):
        return host_of(session_id).snapshot

    @app.get("/api/measure/{device_id}")
    def get_measure(device_id: str, session_id: str | None = None):
        candidates = (
            [host_of(session_id)] if session_id else list(reversed(list(hosts.values())))
        )
        for host in candidates:
            payload = host.snapshot["readings"].get(device_id)
            if payload is not None:
                if host.session.ended:
                    raise HTTPException(status_code=503, detail="session not running")
                return payload
        raise HTTPException(status_code=404, detail=f"unknown device {device_id!r}")

    @app.post("/api/action")
    def post_action(req: ActionRequest):
        host = host_of(req.session_id)
        result = host.submit(Command(target=req.target, verb=req.verb, args=req.args))
        return {"ok": True, "applied_t": host.session.t, "state": result}

    @app.get("/api/bubbles/{session_id}")
    def get_bubbles(session_id: str):
        snap = host_of(session_id).snapshot
        return {"t": snap["t"], "bubbles": snap["bubbles"]}

    @app.get("/api/heatmap/{session_id}")
    def get_heatmap(session_id: str, height: str = Query(default="T")):
        host = host_of(session_id)
        with host._cond:
            try:
                return host.session.heatmap(height)
            except ScenarioError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None

    @app.get("/api/metrics/{session_id}")
    def get_metrics(session_id: str):
        host = host_of(session_id)
        with host._cond:
            try:
                return host.session.metrics().to_dict()
            except InsufficientDataError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None

    @app.get("/api/events/{session_id}")
    def get_events(
        session_id: str,
        since: int = Query(default=0, ge=0),
        wait: float = Query(default=0.0, ge=0.0, le=30.0),
    ):
        host = host_of(session_id)
        events = host.events_since(since, wait_s=wait)
        return {"events": events, "ended": host.session.ended}

    if default["scenario"] is not None:
        start_host(default["scenario"], "ar_bubbles", default["seed"], default["time_scale"])

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
