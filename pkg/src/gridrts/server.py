"""Instructor/executor session server.

One Session owns one authoritative game against a scripted opponent.  The
two human roles share player 0 and therefore see exactly the same fog-of-war
view; the instructor talks and steers (instruction/pause/resume/warn), the
executor clicks (unit commands) and asks.  Clients are dumb renderers: they
receive visible-state diffs at most 10 times per second and send intents
that the engine re-validates.

Wire protocol: JSON text frames, each with a ``type`` field from {hello,
join, state_diff, command, instruction, pause, resume, warn, ask, chat,
game_over, error} and a ``tick`` field.  See docs/protocol.md for examples.

The Session core is synchronous and transport-free so tests (and the replay
tooling) can drive it tick by tick; the FastAPI layer adds WebSockets and a
25 Hz real-time loop.
"""
from __future__ import annotations

import asyncio
import itertools
import json
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .balance import BalanceConfig
from .bots import make_bot
from .core import engine
from .core.types import ActionRecord, Outcome, UnitType
from .env import make_observation
from .mapgen import generate_map
from .replay import Recorder
from .selfplay import BOT_PERIOD

PROTOCOL_VERSION = 1
TICK_RATE = 25           # simulation ticks per wall-clock second while Running
BROADCAST_EVERY = 3      # ticks between diffs: 25/3 ~ 8.3 Hz (<= 10/s)
QUEUE_LIMIT = 256        # outbound frames per connection before we drop it

INSTRUCTOR = "instructor"
EXECUTOR = "executor"
ROLES = (INSTRUCTOR, EXECUTOR)

LOBBY = "lobby"
RUNNING = "running"
PAUSED = "paused"
FINISHED = "finished"


class SessionError(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def visible_snapshot(state, player: int, status: str) -> dict:
    """Everything the team may know, as one JSON-ready dict."""
    units = {}
    for u in state.units.values():
        if u.owner != player:
            continue
        units[str(u.id)] = {
            "kind": u.kind.key(), "owner": u.owner,
            "x": round(u.x_fp / 256.0, 4), "y": round(u.y_fp / 256.0, 4),
            "hp": u.hp, "max_hp": u.stats.max_hp,
            "action": u.current_action.type.name.lower(),
            "progress": round(u.build_progress, 3),
            "visible": True,
        }
    for uid, snap in state.vis[player].snapshots.items():
        stats = state.config.stats(snap.kind)
        units[str(uid)] = {
            "kind": snap.kind.key(), "owner": state.enemy_of(player),
            "x": round(snap.x_fp / 256.0, 4), "y": round(snap.y_fp / 256.0, 4),
            "hp": snap.hp, "max_hp": stats.max_hp,
            "action": snap.current_action.name.lower(),
            "progress": 1.0 if snap.complete else 0.0,
            "visible": bool(state.vis[player].cell_visible(snap.cell)),
        }
    resources = {
        str(r.id): {"x": r.x, "y": r.y, "remaining": r.remaining}
        for r in state.resources.values()
    }
    vis_rows = ["".join(str(v) for v in row) for row in state.vis[player].grid()]
    return {
        "tick": state.tick,
        "status": status,
        "money": state.money[player],
        "units": units,
        "resources": resources,
        "visibility": vis_rows,
        "outcome": Outcome.name(state.outcome),
    }


def diff_snapshots(old: dict, new: dict) -> dict:
    """Minimal patch that turns ``old`` into ``new`` (see apply_diff)."""
    diff: dict = {}
    for scalar in ("tick", "status", "money", "outcome"):
        if old.get(scalar) != new[scalar]:
            diff[scalar] = new[scalar]
    for table in ("units", "resources"):
        changed = {k: v for k, v in new[table].items() if old[table].get(k) != v}
        removed = [k for k in old[table] if k not in new[table]]
        if changed:
            diff[table] = changed
        if removed:
            diff[f"{table}_removed"] = removed
    vis_changes = []
    for y, (old_row, new_row) in enumerate(zip(old["visibility"], new["visibility"])):
        if old_row != new_row:
            for x, (a, b) in enumerate(zip(old_row, new_row)):
                if a != b:
                    vis_changes.append([x, y, int(b)])
    if vis_changes:
        diff["visibility"] = vis_changes
    return diff


def apply_diff(snapshot: dict, diff: dict) -> dict:
    """Client-side patch application; the inverse of diff_snapshots."""
    out = {
        "tick": diff.get("tick", snapshot["tick"]),
        "status": diff.get("status", snapshot["status"]),
        "money": diff.get("money", snapshot["money"]),
        "outcome": diff.get("outcome", snapshot["outcome"]),
        "units": dict(snapshot["units"]),
        "resources": dict(snapshot["resources"]),
        "visibility": list(snapshot["visibility"]),
    }
    for table in ("units", "resources"):
        for k, v in diff.get(table, {}).items():
            out[table][k] = v
        for k in diff.get(f"{table}_removed", ()):
            out[table].pop(k, None)
    for x, y, v in diff.get("visibility", ()):
        row = out["visibility"][y]
        out["visibility"][y] = row[:x] + str(v) + row[x + 1:]
    return out


class Session:
    """One game, two human roles, one scripted opponent."""

    def __init__(self, session_id: str, opponent: str, resource_scaling: float,
                 balance: BalanceConfig | None = None, seed: int = 0,
                 replay_dir: str | None = None):
        self.id = session_id
        self.balance = balance or BalanceConfig()
        self.seed = seed
        self.opponent = opponent
        grid = generate_map(seed)
        self.state = engine.new_game(self.balance, grid, seed,
                                     resource_scaling=(1.0, resource_scaling))
        self.bot = make_bot(opponent, player=1, seed=seed, balance=self.balance,
                            resource_scaling=resource_scaling)
        self.recorder = Recorder(
            self.balance, grid, seed,
            players={"0": "human:instructor+executor", "1": opponent},
            opponent=opponent, resource_scaling=(1.0, resource_scaling))
        self.replay_dir = replay_dir
        self.status = LOBBY
        self.joined: set[str] = set()
        self.warnings = 0
        self.pending: list[tuple[int, ActionRecord]] = []
        self._last_snapshot = visible_snapshot(self.state, 0, self.status)
        self._map_text = grid.serialize()

    # ── membership ───────────────────────────────────────────────────────

    def join(self, role: str) -> dict:
        if role not in ROLES:
            raise SessionError("unknown_role")
        if role in self.joined:
            raise SessionError("role_taken")
        if self.status == FINISHED:
            raise SessionError("session_finished")
        self.joined.add(role)
        if self.joined == set(ROLES) and self.status == LOBBY:
            self.status = RUNNING
        return {
            "type": "hello", "tick": self.state.tick, "role": role,
            "session": self.id, "protocol": PROTOCOL_VERSION,
            "opponent": self.opponent,
            "config_hash": self.balance.content_hash(),
            "map": self._map_text,
            "status": self.status,
            "snapshot": self.snapshot(),
        }

    def leave(self, role: str) -> None:
        self.joined.discard(role)

    # ── message handling ─────────────────────────────────────────────────

    def handle(self, role: str, frame: dict) -> list[tuple[str, dict]]:
        """Process one inbound frame; returns [(target, frame), ...] where
        target is a role name or '*' for both."""
        kind = frame.get("type")
        tick = self.state.tick
        if self.status == FINISHED:
            raise SessionError("session_finished")
        if kind == "instruction":
            if role != INSTRUCTOR:
                raise SessionError("wrong_role")
            text = str(frame.get("text", ""))[:500]
            self.recorder.instruction(tick, text)
            return [("*", {"type": "instruction", "tick": tick, "text": text})]
        if kind == "pause":
            if role != INSTRUCTOR:
                raise SessionError("wrong_role")
            if self.status == RUNNING:
                self.status = PAUSED
                self.recorder.pause(tick, True)
            return [("*", {"type": "pause", "tick": tick})]
        if kind == "resume":
            if role != INSTRUCTOR:
                raise SessionError("wrong_role")
            if self.status == PAUSED:
                self.status = RUNNING
                self.recorder.pause(tick, False)
            return [("*", {"type": "resume", "tick": tick})]
        if kind == "warn":
            if role != INSTRUCTOR:
                raise SessionError("wrong_role")
            self.warnings += 1
            self.recorder.warn(tick)
            return [(EXECUTOR, {"type": "warn", "tick": tick,
                                "count": self.warnings})]
        if kind == "command":
            if role != EXECUTOR:
                raise SessionError("wrong_role")
            if self.status != RUNNING:
                raise SessionError("paused")
            try:
                unit_id = int(frame["unit"])
                action = ActionRecord.from_dict(frame["action"])
            except (KeyError, ValueError, TypeError):
                raise SessionError("bad_command") from None
            self.pending.append((unit_id, action))
            return []
        if kind == "ask":
            if role != EXECUTOR:
                raise SessionError("wrong_role")
            text = str(frame.get("text", ""))[:500]
            self.recorder.ask(tick, text)
            return [(INSTRUCTOR, {"type": "ask", "tick": tick, "text": text})]
        if kind == "chat":
            text = str(frame.get("text", ""))[:500]
            return [("*", {"type": "chat", "tick": tick, "role": role,
                           "text": text})]
        raise SessionError("unknown_type")

    # ── simulation ───────────────────────────────────────────────────────

    def advance(self, ticks: int = 1) -> list[tuple[str, dict]]:
        """Step the game; returns broadcast frames (diffs, errors, game_over)."""
        out: list[tuple[str, dict]] = []
        for _ in range(ticks):
            if self.status != RUNNING:
                break
            state = self.state
            self.recorder.on_tick_start(state)
            commands = {}
            if self.pending:
                commands[0] = self.pending
                for unit_id, action in self.pending:
                    self.recorder.command(state.tick, 0, unit_id, action)
                self.pending = []
            if state.tick % BOT_PERIOD == 0:
                bot_cmds = self.bot.act(make_observation(state, 1))
                if bot_cmds:
                    commands[1] = bot_cmds
                    for unit_id, action in bot_cmds:
                        self.recorder.command(state.tick, 1, unit_id, action)
            events = engine.step(state, commands)
            for e in events:
                if e.kind == "reject" and e.data["player"] == 0:
                    out.append((EXECUTOR, {"type": "error", "tick": e.tick,
                                           "reason": e.data["reason"],
                                           "unit": e.data["unit"]}))
            if state.outcome != Outcome.ONGOING:
                self._finish(out)
                break
            if state.tick % BROADCAST_EVERY == 0:
                out.extend(self._broadcast_diff())
        return out

    def _broadcast_diff(self) -> list[tuple[str, dict]]:
        snapshot = visible_snapshot(self.state, 0, self.status)
        diff = diff_snapshots(self._last_snapshot, snapshot)
        self._last_snapshot = snapshot
        if not diff:
            return []
        frame = {"type": "state_diff", "tick": self.state.tick, "diff": diff}
        return [("*", frame)]

    def snapshot(self) -> dict:
        return visible_snapshot(self.state, 0, self.status)

    def _finish(self, out: list[tuple[str, dict]]) -> None:
        self.status = FINISHED
        self.recorder.outcome(self.state.tick, self.state.outcome)
        out.extend(self._broadcast_diff())
        out.append(("*", {"type": "game_over", "tick": self.state.tick,
                          "outcome": Outcome.name(self.state.outcome)}))
        if self.replay_dir:
            path = Path(self.replay_dir)
            path.mkdir(parents=True, exist_ok=True)
            self.recorder.finish().save(path / f"{self.id}.grpl")

    @property
    def finished(self) -> bool:
        return self.status == FINISHED


# ── FastAPI layer ─────────────────────────────────────────────────────────

def create_app(opponent: str = "simple", resource_scaling: float = 1.0,
               replay_dir: str = "replays", balance: BalanceConfig | None = None,
               seed: int = 0, max_sessions: int = 64, tick_rate: int = TICK_RATE,
               frontend_dir: str | None = None):
    app = FastAPI(title="gridrts session server")
    sessions: dict[str, Session] = {}
    queues: dict[str, dict[str, asyncio.Queue]] = {}
    counter = itertools.count(1)

    def _route(sid: str, messages: list[tuple[str, dict]]) -> None:
        for target, frame in messages:
            for role, queue in queues.get(sid, {}).items():
                if target in ("*", role):
                    try:
                        queue.put_nowait(frame)
                    except asyncio.QueueFull:
                        # slow consumer: poison the queue so its pump closes
                        queue._queue.clear()  # noqa: SLF001 - deliberate drop
                        queue.put_nowait({"type": "error", "reason": "slow_consumer"})

    async def _session_loop(sid: str) -> None:
        session = sessions[sid]
        interval = 1.0 / tick_rate
        next_due = time.monotonic()
        while not session.finished and sid in sessions:
            await asyncio.sleep(max(0.0, next_due - time.monotonic()))
            next_due += interval
            if session.status == RUNNING:
                _route(sid, session.advance(1))

    @app.post("/sessions")
    async def create_session(payload: dict | None = None):
        if len(sessions) >= max_sessions:
            raise HTTPException(429, "capacity exceeded")
        payload = payload or {}
        sid = f"s{next(counter):04d}"
        session = Session(
            sid,
            opponent=payload.get("opponent", opponent),
            resource_scaling=float(payload.get("resource_scaling", resource_scaling)),
            balance=balance, seed=int(payload.get("seed", seed + len(sessions))),
            replay_dir=replay_dir)
        sessions[sid] = session
        queues[sid] = {}
        asyncio.get_running_loop().create_task(_session_loop(sid))
        return {"session": sid, "opponent": session.opponent}

    @app.get("/sessions")
    async def list_sessions():
        return {sid: {"status": s.status, "tick": s.state.tick,
                      "roles": sorted(s.joined)} for sid, s in sessions.items()}

    @app.websocket("/ws/{sid}")
    async def ws_endpoint(ws: WebSocket, sid: str):
        await ws.accept()
        session = sessions.get(sid)
        if session is None:
            await ws.send_json({"type": "error", "reason": "no_such_session"})
            await ws.close()
            return
        try:
            first = json.loads(await ws.receive_text())
        except (json.JSONDecodeError, WebSocketDisconnect):
            await ws.close()
            return
        role = first.get("role", "")
        try:
            hello = session.join(role)
        except SessionError as exc:
            await ws.send_json({"type": "error", "reason": exc.reason})
            await ws.close()
            return
        queue: asyncio.Queue = asyncio.Queue(maxsize=QUEUE_LIMIT)
        queues[sid][role] = queue
        await ws.send_json(hello)

        async def pump():
            while True:
                frame = await queue.get()
                await ws.send_json(frame)

        pump_task = asyncio.get_running_loop().create_task(pump())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    frame = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_json({"type": "error", "reason": "bad_json"})
                    continue
                try:
                    _route(sid, session.handle(role, frame))
                except SessionError as exc:
                    await ws.send_json({"type": "error", "reason": exc.reason,
                                        "tick": session.state.tick})
        except WebSocketDisconnect:
            pass
        finally:
            pump_task.cancel()
            queues[sid].pop(role, None)
            session.leave(role)

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="frontend")
    else:
        @app.get("/")
        async def index():
            return JSONResponse({"service": "gridrts", "sessions": len(sessions)})

    app.state.sessions = sessions
    return app
