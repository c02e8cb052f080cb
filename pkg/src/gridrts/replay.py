"""Deterministic replay recording, storage, and verification.

File format (little-endian throughout)::

    magic  "GRPL"            4 bytes
    version                  u16
    header length            u32, then that many bytes of UTF-8 JSON

    then length-prefixed records until EOF:
    record length            u32  (length of tag + payload)
    tag                      u8
    payload                  tag-specific, see below

Record tags::

    1  COMMAND      u32 tick, u8 player, u32 unit_id, u8 action_type,
                    then by action type: GATHER/ATTACK u32 target;
                    TRAIN u8 unit_type; BUILD u8 unit_type, u8 x, u8 y;
                    MOVE u8 x, u8 y; IDLE/CONTINUE nothing
    2  INSTRUCTION  u32 tick, UTF-8 text
    3  PAUSE        u32 tick, u8 flag (1 pause, 0 resume)
    4  WARN         u32 tick
    5  ASK          u32 tick, UTF-8 text
    6  OUTCOME      u32 tick, i8 outcome (-1 draw, 0/1 winner)
    7  CHECKPOINT   u32 tick, 16-byte state hash (every 500 ticks)

The header carries the engine version, the balance-config content hash and
full text, the serialized map, the seed, player roles, and the opponent
strategy, so a replay re-simulates with zero external context.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

from . import __version__ as ENGINE_VERSION
from .balance import BalanceConfig
from .core import engine
from .core.state import GameState
from .core.types import ActionRecord, ActionType, Outcome, UnitType
from .mapgen import MapGrid

MAGIC = b"GRPL"
FORMAT_VERSION = 1
CHECKPOINT_EVERY = 500

T_COMMAND = 1
T_INSTRUCTION = 2
T_PAUSE = 3
T_WARN = 4
T_ASK = 5
T_OUTCOME = 6
T_CHECKPOINT = 7


class ReplayError(ValueError):
    pass


class VersionMismatch(ReplayError):
    pass


@dataclass
class Record:
    tag: int
    tick: int
    player: int = -1
    unit_id: int = -1
    action: ActionRecord | None = None
    text: str = ""
    flag: int = 0
    outcome: int = 0
    state_hash: bytes = b""


@dataclass
class Replay:
    header: dict
    records: list[Record] = field(default_factory=list)

    # ── derived views ────────────────────────────────────────────────────

    def commands(self) -> list[Record]:
        return [r for r in self.records if r.tag == T_COMMAND]

    def instructions(self) -> list[Record]:
        return [r for r in self.records if r.tag == T_INSTRUCTION]

    def checkpoints(self) -> list[Record]:
        return [r for r in self.records if r.tag == T_CHECKPOINT]

    def outcome(self) -> int | None:
        for r in self.records:
            if r.tag == T_OUTCOME:
                return r.outcome
        return None

    def last_tick(self) -> int:
        return max((r.tick for r in self.records), default=0)

    def balance(self) -> BalanceConfig:
        return BalanceConfig.parse(self.header["config_text"])

    def grid(self) -> MapGrid:
        return MapGrid.parse(self.header["map_text"])

    # ── serialization ────────────────────────────────────────────────────

    def to_bytes(self) -> bytes:
        head = json.dumps(self.header, sort_keys=True).encode()
        out = [MAGIC, struct.pack("<HI", FORMAT_VERSION, len(head)), head]
        for r in self.records:
            payload = _encode_record(r)
            out.append(struct.pack("<IB", len(payload) + 1, r.tag))
            out.append(payload)
        return b"".join(out)

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Replay":
        if blob[:4] != MAGIC:
            raise ReplayError("not a replay file")
        version, head_len = struct.unpack_from("<HI", blob, 4)
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"replay format v{version}, expected v{FORMAT_VERSION}")
        off = 10
        header = json.loads(blob[off:off + head_len].decode())
        off += head_len
        records = []
        while off < len(blob):
            (length,) = struct.unpack_from("<I", blob, off)
            off += 4
            tag = blob[off]
            records.append(_decode_record(tag, blob[off + 1:off + length]))
            off += length
        return cls(header, records)

    @classmethod
    def load(cls, path) -> "Replay":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())


_ACTION_HAS_TARGET = (ActionType.GATHER, ActionType.ATTACK)


def _encode_record(r: Record) -> bytes:
    if r.tag == T_COMMAND:
        a = r.action
        head = struct.pack("<IBIB", r.tick, r.player, r.unit_id, a.type)
        if a.type in _ACTION_HAS_TARGET:
            return head + struct.pack("<I", a.target_id)
        if a.type == ActionType.TRAIN_UNIT:
            return head + struct.pack("<B", a.unit_type)
        if a.type == ActionType.BUILD_BUILDING:
            return head + struct.pack("<BBB", a.unit_type, a.cell[0], a.cell[1])
        if a.type == ActionType.MOVE:
            return head + struct.pack("<BB", a.cell[0], a.cell[1])
        return head
    if r.tag in (T_INSTRUCTION, T_ASK):
        return struct.pack("<I", r.tick) + r.text.encode()
    if r.tag == T_PAUSE:
        return struct.pack("<IB", r.tick, r.flag)
    if r.tag == T_WARN:
        return struct.pack("<I", r.tick)
    if r.tag == T_OUTCOME:
        return struct.pack("<Ib", r.tick, r.outcome)
    if r.tag == T_CHECKPOINT:
        return struct.pack("<I", r.tick) + r.state_hash
    raise ReplayError(f"unknown record tag {r.tag}")


def _decode_record(tag: int, payload: bytes) -> Record:
    if tag == T_COMMAND:
        tick, player, unit_id, action_type = struct.unpack_from("<IBIB", payload)
        t = ActionType(action_type)
        rest = payload[10:]
        if t in _ACTION_HAS_TARGET:
            action = ActionRecord(t, target_id=struct.unpack("<I", rest)[0])
        elif t == ActionType.TRAIN_UNIT:
            action = ActionRecord(t, unit_type=UnitType(rest[0]))
        elif t == ActionType.BUILD_BUILDING:
            action = ActionRecord(t, unit_type=UnitType(rest[0]), cell=(rest[1], rest[2]))
        elif t == ActionType.MOVE:
            action = ActionRecord(t, cell=(rest[0], rest[1]))
        else:
            action = ActionRecord(t)
        return Record(tag, tick, player=player, unit_id=unit_id, action=action)
    (tick,) = struct.unpack_from("<I", payload)
    if tag in (T_INSTRUCTION, T_ASK):
        return Record(tag, tick, text=payload[4:].decode())
    if tag == T_PAUSE:
        return Record(tag, tick, flag=payload[4])
    if tag == T_WARN:
        return Record(tag, tick)
    if tag == T_OUTCOME:
        return Record(tag, tick, outcome=struct.unpack_from("<b", payload, 4)[0])
    if tag == T_CHECKPOINT:
        return Record(tag, tick, state_hash=payload[4:])
    raise ReplayError(f"unknown record tag {tag}")


class Recorder:
    """Collects the event log of a live game session."""

    def __init__(self, config: BalanceConfig, grid: MapGrid, seed: int,
                 players: dict | None = None, opponent: str = "",
                 resource_scaling=(1.0, 1.0)):
        self.header = {
            "engine_version": ENGINE_VERSION,
            "config_hash": config.content_hash(),
            "config_text": config.dump(),
            "map_text": grid.serialize(),
            "seed": seed,
            "players": players or {},
            "opponent": opponent,
            "resource_scaling": list(resource_scaling),
        }
        self.records: list[Record] = []

    def command(self, tick: int, player: int, unit_id: int, action: ActionRecord) -> None:
        self.records.append(Record(T_COMMAND, tick, player=player,
                                   unit_id=unit_id, action=action))

    def instruction(self, tick: int, text: str) -> None:
        self.records.append(Record(T_INSTRUCTION, tick, text=text))

    def pause(self, tick: int, paused: bool) -> None:
        self.records.append(Record(T_PAUSE, tick, flag=int(paused)))

    def warn(self, tick: int) -> None:
        self.records.append(Record(T_WARN, tick))

    def ask(self, tick: int, text: str) -> None:
        self.records.append(Record(T_ASK, tick, text=text))

    def on_tick_start(self, state: GameState) -> None:
        """Call before stepping each tick: writes periodic checkpoints."""
        if state.tick % CHECKPOINT_EVERY == 0:
            self.records.append(Record(T_CHECKPOINT, state.tick,
                                       state_hash=bytes.fromhex(state.content_hash())))

    def outcome(self, tick: int, outcome: int) -> None:
        self.records.append(Record(T_OUTCOME, tick, outcome=outcome))

    def finish(self) -> Replay:
        return Replay(dict(self.header), list(self.records))


@dataclass
class VerifyResult:
    ok: bool
    divergence_tick: int | None = None
    checkpoints_checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def resimulate(replay: Replay, until_tick: int | None = None,
               on_tick=None) -> GameState:
    """Re-run a replay's command log from its header; no bots involved."""
    config = replay.balance()
    if replay.header["config_hash"] != config.content_hash():
        raise VersionMismatch("config text does not match recorded hash")
    grid = replay.grid()
    state = engine.new_game(config, grid, replay.header["seed"],
                            tuple(replay.header.get("resource_scaling", (1.0, 1.0))))
    by_tick: dict[int, list[Record]] = {}
    last = 0
    for r in replay.records:
        if r.tag == T_COMMAND:
            by_tick.setdefault(r.tick, []).append(r)
        last = max(last, r.tick)
    end = last if until_tick is None else until_tick
    while state.tick <= end and state.outcome == Outcome.ONGOING:
        if on_tick is not None:
            on_tick(state)
        commands: dict[int, list] = {}
        for r in by_tick.get(state.tick, ()):
            commands.setdefault(r.player, []).append((r.unit_id, r.action))
        engine.step(state, commands)
    if on_tick is not None and state.outcome != Outcome.ONGOING:
        on_tick(state)
    return state


def replay_verify(replay: Replay) -> VerifyResult:
    """Re-simulate and compare every stored checkpoint hash."""
    if replay.header["engine_version"] != ENGINE_VERSION:
        raise VersionMismatch(
            f"replay from engine {replay.header['engine_version']}, "
            f"running {ENGINE_VERSION}")
    expected = {r.tick: r.state_hash for r in replay.checkpoints()}
    checked = 0
    divergence: list[int] = []

    def check(state: GameState) -> None:
        nonlocal checked
        want = expected.get(state.tick)
        if want is not None and not divergence:
            checked += 1
            if bytes.fromhex(state.content_hash()) != want:
                divergence.append(state.tick)

    resimulate(replay, on_tick=check)
    if divergence:
        return VerifyResult(False, divergence[0], checked)
    return VerifyResult(True, None, checked)
