"""RL-style environment facade: reset/step, observation encoding, sparse reward.

Observation layout (all little-endian float32 when dumped):

* spatial: 32 channels of 32x32 — [0-2] visibility one-hot (invisible, seen,
  visible), [3-4] terrain one-hot (grass, water), [5-17] own-unit counts per
  type, [18-30] known-enemy counts per type, [31] resource nodes.
* per-entity rows (length 31): 13 type one-hot, hp fraction, 7 current-action
  one-hot, 7 previous-action one-hot, cooldown fraction, x, y (continuous
  cell coordinates).  Enemy rows come from last-seen memory only.
* extra (length 15): money, 13-value per-type enemy running average,
  ticks since the current instruction (-1 when none was ever issued).
* instructions: the last 5 instruction records, newest first.

Terrain and resource nodes are public knowledge; fog masks enemy units only.
"""
from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .balance import BalanceConfig
from .core import engine
from .core.state import GameState
from .core.types import ActionRecord, ActionType, Outcome, UnitType
from .mapgen import MapParams, generate_map

N_CHANNELS = 32
N_TYPES = 13
N_ACTIONS = 7
UNIT_ROW = N_TYPES + 1 + N_ACTIONS + N_ACTIONS + 1 + 2  # 31
RESOURCE_ROW = 3
EXTRA_LEN = 1 + N_TYPES + 1  # money, enemy EMA, ticks since instruction
INSTRUCTION_WINDOW = 5
EMA_DECAY = 0.997

OBS_MAGIC = b"GOBS"
OBS_VERSION = 1


class EpisodeFinished(RuntimeError):
    pass


@dataclass
class Observation:
    player: int
    tick: int
    visibility: np.ndarray            # (32, 32) int8, 0/1/2
    water: np.ndarray                 # (32, 32) bool
    my_ids: np.ndarray                # (n,) int32
    my_units: np.ndarray              # (n, 31) float32
    enemy_ids: np.ndarray
    enemy_units: np.ndarray
    resource_ids: np.ndarray
    resources: np.ndarray             # (n, 3) float32
    extra: np.ndarray                 # (15,) float32
    instructions: list[dict] = field(default_factory=list)
    _spatial: np.ndarray | None = field(default=None, repr=False)

    @property
    def spatial(self) -> np.ndarray:
        """(32, 32, 32) float32 channel tensor, built on first access."""
        if self._spatial is None:
            self._spatial = _spatial_from_parts(self)
        return self._spatial

    # ── debug dump format: header + flat little-endian 32-bit values ────

    def to_bytes(self) -> bytes:
        spatial = self.spatial.astype("<f4")
        head = struct.pack(
            "<4sHHIIIIIII", OBS_MAGIC, OBS_VERSION, 0,
            N_CHANNELS, spatial.shape[1], spatial.shape[2],
            len(self.my_ids), len(self.enemy_ids), len(self.resource_ids),
            EXTRA_LEN,
        )
        blobs = [
            head, spatial.tobytes(),
            self.my_ids.astype("<i4").tobytes(), self.my_units.astype("<f4").tobytes(),
            self.enemy_ids.astype("<i4").tobytes(), self.enemy_units.astype("<f4").tobytes(),
            self.resource_ids.astype("<i4").tobytes(), self.resources.astype("<f4").tobytes(),
            self.extra.astype("<f4").tobytes(),
        ]
        return b"".join(blobs)

    @classmethod
    def parse_header(cls, blob: bytes) -> dict:
        magic, version, _, c, h, w, n_my, n_enemy, n_res, extra = struct.unpack_from(
            "<4sHHIIIIIII", blob)
        if magic != OBS_MAGIC:
            raise ValueError("bad observation magic")
        return {"version": version, "channels": c, "height": h, "width": w,
                "n_my": n_my, "n_enemy": n_enemy, "n_resources": n_res,
                "extra_len": extra}

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Observation":
        info = cls.parse_header(blob)
        off = struct.calcsize("<4sHHIIIIIII")
        c, h, w = info["channels"], info["height"], info["width"]

        def take(dtype, count, shape):
            nonlocal off
            arr = np.frombuffer(blob, dtype=dtype, count=count, offset=off).reshape(shape)
            off += arr.nbytes
            return arr.copy()

        spatial = take("<f4", c * h * w, (c, h, w))
        my_ids = take("<i4", info["n_my"], (info["n_my"],))
        my_units = take("<f4", info["n_my"] * UNIT_ROW, (info["n_my"], UNIT_ROW))
        enemy_ids = take("<i4", info["n_enemy"], (info["n_enemy"],))
        enemy_units = take("<f4", info["n_enemy"] * UNIT_ROW, (info["n_enemy"], UNIT_ROW))
        res_ids = take("<i4", info["n_resources"], (info["n_resources"],))
        resources = take("<f4", info["n_resources"] * RESOURCE_ROW,
                         (info["n_resources"], RESOURCE_ROW))
        extra = take("<f4", info["extra_len"], (info["extra_len"],))
        visibility = spatial[1].astype(np.int8) + 2 * spatial[2].astype(np.int8)
        return cls(player=-1, tick=-1, visibility=visibility,
                   water=spatial[4] > 0.5, my_ids=my_ids, my_units=my_units,
                   enemy_ids=enemy_ids, enemy_units=enemy_units,
                   resource_ids=res_ids, resources=resources, extra=extra,
                   _spatial=spatial)


def _spatial_from_parts(obs: Observation) -> np.ndarray:
    size = obs.visibility.shape[0]
    t = np.zeros((N_CHANNELS, size, size), dtype=np.float32)
    t[0][obs.visibility == 0] = 1.0
    t[1][obs.visibility == 1] = 1.0
    t[2][obs.visibility == 2] = 1.0
    t[3] = ~obs.water
    t[4] = obs.water
    for rows, base in ((obs.my_units, 5), (obs.enemy_units, 18)):
        for row in rows:
            kind = int(np.argmax(row[:N_TYPES]))
            x, y = int(row[29]), int(row[30])
            t[base + kind, y, x] += 1.0
    for row in obs.resources:
        t[31, int(row[2]), int(row[1])] += 1.0
    return t


def _unit_row(kind: int, hp_frac: float, cur: int, prev: int,
              cd_frac: float, x: float, y: float) -> np.ndarray:
    row = np.zeros(UNIT_ROW, dtype=np.float32)
    row[kind] = 1.0
    row[N_TYPES] = hp_frac
    row[N_TYPES + 1 + cur] = 1.0
    row[N_TYPES + 1 + N_ACTIONS + prev] = 1.0
    row[28] = cd_frac
    row[29] = x
    row[30] = y
    return row


def encode_units(state: GameState, player: int):
    """Per-entity vectors: own units live, enemies from last-seen memory."""
    my_ids, my_rows = [], []
    for uid in sorted(state.units):
        u = state.units[uid]
        if u.owner != player:
            continue
        stats = u.stats or state.config.stats(u.kind)
        cd = u.cooldown / stats.attack_cooldown if stats.attack_cooldown else 0.0
        my_ids.append(uid)
        my_rows.append(_unit_row(u.kind, u.hp / stats.max_hp,
                                 u.current_action.type, u.previous_action.type,
                                 cd, u.x_fp / 256.0, u.y_fp / 256.0))
    enemy_ids, enemy_rows = [], []
    snapshots = state.vis[player].snapshots
    for uid in sorted(snapshots):
        s = snapshots[uid]
        stats = state.config.stats(s.kind)
        cd = s.cooldown / stats.attack_cooldown if stats.attack_cooldown else 0.0
        enemy_ids.append(uid)
        enemy_rows.append(_unit_row(s.kind, s.hp / stats.max_hp,
                                    s.current_action, s.previous_action,
                                    cd, s.x_fp / 256.0, s.y_fp / 256.0))
    res_ids, res_rows = [], []
    for rid in sorted(state.resources):
        r = state.resources[rid]
        res_ids.append(rid)
        res_rows.append((r.remaining / state.config.resource_capacity, r.x, r.y))

    def pack(ids, rows, width):
        return (np.asarray(ids, dtype=np.int32),
                np.asarray(rows, dtype=np.float32).reshape(len(ids), width))

    return pack(my_ids, my_rows, UNIT_ROW), pack(enemy_ids, enemy_rows, UNIT_ROW), \
        pack(res_ids, res_rows, RESOURCE_ROW)


def encode_spatial(state: GameState, player: int) -> np.ndarray:
    """The 32-channel tensor alone (tests and tooling)."""
    return make_observation(state, player).spatial


def running_enemy_average(history, decay: float = EMA_DECAY) -> np.ndarray:
    """Exponential moving average of per-tick visible-enemy count vectors."""
    ema = np.zeros(N_TYPES, dtype=np.float64)
    for counts in history:
        ema = decay * ema + (1.0 - decay) * np.asarray(counts, dtype=np.float64)
    return ema


class InstructionWindow:
    """Ring buffer of the last N instructions with issue ticks."""

    def __init__(self, limit: int = INSTRUCTION_WINDOW):
        self._items: deque[tuple[str, int]] = deque(maxlen=limit)

    def push(self, text: str, tick: int) -> None:
        self._items.append((text, tick))

    def records(self, now: int) -> list[dict]:
        out = []
        for order, (text, tick) in enumerate(reversed(self._items), start=1):
            out.append({"text": text, "age_ticks": now - tick, "order_index": order})
        return out

    def ticks_since_current(self, now: int) -> int:
        if not self._items:
            return -1
        return now - self._items[-1][1]


def make_observation(state: GameState, player: int,
                     ema: np.ndarray | None = None,
                     window: InstructionWindow | None = None,
                     with_spatial: bool = False) -> Observation:
    (my_ids, my_rows), (enemy_ids, enemy_rows), (res_ids, res_rows) = \
        encode_units(state, player)
    extra = np.zeros(EXTRA_LEN, dtype=np.float32)
    extra[0] = state.money[player]
    if ema is not None:
        extra[1:1 + N_TYPES] = ema
    extra[-1] = window.ticks_since_current(state.tick) if window is not None else -1
    obs = Observation(
        player=player, tick=state.tick,
        visibility=state.vis[player].grid(),
        water=state.grid.water,
        my_ids=my_ids, my_units=my_rows,
        enemy_ids=enemy_ids, enemy_units=enemy_rows,
        resource_ids=res_ids, resources=res_rows,
        extra=extra,
        instructions=window.records(state.tick) if window is not None else [],
    )
    if with_spatial:
        _ = obs.spatial
    return obs


@dataclass
class EnvConfig:
    seed: int = 0
    frame_skip: int = 25
    opponent: str | None = "simple"
    resource_scaling: float = 1.0
    bot_period: int = 10
    loss_reward: float = 0.0  # the default sparse scheme gives 0 on a loss
    map_params: MapParams = field(default_factory=MapParams)
    balance: BalanceConfig = field(default_factory=BalanceConfig)


class Env:
    """One agent (player 0) against a scripted opponent (player 1)."""

    def __init__(self, config: EnvConfig | None = None):
        self.config = config or EnvConfig()
        self.state: GameState | None = None
        self.window = InstructionWindow()
        self.ema = np.zeros(N_TYPES, dtype=np.float64)
        self._bot = None
        self._episode = -1

    @property
    def done(self) -> bool:
        return self.state is None or self.state.outcome != Outcome.ONGOING

    def reset(self) -> Observation:
        self._episode += 1
        seed = self.config.seed + self._episode
        grid = generate_map(seed, self.config.map_params)
        self.state = engine.new_game(
            self.config.balance, grid, seed,
            resource_scaling=(1.0, self.config.resource_scaling))
        self.window = InstructionWindow()
        self.ema = np.zeros(N_TYPES, dtype=np.float64)
        self._bot = None
        if self.config.opponent:
            from .bots import make_bot
            self._bot = make_bot(self.config.opponent, player=1, seed=seed,
                                 resource_scaling=self.config.resource_scaling)
        return self._observe()

    def step(self, actions=None, instruction: str | None = None):
        """Apply per-unit actions, advance frame_skip ticks, return
        (observation, reward, done, info)."""
        if self.done:
            raise EpisodeFinished("call reset() first")
        state = self.state
        if instruction is not None:
            self.window.push(instruction, state.tick)
        pending = _normalize_actions(actions)
        rejected = []
        events = []
        for i in range(self.config.frame_skip):
            commands = {}
            if i == 0 and pending:
                commands[0] = pending
            if self._bot is not None and state.tick % self.config.bot_period == 0:
                commands[1] = self._bot.act(
                    make_observation(state, 1, window=None))
            tick_events = engine.step(state, commands)
            events.extend(tick_events)
            if i == 0:
                rejected = [e.data for e in tick_events
                            if e.kind == "reject" and e.data["player"] == 0]
            self._update_ema()
            if state.outcome != Outcome.ONGOING:
                break
        done = state.outcome != Outcome.ONGOING
        reward = 0.0
        if done:
            if state.outcome == Outcome.win(0):
                reward = 1.0
            elif state.outcome == Outcome.win(1):
                reward = self.config.loss_reward
        info = {"tick": state.tick, "outcome": Outcome.name(state.outcome),
                "rejected": rejected, "events": events}
        return self._observe(), reward, done, info

    def _update_ema(self) -> None:
        counts = np.zeros(N_TYPES, dtype=np.float64)
        vis = self.state.vis[0]
        for u in self.state.units.values():
            if u.owner == 1 and vis.cell_visible(u.cell):
                counts[u.kind] += 1
        self.ema = EMA_DECAY * self.ema + (1.0 - EMA_DECAY) * counts

    def _observe(self) -> Observation:
        return make_observation(self.state, 0, ema=self.ema, window=self.window,
                                with_spatial=True)


def _normalize_actions(actions) -> list[tuple[int, ActionRecord]]:
    if not actions:
        return []
    if isinstance(actions, dict):
        return sorted(actions.items())
    return list(actions)
