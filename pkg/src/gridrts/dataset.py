"""Supervised dataset export: every K-th tick becomes a candidate frame.

Rules, in order:

* actions in [tK, (t+1)K) relocate onto frame tK — but only if their unit
  already exists at tK; actions of units born inside the window are
  discarded.  When one unit has several commands in a window the earliest
  wins (that is the action it should start at the frame).
* the global continue label c is 1 iff the frame carries no action.
* c=1 frames lying strictly between an instruction and the first command
  after it are dropped (the executor was "thinking"; such frames teach
  nothing about acting promptly).

Output is a JSONL index (one frame per line) plus a binary sidecar of
observation dumps; offsets in the index point into the sidecar.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core.types import ActionRecord, Outcome
from .env import EMA_DECAY, N_TYPES, InstructionWindow, Observation, make_observation
from .replay import Replay, resimulate

DATASET_VERSION = 1


@dataclass
class DatasetFrame:
    tick: int
    instructions: list[dict]
    actions: dict[int, ActionRecord]
    continue_label: int
    observation: Observation

    def index_entry(self, obs_offset: int, obs_len: int, game: str) -> dict:
        return {
            "v": DATASET_VERSION,
            "game": game,
            "frame_tick": self.tick,
            "instructions": self.instructions,
            "actions": {str(uid): a.to_dict() for uid, a in sorted(self.actions.items())},
            "continue": self.continue_label,
            "obs_offset": obs_offset,
            "obs_len": obs_len,
        }


def export_frames(replay: Replay, k: int, player: int = 0) -> list[DatasetFrame]:
    """Single-pass exporter: re-simulates once, captures observations at
    frame ticks, then relocates the player's command log onto them."""
    if k < 1:
        raise ValueError("k must be >= 1")
    last = replay.last_tick()
    instructions = [(r.tick, r.text) for r in replay.instructions()]
    window = InstructionWindow()
    pending = list(instructions)
    ema = np.zeros(N_TYPES, dtype=np.float64)
    captured: dict[int, Observation] = {}
    known_ids: dict[int, frozenset[int]] = {}

    def on_tick(state):
        nonlocal ema
        while pending and pending[0][0] <= state.tick:
            tick, text = pending.pop(0)
            window.push(text, tick)
        if state.tick % k == 0 and state.tick <= last:
            obs = make_observation(state, player, ema=ema, window=window)
            captured[state.tick] = obs
            known_ids[state.tick] = frozenset(int(i) for i in obs.my_ids)
        counts = np.zeros(N_TYPES, dtype=np.float64)
        vis = state.vis[player]
        enemy = state.enemy_of(player)
        for u in state.units.values():
            if u.owner == enemy and vis.cell_visible(u.cell):
                counts[u.kind] += 1
        ema = EMA_DECAY * ema + (1.0 - EMA_DECAY) * counts

    resimulate(replay, on_tick=on_tick)

    actions: dict[int, dict[int, ActionRecord]] = {t: {} for t in captured}
    command_ticks: list[int] = []
    for r in replay.commands():
        if r.player != player:
            continue
        command_ticks.append(r.tick)
        frame = (r.tick // k) * k
        bucket = actions.get(frame)
        if bucket is None:
            continue
        if r.unit_id in known_ids[frame] and r.unit_id not in bucket:
            bucket[r.unit_id] = r.action

    # action-less frames between an instruction and the first command after it
    dropped: set[int] = set()
    for itick, _ in instructions:
        nxt = next((t for t in command_ticks if t > itick), None)
        if nxt is None:
            continue
        for t in captured:
            if itick < t < nxt and not actions[t]:
                dropped.add(t)

    frames = []
    for t in sorted(captured):
        if t in dropped:
            continue
        frames.append(DatasetFrame(
            tick=t,
            instructions=captured[t].instructions,
            actions=actions[t],
            continue_label=0 if actions[t] else 1,
            observation=captured[t],
        ))
    return frames


@dataclass
class ExportStats:
    games: int = 0
    wins: int = 0
    frames: int = 0
    actions: int = 0
    instructions: int = 0
    instruction_texts: list[str] = field(default_factory=list)

    def table(self) -> dict:
        words = [w for text in self.instruction_texts for w in text.split()]
        unique_instructions = len(set(self.instruction_texts))
        return {
            "total_games": self.games,
            "win_rate": round(self.wins / self.games, 4) if self.games else 0.0,
            "total_instructions": self.instructions,
            "unique_instructions": unique_instructions,
            "total_words": len(words),
            "unique_words": len(set(words)),
            "words_per_instruction": round(len(words) / self.instructions, 2)
            if self.instructions else 0.0,
            "instructions_per_game": round(self.instructions / self.games, 2)
            if self.games else 0.0,
            "frames": self.frames,
            "actions_per_frame": round(self.actions / self.frames, 3)
            if self.frames else 0.0,
        }


def export_dataset(replays, k: int, jsonl_path, obs_path,
                   player: int = 0) -> ExportStats:
    """Write the frame index and observation sidecar for many replays."""
    stats = ExportStats()
    with open(jsonl_path, "w") as index, open(obs_path, "wb") as sidecar:
        offset = 0
        for replay in replays:
            game_id = f"{replay.header['seed']}:{replay.header['config_hash']}"
            frames = export_frames(replay, k, player)
            stats.games += 1
            if replay.outcome() == player:
                stats.wins += 1
            texts = [r.text for r in replay.instructions()]
            stats.instructions += len(texts)
            stats.instruction_texts.extend(texts)
            for frame in frames:
                blob = frame.observation.to_bytes()
                entry = frame.index_entry(offset, len(blob), game_id)
                index.write(json.dumps(entry, sort_keys=True) + "\n")
                sidecar.write(blob)
                offset += len(blob)
                stats.frames += 1
                stats.actions += len(frame.actions)
    return stats
