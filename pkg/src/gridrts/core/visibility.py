"""Fog of war: per-player three-state cell visibility plus last-seen memory.

Each player keeps a counter grid of "how many of my live units can see this
cell"; stamps are added/removed incrementally as units spawn, move between
cells, and die, so the per-tick cost is proportional to what changed, not to
the map.  Cells are Visible while a counter is positive, Seen once they have
ever been visible, Invisible otherwise — a cell never returns to Invisible.

The grids are flat Python lists rather than numpy arrays: point queries and
9x9 stamp updates dominate, and plain list indexing is an order of magnitude
faster than numpy scalar access.

Enemy units expose only a snapshot of their attributes from the last moment
their cell was visible.  A snapshot is dropped when its remembered cell is
observed again and the unit is no longer there.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import ActionType, Cell, Unit, UnitType

INVISIBLE = 0
SEEN = 1
VISIBLE = 2


@dataclass
class LastSeen:
    """Attributes of an enemy unit as of the last moment it was observed."""

    kind: UnitType
    hp: int
    x_fp: int
    y_fp: int
    current_action: ActionType
    previous_action: ActionType
    cooldown: int
    complete: bool
    tick: int

    @property
    def cell(self) -> Cell:
        return (self.x_fp >> 8, self.y_fp >> 8)


def snapshot_of(unit: Unit, tick: int) -> LastSeen:
    return LastSeen(
        kind=unit.kind,
        hp=unit.hp,
        x_fp=unit.x_fp,
        y_fp=unit.y_fp,
        current_action=unit.current_action.type,
        previous_action=unit.previous_action.type,
        cooldown=unit.cooldown,
        complete=unit.complete,
        tick=tick,
    )


class VisibilityMemory:
    def __init__(self, size: int):
        self.size = size
        self.counters = [0] * (size * size)
        self.seen = bytearray(size * size)
        self.snapshots: dict[int, LastSeen] = {}

    def add_stamp(self, cell: Cell, radius: int) -> None:
        size = self.size
        x, y = cell
        counters = self.counters
        seen = self.seen
        for ny in range(max(0, y - radius), min(size, y + radius + 1)):
            row = ny * size
            for nx in range(max(0, x - radius), min(size, x + radius + 1)):
                counters[row + nx] += 1
                seen[row + nx] = 1

    def remove_stamp(self, cell: Cell, radius: int) -> None:
        size = self.size
        x, y = cell
        counters = self.counters
        for ny in range(max(0, y - radius), min(size, y + radius + 1)):
            row = ny * size
            for nx in range(max(0, x - radius), min(size, x + radius + 1)):
                counters[row + nx] -= 1

    def move_stamp(self, old: Cell, new: Cell, radius: int) -> None:
        self.remove_stamp(old, radius)
        self.add_stamp(new, radius)

    def cell_visible(self, cell: Cell) -> bool:
        return self.counters[cell[1] * self.size + cell[0]] > 0

    def grid(self) -> np.ndarray:
        """(size, size) int8 grid of INVISIBLE / SEEN / VISIBLE."""
        g = np.frombuffer(bytes(self.seen), dtype=np.int8).reshape(self.size, self.size).copy()
        visible = np.array(self.counters, dtype=np.int16).reshape(self.size, self.size) > 0
        g[visible] = VISIBLE
        return g

    def refresh_snapshots(self, enemy_units, tick: int) -> None:
        """Update last-seen memory against the current enemy unit iterable."""
        counters = self.counters
        size = self.size
        snapshots = self.snapshots
        for unit in enemy_units:
            if counters[(unit.y_fp >> 8) * size + (unit.x_fp >> 8)] > 0:
                snap = snapshots.get(unit.id)
                if snap is None:
                    snapshots[unit.id] = snapshot_of(unit, tick)
                else:  # in-place refresh: cheaper than reallocating every tick
                    snap.hp = unit.hp
                    snap.x_fp = unit.x_fp
                    snap.y_fp = unit.y_fp
                    snap.current_action = unit.current_action.type
                    snap.previous_action = unit.previous_action.type
                    snap.cooldown = unit.cooldown
                    snap.complete = unit.complete
                    snap.tick = tick
        for uid in list(snapshots):
            snap = snapshots[uid]
            if snap.tick == tick:
                continue
            # hidden or dead: drop the memory once we see its spot is empty
            if counters[(snap.y_fp >> 8) * size + (snap.x_fp >> 8)] > 0:
                del snapshots[uid]

    def hash_bytes(self) -> bytes:
        parts = [bytes(self.seen)]
        for uid in sorted(self.snapshots):
            s = self.snapshots[uid]
            parts.append(
                b"%d,%d,%d,%d,%d,%d,%d,%d,%d,%d;"
                % (uid, s.kind, s.hp, s.x_fp, s.y_fp, s.current_action,
                   s.previous_action, s.cooldown, int(s.complete), s.tick)
            )
        return b"".join(parts)
