"""Fog-honest world view for scripted bots.

Bots never touch GameState: they are handed an Observation (entity rows are
already fog-filtered and enemy rows come from last-seen memory) plus the
public game rules.  This module unpacks the rows back into a convenient
object model and provides the pathing/scouting queries strategies need.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..balance import BalanceConfig
from ..core.pathing import UNREACHABLE, Navigator
from ..core.types import ActionType, Cell, UnitType
from ..core.visibility import VISIBLE
from ..env import N_TYPES, Observation


@dataclass
class SeenUnit:
    id: int
    kind: UnitType
    cell: Cell
    hp_frac: float
    current: ActionType
    previous: ActionType
    visible: bool  # live right now vs remembered


@dataclass
class SeenResource:
    id: int
    cell: Cell
    remaining_frac: float


def _decode_rows(ids, rows, visibility) -> list[SeenUnit]:
    out = []
    for uid, row in zip(ids, rows):
        cell = (int(row[29]), int(row[30]))
        out.append(SeenUnit(
            id=int(uid),
            kind=UnitType(int(np.argmax(row[:N_TYPES]))),
            cell=cell,
            hp_frac=float(row[N_TYPES]),
            current=ActionType(int(np.argmax(row[14:21]))),
            previous=ActionType(int(np.argmax(row[21:28]))),
            visible=visibility[cell[1], cell[0]] == VISIBLE,
        ))
    return out


class BotView:
    """One bot's knowledge of the world at act time."""

    def __init__(self, obs: Observation, balance: BalanceConfig):
        self.balance = balance
        self.tick = obs.tick
        self.money = float(obs.extra[0])
        self.visibility = obs.visibility
        self.water = obs.water
        self.mine = _decode_rows(obs.my_ids, obs.my_units, obs.visibility)
        self.enemies = _decode_rows(obs.enemy_ids, obs.enemy_units, obs.visibility)
        self.resources = [
            SeenResource(int(rid), (int(row[1]), int(row[2])), float(row[0]))
            for rid, row in zip(obs.resource_ids, obs.resources)
        ]

    # ── own units ────────────────────────────────────────────────────────

    def my_units(self, kind: UnitType | None = None, complete_only: bool = True):
        for u in self.mine:
            if kind is not None and u.kind != kind:
                continue
            if complete_only and u.kind.is_building() \
                    and u.current == ActionType.BUILD_BUILDING:
                continue  # still under construction
            yield u

    def my_army(self):
        for u in self.mine:
            if u.kind.is_army() and u.kind != UnitType.PEASANT:
                yield u

    def my_hall(self) -> SeenUnit | None:
        halls = sorted(self.my_units(UnitType.TOWN_HALL), key=lambda u: u.id)
        return halls[0] if halls else None

    def idle_producer(self, building: UnitType) -> SeenUnit | None:
        for u in self.my_units(building):
            if u.current == ActionType.IDLE:
                return u
        return None

    def under_construction(self, kind: UnitType) -> list[SeenUnit]:
        return [u for u in self.mine
                if u.kind == kind and u.current == ActionType.BUILD_BUILDING]

    # ── enemies ─────────────────────────────────────────────────────────

    def enemy_army_counts(self) -> dict[UnitType, int]:
        counts: dict[UnitType, int] = {}
        for e in self.enemies:
            if e.kind.is_army() and e.kind != UnitType.PEASANT:
                counts[e.kind] = counts.get(e.kind, 0) + 1
        return counts

    def enemy_hall(self) -> SeenUnit | None:
        halls = sorted((e for e in self.enemies if e.kind == UnitType.TOWN_HALL),
                       key=lambda e: e.id)
        return halls[0] if halls else None

    # ── map queries ─────────────────────────────────────────────────────

    @property
    def nav(self) -> Navigator:
        if not hasattr(self, "_nav"):
            self._nav = Navigator(self.water)
        return self._nav

    def path_distance(self, a: Cell, b: Cell) -> int:
        return self.nav.distance(a, b)

    def nearest_resource(self, cell: Cell) -> SeenResource | None:
        best, best_key = None, None
        for r in self.resources:
            d = self.path_distance(cell, r.cell)
            key = (d, r.id)
            if best_key is None or key < best_key:
                best, best_key = r, key
        return best

    def nearest_unexplored(self, from_cell: Cell, anchor: Cell | None = None,
                           flying: bool = False) -> Cell | None:
        """Closest never-seen grass cell the unit can actually reach.

        Ranked by Chebyshev distance to ``anchor`` (default: the unit),
        ties lexicographic.  Water-locked pockets are skipped for ground
        units — walking at them forever is how bots stall out games.
        """
        invisible = (self.visibility == 0) & ~self.water
        ys, xs = np.nonzero(invisible)
        if len(xs) == 0:
            return None
        if not flying:
            dist = self.nav.field(from_cell)
            w = self.water.shape[1]
            keep = np.fromiter((dist[y * w + x] != UNREACHABLE
                                for x, y in zip(xs, ys)), bool, len(xs))
            xs, ys = xs[keep], ys[keep]
            if len(xs) == 0:
                return None
        ax, ay = anchor if anchor is not None else from_cell
        d = np.maximum(np.abs(xs - ax), np.abs(ys - ay))
        order = np.lexsort((ys, xs, d))
        return (int(xs[order[0]]), int(ys[order[0]]))

    def can_reach(self, from_cell: Cell, to_cell: Cell, flying: bool = False) -> bool:
        if flying:
            return True
        w = self.water.shape[1]
        return self.nav.field(from_cell)[to_cell[1] * w + to_cell[0]] != UNREACHABLE


def buildable(view: BotView, cell: Cell) -> bool:
    """Best-effort legality (real check happens in the engine on issue)."""
    x, y = cell
    size = view.water.shape[0]
    if not (0 <= x < size and 0 <= y < size) or view.water[y, x]:
        return False
    for u in view.mine:
        if u.kind.is_building() and u.cell == cell:
            return False
    for e in view.enemies:
        if e.kind.is_building() and e.cell == cell:
            return False
    return all(r.cell != cell for r in view.resources)


def build_site_near(view: BotView, anchor: Cell, max_radius: int = 4) -> Cell | None:
    """First buildable cell spiralling out from the anchor (deterministic)."""
    size = view.water.shape[0]
    for radius in range(1, max_radius + 1):
        for nx in range(max(0, anchor[0] - radius), min(size, anchor[0] + radius + 1)):
            for ny in range(max(0, anchor[1] - radius), min(size, anchor[1] + radius + 1)):
                if max(abs(nx - anchor[0]), abs(ny - anchor[1])) != radius:
                    continue
                if buildable(view, (nx, ny)):
                    return (nx, ny)
    return None
