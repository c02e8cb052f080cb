"""Authoritative world snapshot and its content hash."""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from ..balance import BalanceConfig
from ..mapgen import MapGrid
from .pathing import Navigator
from .types import Cell, Outcome, ResourceNode, Unit
from .visibility import VisibilityMemory

N_PLAYERS = 2


@dataclass
class GameState:
    config: BalanceConfig
    grid: MapGrid
    seed: int
    tick: int = 0
    outcome: int = Outcome.ONGOING
    next_id: int = 1
    units: dict[int, Unit] = field(default_factory=dict)
    resources: dict[int, ResourceNode] = field(default_factory=dict)
    money: list[int] = field(default_factory=lambda: [0, 0])
    resource_scaling: list[float] = field(default_factory=lambda: [1.0, 1.0])
    vis: list[VisibilityMemory] = field(default_factory=list)
    rng: random.Random = None  # seeded generator; engine rules draw nothing today

    # derived indices, rebuilt in __post_init__ and never hashed
    nav: Navigator = field(init=False, repr=False)
    building_at: dict[Cell, int] = field(init=False, repr=False)
    resource_at: dict[Cell, int] = field(init=False, repr=False)

    def __post_init__(self):
        if self.rng is None:
            self.rng = random.Random(self.seed)
        self.nav = Navigator(self.grid.water)
        self.building_at = {
            u.cell: u.id for u in self.units.values() if u.kind.is_building()
        }
        self.resource_at = {r.cell: r.id for r in self.resources.values()}
        self.event_sink: list | None = None

    def alloc_id(self) -> int:
        uid = self.next_id
        self.next_id += 1
        return uid

    def units_of(self, player: int):
        return (u for u in self.units.values() if u.owner == player)

    def enemy_of(self, player: int) -> int:
        return 1 - player

    def town_halls(self, player: int, completed_only: bool = False) -> list[Unit]:
        return [
            u for u in self.units.values()
            if u.owner == player and u.kind.name == "TOWN_HALL"
            and (u.complete or not completed_only)
        ]

    def content_hash(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        h.update(b"%d|%d|%d|" % (self.tick, self.outcome, self.next_id))
        h.update(("|".join(map(str, self.money)) + "|" +
                  "|".join(map(str, self.resource_scaling))).encode())
        for uid in sorted(self.units):
            u = self.units[uid]
            a, p = u.current_action, u.previous_action
            h.update(
                b"u%d,%d,%d,%d,%d,%d,%d,%d,%d,%d,%d,%d;"
                % (u.id, u.owner, u.kind, u.hp, u.x_fp, u.y_fp, u.cooldown,
                   u.carry, u.build_ticks_done, u.build_ticks_total,
                   u.produce_ticks_left, u.mine_ticks_left)
            )
            h.update(repr((a.type, a.target_id, a.unit_type, a.cell,
                           p.type, p.target_id, p.unit_type, p.cell,
                           u.producing, u.waypoint)).encode())
        for rid in sorted(self.resources):
            r = self.resources[rid]
            h.update(b"r%d,%d,%d,%d;" % (r.id, r.x, r.y, r.remaining))
        for v in self.vis:
            h.update(v.hash_bytes())
        return h.hexdigest()
