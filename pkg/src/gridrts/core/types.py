"""Domain types shared across the engine: unit kinds, actions, events."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

Cell = tuple[int, int]

NEUTRAL = -1  # owner id of resource nodes


class UnitType(IntEnum):
    """The 13 player-ownable types (channel order) plus the neutral resource."""

    PEASANT = 0
    SPEARMAN = 1
    SWORDMAN = 2
    CAVALRY = 3
    DRAGON = 4
    ARCHER = 5
    CATAPULT = 6
    TOWN_HALL = 7
    BARRACK = 8
    BLACKSMITH = 9
    STABLE = 10
    WORKSHOP = 11
    GUARD_TOWER = 12
    RESOURCE = 13

    @classmethod
    def army_types(cls) -> tuple["UnitType", ...]:
        return _ARMY

    @classmethod
    def buildings(cls) -> tuple["UnitType", ...]:
        return _BUILDINGS

    @classmethod
    def player_types(cls) -> tuple["UnitType", ...]:
        return _ARMY + _BUILDINGS

    def is_building(self) -> bool:
        return UnitType.TOWN_HALL <= self <= UnitType.GUARD_TOWER

    def is_army(self) -> bool:
        return self <= UnitType.CATAPULT

    def key(self) -> str:
        return self.name.lower()


_ARMY = (
    UnitType.PEASANT, UnitType.SPEARMAN, UnitType.SWORDMAN, UnitType.CAVALRY,
    UnitType.DRAGON, UnitType.ARCHER, UnitType.CATAPULT,
)
_BUILDINGS = (
    UnitType.TOWN_HALL, UnitType.BARRACK, UnitType.BLACKSMITH, UnitType.STABLE,
    UnitType.WORKSHOP, UnitType.GUARD_TOWER,
)


class ActionType(IntEnum):
    IDLE = 0
    CONTINUE = 1
    GATHER = 2
    ATTACK = 3
    TRAIN_UNIT = 4
    BUILD_BUILDING = 5
    MOVE = 6


@dataclass(frozen=True)
class ActionRecord:
    """One of the 7 actions with its typed payload.

    Payload shape by type: Gather -> target_id (resource); Attack ->
    target_id (enemy unit); TrainUnit -> unit_type; BuildBuilding ->
    (unit_type, cell); Move -> cell; Idle/Continue -> empty.
    """

    type: ActionType
    target_id: Optional[int] = None
    unit_type: Optional[UnitType] = None
    cell: Optional[Cell] = None

    def payload_ok(self) -> bool:
        t = self.type
        if t in (ActionType.IDLE, ActionType.CONTINUE):
            return self.target_id is None and self.unit_type is None and self.cell is None
        if t in (ActionType.GATHER, ActionType.ATTACK):
            return self.target_id is not None and self.unit_type is None and self.cell is None
        if t == ActionType.TRAIN_UNIT:
            return self.unit_type is not None and self.target_id is None and self.cell is None
        if t == ActionType.BUILD_BUILDING:
            return self.unit_type is not None and self.cell is not None and self.target_id is None
        if t == ActionType.MOVE:
            return self.cell is not None and self.target_id is None and self.unit_type is None
        return False

    def to_dict(self) -> dict:
        d: dict = {"type": self.type.name.lower()}
        if self.target_id is not None:
            d["target_id"] = self.target_id
        if self.unit_type is not None:
            d["unit_type"] = self.unit_type.key()
        if self.cell is not None:
            d["cell"] = list(self.cell)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ActionRecord":
        return cls(
            type=ActionType[d["type"].upper()],
            target_id=d.get("target_id"),
            unit_type=UnitType[d["unit_type"].upper()] if "unit_type" in d else None,
            cell=tuple(d["cell"]) if "cell" in d else None,
        )


IDLE = ActionRecord(ActionType.IDLE)
CONTINUE = ActionRecord(ActionType.CONTINUE)


@dataclass
class Unit:
    """A unit, building, or building under construction.

    Positions are fixed-point integers in 1/256ths of a cell so that state
    evolution is bit-identical across platforms.
    """

    id: int
    owner: int
    kind: UnitType
    hp: int
    x_fp: int
    y_fp: int
    current_action: ActionRecord = IDLE
    previous_action: ActionRecord = IDLE
    cooldown: int = 0
    carry: int = 0               # resource points carried (peasants)
    build_ticks_done: int = 0    # construction progress (buildings)
    build_ticks_total: int = 0   # 0 = spawned complete
    producing: Optional[UnitType] = None
    produce_ticks_left: int = 0
    mine_ticks_left: int = 0
    waypoint: Optional[Cell] = None  # current movement target cell

    # derived caches, set at spawn / recomputed deterministically; not hashed
    stats: object = field(default=None, repr=False, compare=False)
    building: bool = field(default=False, repr=False, compare=False)
    home_hall: Optional[int] = field(default=None, repr=False, compare=False)

    @property
    def cell(self) -> Cell:
        return (self.x_fp >> 8, self.y_fp >> 8)

    @property
    def complete(self) -> bool:
        return self.build_ticks_total == 0 or self.build_ticks_done >= self.build_ticks_total

    @property
    def build_progress(self) -> float:
        if self.build_ticks_total == 0:
            return 1.0
        return min(1.0, self.build_ticks_done / self.build_ticks_total)

    @property
    def pos(self) -> tuple[float, float]:
        return (self.x_fp / 256.0, self.y_fp / 256.0)


@dataclass
class ResourceNode:
    id: int
    x: int
    y: int
    remaining: int

    @property
    def cell(self) -> Cell:
        return (self.x, self.y)


class Outcome:
    """Game result: Ongoing, Win(player), or Draw, encoded as a small int."""

    ONGOING = -2
    DRAW = -1
    # values >= 0 are the winning player id

    @staticmethod
    def win(player: int) -> int:
        return player

    @staticmethod
    def name(outcome: int) -> str:
        if outcome == Outcome.ONGOING:
            return "ongoing"
        if outcome == Outcome.DRAW:
            return "draw"
        return f"win_p{outcome}"


@dataclass(frozen=True)
class Event:
    """Engine event emitted by step(): spawn/death/mine/deposit/complete/outcome."""

    kind: str
    tick: int
    data: dict = field(default_factory=dict)


def chebyshev(a: Cell, b: Cell) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))
