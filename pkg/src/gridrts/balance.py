"""Balance configuration: every numeric game constant lives here, not in code.

The on-disk format is a versioned key-value text file (``name value`` per
line, ``#`` comments allowed).  ``BalanceConfig.content_hash()`` is embedded
in replay headers so a replay can never silently be re-simulated under a
different rule set.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

from .core.types import ActionType, UnitType

CONFIG_FORMAT_VERSION = 1

# fixed-point position resolution (1/256 cell); movement speeds quantize to it
FP = 256


@dataclass(frozen=True)
class UnitStats:
    max_hp: int
    damage: int = 0
    attack_range: int = 0      # Chebyshev cells
    attack_cooldown: int = 0   # ticks between attacks
    speed: float = 0.0         # cells per tick (0 for buildings)
    cost: int = 0
    build_ticks: int = 0       # training / construction time
    sight: int = 4             # Chebyshev vision radius
    can_target_air: bool = False
    flying: bool = False

    @property
    def speed_fp(self) -> int:
        return round(self.speed * FP)


def _default_units() -> dict[UnitType, UnitStats]:
    return {
        UnitType.PEASANT: UnitStats(40, 3, 1, 20, 0.075, cost=50, build_ticks=50),
        UnitType.SPEARMAN: UnitStats(80, 10, 1, 20, 0.075, cost=80, build_ticks=80),
        UnitType.SWORDMAN: UnitStats(80, 10, 1, 20, 0.075, cost=80, build_ticks=80),
        UnitType.CAVALRY: UnitStats(100, 12, 1, 20, 0.125, cost=120, build_ticks=120),
        UnitType.DRAGON: UnitStats(90, 10, 3, 25, 0.1, cost=150, build_ticks=150, flying=True),
        UnitType.ARCHER: UnitStats(60, 8, 4, 25, 0.075, cost=90, build_ticks=90, can_target_air=True),
        UnitType.CATAPULT: UnitStats(70, 20, 6, 50, 0.05, cost=150, build_ticks=150),
        UnitType.TOWN_HALL: UnitStats(300, cost=250, build_ticks=200),
        UnitType.BARRACK: UnitStats(200, cost=150, build_ticks=150),
        UnitType.BLACKSMITH: UnitStats(200, cost=150, build_ticks=150),
        UnitType.STABLE: UnitStats(200, cost=150, build_ticks=150),
        UnitType.WORKSHOP: UnitStats(200, cost=150, build_ticks=150),
        UnitType.GUARD_TOWER: UnitStats(150, 12, 5, 25, cost=120, build_ticks=120, can_target_air=True),
    }


# the cyclic dominance edges: attacker type -> favored target type
FAVORED_EDGES = (
    (UnitType.SPEARMAN, UnitType.CAVALRY),
    (UnitType.SWORDMAN, UnitType.SPEARMAN),
    (UnitType.CAVALRY, UnitType.SWORDMAN),
    (UnitType.ARCHER, UnitType.DRAGON),
)


def _default_multipliers() -> dict[tuple[UnitType, UnitType], float]:
    mult: dict[tuple[UnitType, UnitType], float] = {}
    for attacker, target in FAVORED_EDGES:
        mult[(attacker, target)] = 2.0
        mult[(target, attacker)] = 0.5
    for building in UnitType.buildings():
        mult[(UnitType.CATAPULT, building)] = 2.0
    return mult


PRODUCES: dict[UnitType, tuple[UnitType, ...]] = {
    UnitType.TOWN_HALL: (UnitType.PEASANT,),
    UnitType.BARRACK: (UnitType.SPEARMAN,),
    UnitType.BLACKSMITH: (UnitType.SWORDMAN,),
    UnitType.STABLE: (UnitType.CAVALRY,),
    UnitType.WORKSHOP: (UnitType.CATAPULT, UnitType.DRAGON, UnitType.ARCHER),
    UnitType.GUARD_TOWER: (),
}

PRODUCER_OF: dict[UnitType, UnitType] = {
    unit: producer for producer, units in PRODUCES.items() for unit in units
}


@dataclass(frozen=True)
class BalanceConfig:
    """Full numeric rule set for one game."""

    units: dict[UnitType, UnitStats] = field(default_factory=_default_units)
    multipliers: dict[tuple[UnitType, UnitType], float] = field(default_factory=_default_multipliers)
    starting_money: int = 300
    sight_radius: int = 4
    max_ticks: int = 25_000
    tick_rate: int = 25          # nominal ticks per wall-clock second
    mine_ticks: int = 20         # ticks per 10-point mine action
    carry_amount: int = 10
    resource_capacity: int = 500

    def stats(self, kind: UnitType) -> UnitStats:
        return self.units[kind]

    def multiplier(self, attacker: UnitType, target: UnitType) -> float:
        return self.multipliers.get((attacker, target), 1.0)

    def can_attack(self, attacker: UnitType, target: UnitType) -> bool:
        """Air-targeting rule: dragons are untouchable except by dedicated counters."""
        if self.units[attacker].damage <= 0:
            return False
        if target == UnitType.DRAGON and not self.units[attacker].can_target_air:
            return False
        return True

    # ── serialization ────────────────────────────────────────────────────

    def dump(self) -> str:
        lines = [f"version {CONFIG_FORMAT_VERSION}"]
        for name in ("starting_money", "sight_radius", "max_ticks", "tick_rate",
                     "mine_ticks", "carry_amount", "resource_capacity"):
            lines.append(f"rule.{name} {getattr(self, name)}")
        for kind in UnitType.player_types():
            s = self.units[kind]
            k = kind.key()
            lines.append(
                f"unit.{k} hp={s.max_hp} damage={s.damage} range={s.attack_range}"
                f" cooldown={s.attack_cooldown} speed={s.speed} cost={s.cost}"
                f" build_ticks={s.build_ticks} sight={s.sight}"
                f" can_target_air={int(s.can_target_air)} flying={int(s.flying)}"
            )
        for (attacker, target), value in sorted(
            self.multipliers.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)
        ):
            lines.append(f"multiplier.{attacker.key()}.{target.key()} {value}")
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.dump().encode()).hexdigest()[:16]

    def save(self, path) -> None:
        with open(path, "w") as f:
            f.write(self.dump())

    @classmethod
    def load(cls, path) -> "BalanceConfig":
        with open(path) as f:
            return cls.parse(f.read())

    @classmethod
    def parse(cls, text: str) -> "BalanceConfig":
        cfg = cls()
        units = dict(cfg.units)
        multipliers = dict(cfg.multipliers)
        rules: dict[str, int] = {}
        by_key = {kind.key(): kind for kind in UnitType.player_types()}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            name, _, value = line.partition(" ")
            value = value.strip()
            if name == "version":
                if int(value) != CONFIG_FORMAT_VERSION:
                    raise InvalidConfig(f"unsupported config version {value}")
            elif name.startswith("rule."):
                rules[name[5:]] = int(value)
            elif name.startswith("unit."):
                kind = by_key.get(name[5:])
                if kind is None:
                    raise InvalidConfig(f"line {lineno}: unknown unit {name[5:]!r}")
                units[kind] = _parse_unit(value, units[kind])
            elif name.startswith("multiplier."):
                _, a, t = name.split(".")
                if a not in by_key or t not in by_key:
                    raise InvalidConfig(f"line {lineno}: unknown type in {name!r}")
                multipliers[(by_key[a], by_key[t])] = float(value)
            else:
                raise InvalidConfig(f"line {lineno}: unknown key {name!r}")
        cfg = replace(cls(), units=units, multipliers=multipliers, **rules)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        for kind in UnitType.player_types():
            s = self.units[kind]
            if s.max_hp <= 0:
                raise InvalidConfig(f"{kind.key()}: max_hp must be > 0")
            if s.damage < 0 or s.attack_range < 0 or s.cost < 0:
                raise InvalidConfig(f"{kind.key()}: negative stat")
        for (attacker, target), value in self.multipliers.items():
            if value <= 0:
                raise InvalidConfig(f"multiplier {attacker.key()}->{target.key()} must be > 0")
            if target == UnitType.DRAGON and not self.units[attacker].can_target_air:
                raise InvalidConfig(f"{attacker.key()} has an anti-air multiplier but cannot target air")
        for attacker, target in FAVORED_EDGES:
            if self.multiplier(attacker, target) <= 1.0:
                raise InvalidConfig(f"favored edge {attacker.key()}->{target.key()} must be > 1")
        for building in UnitType.buildings():
            if self.multiplier(UnitType.CATAPULT, building) <= 1.0:
                raise InvalidConfig("catapult must be favored against buildings")
        if self.starting_money < 0 or self.max_ticks <= 0 or self.mine_ticks <= 0:
            raise InvalidConfig("bad rule value")


def _parse_unit(value: str, base: UnitStats) -> UnitStats:
    fields = {}
    for item in value.split():
        k, _, v = item.partition("=")
        if k == "hp":
            fields["max_hp"] = int(v)
        elif k in ("damage", "cooldown", "cost", "build_ticks", "sight", "range"):
            key = {"cooldown": "attack_cooldown", "range": "attack_range"}.get(k, k)
            fields[key] = int(v)
        elif k == "speed":
            fields["speed"] = float(v)
        elif k in ("can_target_air", "flying"):
            fields[k] = bool(int(v))
        else:
            raise InvalidConfig(f"unknown unit field {k!r}")
    return replace(base, **fields)


class InvalidConfig(ValueError):
    pass


DEFAULT_CONFIG = BalanceConfig()
