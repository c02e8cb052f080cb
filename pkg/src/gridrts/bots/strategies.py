"""The six scripted opponent strategies.

Every bot follows the same contract: ``act(observation) -> [(unit_id,
ActionRecord), ...]``.  Bots only read their own observation, keep their
plans in BotState, and re-plan when the engine rejects an intent (rejected
commands are simply dropped by the runner; the bot re-issues on its next
act).  All randomness comes from the per-bot seeded generator.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..balance import PRODUCER_OF, BalanceConfig
from ..core.types import ActionRecord, ActionType, Cell, UnitType, chebyshev
from .view import BotView, SeenUnit, build_site_near, buildable

# Simple's army choice list (catapult and peasant are deliberately absent)
CHOICE_TYPES = (UnitType.SPEARMAN, UnitType.SWORDMAN, UnitType.CAVALRY,
                UnitType.ARCHER, UnitType.DRAGON)


class NoEnemySeen(LookupError):
    pass


class NoSiteAvailable(LookupError):
    pass


def strong_counter(balance: BalanceConfig, seen_counts: dict[UnitType, int]) -> UnitType:
    """Counter pick against the most-numerous seen enemy army type.

    Maximal damage multiplier wins; ties go to the cheaper unit.
    """
    if not seen_counts:
        raise NoEnemySeen("keep scouting")
    target = max(seen_counts.items(), key=lambda kv: (kv[1], -kv[0]))[0]
    best, best_key = None, None
    for cand in CHOICE_TYPES:
        if not balance.can_attack(cand, target):
            continue
        mult = balance.multiplier(cand, target)
        key = (-mult, balance.stats(cand).cost, cand)
        if best_key is None or key < best_key:
            best, best_key = cand, key
    return best


def second_base_site(view: BotView) -> Cell:
    """Buildable cell within 2 of the second-closest resource to our hall."""
    hall = view.my_hall()
    if hall is None or len(view.resources) < 2:
        raise NoSiteAvailable("need a hall and two known resources")
    ranked = sorted(view.resources,
                    key=lambda r: (view.path_distance(hall.cell, r.cell), r.id))
    second = ranked[1]
    candidates = []
    for dx in range(-2, 3):
        for dy in range(-2, 3):
            cell = (second.cell[0] + dx, second.cell[1] + dy)
            if (dx, dy) != (0, 0) and buildable(view, cell):
                candidates.append((max(abs(dx), abs(dy)), cell))
    if not candidates:
        raise NoSiteAvailable(f"no free cell near resource {second.id}")
    return min(candidates)[1]


def tower_rush_plan(view: BotView, limit: int = 4) -> list[Cell]:
    """Successive guard tower sites within (tower range + 2) of the enemy hall."""
    hall = view.enemy_hall()
    if hall is None:
        return []
    reach = view.balance.stats(UnitType.GUARD_TOWER).attack_range + 2
    sites = []
    for dx in range(-reach, reach + 1):
        for dy in range(-reach, reach + 1):
            cell = (hall.cell[0] + dx, hall.cell[1] + dy)
            d = max(abs(dx), abs(dy))
            if 1 <= d <= reach and buildable(view, cell):
                sites.append((d, cell))
    sites.sort()
    return [cell for _, cell in sites[:limit]]


@dataclass
class BotState:
    army_type: UnitType | None = None
    target_size: int = 3
    scout_id: int | None = None
    phase: str = "start"
    attacking: bool = False
    built_second_base: bool = False


class ScriptedBot:
    """Shared machinery: economy, production, army control, scouting."""

    name = "scripted"
    uses_scout = False

    def __init__(self, player: int, seed: int, balance: BalanceConfig | None = None,
                 resource_scaling: float = 1.0):
        self.player = player
        self.rng = random.Random((seed << 1) ^ player)
        self.balance = balance or BalanceConfig()
        self.resource_scaling = resource_scaling
        self.bs = BotState()
        self._setup(self.rng)

    def _setup(self, rng: random.Random) -> None:
        self.bs.army_type = CHOICE_TYPES[rng.randrange(len(CHOICE_TYPES))]
        self.bs.target_size = 3

    def _phase(self, name: str) -> None:
        self.bs.phase = name

    def _threatens_home(self, view: BotView, enemy, radius: int) -> bool:
        hall = view.my_hall()
        if hall is None:
            return True
        if chebyshev(enemy.cell, hall.cell) <= radius:
            return True
        # miners working away from the hall count as home; the scout does not
        return any(chebyshev(enemy.cell, u.cell) <= 3
                   and chebyshev(u.cell, hall.cell) <= radius
                   for u in view.my_units(UnitType.PEASANT)
                   if u.id != self.bs.scout_id)

    def _keep_peasants(self, view: BotView, out, floor: int, extra: int = 0) -> None:
        """Retrain lost workers; grow past the floor only with cash to spare."""
        cost = self.balance.stats(UnitType.PEASANT).cost
        n = sum(1 for _ in view.my_units(UnitType.PEASANT))
        n += sum(1 for u in view.my_units(UnitType.TOWN_HALL)
                 if u.current == ActionType.TRAIN_UNIT)
        if n >= floor + extra:
            return
        if n >= floor and view.money < cost + 150:
            return
        if view.money < cost:
            return
        producer = view.idle_producer(UnitType.TOWN_HALL)
        if producer is not None:
            out.append((producer.id, ActionRecord(
                ActionType.TRAIN_UNIT, unit_type=UnitType.PEASANT)))

    # -- helpers ----------------------------------------------------------

    def _assign_miners(self, view: BotView, out, skip: set[int]) -> None:
        for u in view.my_units(UnitType.PEASANT):
            if u.id in skip or u.current != ActionType.IDLE:
                continue
            node = view.nearest_resource(u.cell)
            if node is not None:
                out.append((u.id, ActionRecord(ActionType.GATHER, target_id=node.id)))

    def _ensure_building(self, view: BotView, kind: UnitType, out,
                         skip: set[int], site: Cell | None = None) -> bool:
        """True when the building exists (or is going up with a live crew)."""
        if any(view.my_units(kind)):
            return True
        stalled = view.under_construction(kind)
        if stalled:
            site_cell = stalled[0].cell
            crew = any(u.current == ActionType.BUILD_BUILDING
                       for u in view.my_units(UnitType.PEASANT))
            if not crew:  # builder died: send someone to resume (free)
                builder = self._pick_builder(view, skip)
                if builder is not None:
                    out.append((builder.id, ActionRecord(
                        ActionType.BUILD_BUILDING, unit_type=kind, cell=site_cell)))
                    skip.add(builder.id)
            return True
        if view.money < self.balance.stats(kind).cost:
            return False
        hall = view.my_hall()
        if site is None:
            if hall is None:
                return False
            site = build_site_near(view, hall.cell)
        if site is None:
            return False
        builder = self._pick_builder(view, skip)
        if builder is None:
            return False
        out.append((builder.id,
                    ActionRecord(ActionType.BUILD_BUILDING, unit_type=kind, cell=site)))
        skip.add(builder.id)
        return False

    def _pick_builder(self, view: BotView, skip: set[int]) -> SeenUnit | None:
        peasants = [u for u in view.my_units(UnitType.PEASANT) if u.id not in skip]
        if not peasants:
            return None
        builders = [u for u in peasants if u.current == ActionType.BUILD_BUILDING]
        if builders:
            return None  # one construction crew at a time
        idle = [u for u in peasants if u.current == ActionType.IDLE]
        pool = idle or peasants
        return min(pool, key=lambda u: u.id)

    def _train_army(self, view: BotView, kind: UnitType, target: int, out) -> int:
        """Keep (alive + in production) at the target; returns the live count."""
        alive = sum(1 for u in view.my_army() if u.kind == kind)
        producer_kind = PRODUCER_OF[kind]
        training = sum(1 for u in view.my_units(producer_kind)
                       if u.current == ActionType.TRAIN_UNIT)
        if alive + training < target and view.money >= self.balance.stats(kind).cost:
            producer = view.idle_producer(producer_kind)
            if producer is not None:
                out.append((producer.id,
                            ActionRecord(ActionType.TRAIN_UNIT, unit_type=kind)))
        return alive

    def _command_army(self, view: BotView, out, skip: set[int],
                      defend_radius: int | None = None) -> None:
        """Idle fighters engage the nearest known enemy or hunt the unknown.

        With ``defend_radius`` set the army stays home: it only engages
        enemies that close to within that range of our hall."""
        fighters = [u for u in view.my_army() if u.id not in skip]
        if not fighters:
            return
        visible = [e for e in view.enemies if e.visible]
        remembered = [e for e in view.enemies if not e.visible]
        if defend_radius is not None:
            visible = [e for e in visible if self._threatens_home(view, e, defend_radius)]
            remembered = []
        for u in fighters:
            if u.current != ActionType.IDLE:
                continue
            flying = self.balance.stats(u.kind).flying
            targets = [e for e in visible if self.balance.can_attack(u.kind, e.kind)]
            ghosts = [e for e in remembered
                      if view.can_reach(u.cell, e.cell, flying)]
            if targets:
                enemy = min(targets, key=lambda e: (
                    max(abs(e.cell[0] - u.cell[0]), abs(e.cell[1] - u.cell[1])),
                    e.kind.is_building(),  # units first, structures after
                    e.id))
                out.append((u.id, ActionRecord(ActionType.ATTACK, target_id=enemy.id)))
            elif ghosts:
                ghost = min(ghosts, key=lambda e: (
                    max(abs(e.cell[0] - u.cell[0]), abs(e.cell[1] - u.cell[1])), e.id))
                out.append((u.id, ActionRecord(ActionType.MOVE, cell=ghost.cell)))
            elif defend_radius is None:
                hunt = view.nearest_unexplored(u.cell, flying=flying)
                if hunt is not None:
                    out.append((u.id, ActionRecord(ActionType.MOVE, cell=hunt)))

    def _run_scout(self, view: BotView, out, skip: set[int]) -> None:
        peasants = sorted(view.my_units(UnitType.PEASANT), key=lambda u: u.id)
        if not peasants:
            return
        scout = next((u for u in peasants if u.id == self.bs.scout_id), None)
        if scout is None:
            scout = peasants[0]
            self.bs.scout_id = scout.id
        skip.add(scout.id)
        if scout.current in (ActionType.IDLE, ActionType.GATHER):
            # sweep outward from the mirror of our hall: the opponent spawned
            # far away, so that is where the map is worth uncovering first
            hall = view.my_hall()
            size = view.water.shape[0]
            anchor = ((size - 1 - hall.cell[0], size - 1 - hall.cell[1])
                      if hall is not None else scout.cell)
            target = view.nearest_unexplored(scout.cell, anchor=anchor)
            if target is not None:
                out.append((scout.id, ActionRecord(ActionType.MOVE, cell=target)))

    # -- strategy hook ----------------------------------------------------

    def act(self, obs) -> list[tuple[int, ActionRecord]]:
        view = BotView(obs, self.balance)
        out: list[tuple[int, ActionRecord]] = []
        skip: set[int] = set()
        if self.uses_scout and self._needs_scout(view):
            self._run_scout(view, out, skip)
        self.play(view, out, skip)
        return out

    def _needs_scout(self, view: BotView) -> bool:
        return True

    def play(self, view: BotView, out, skip) -> None:  # pragma: no cover
        raise NotImplementedError


class SimpleBot(ScriptedBot):
    """Mine with the 3 starting peasants, build one producer, keep an army of
    target_size of one chosen type, and send it to attack."""

    name = "simple"

    def play(self, view: BotView, out, skip) -> None:
        self._assign_miners(view, out, skip)
        kind = self.bs.army_type
        producer = PRODUCER_OF[kind]
        if not self._ensure_building(view, producer, out, skip):
            self._phase("mine" if not view.under_construction(producer)
                        else f"build_{producer.key()}")
            return
        alive = self._train_army(view, kind, self.bs.target_size, out)
        if alive >= self.bs.target_size or (alive >= 3 and view.tick > 5000):
            self.bs.attacking = True
        self._phase("attack" if self.bs.attacking
                    else f"train_{kind.key()}_x{self.bs.target_size}")
        self._command_army(view, out, skip,
                           defend_radius=None if self.bs.attacking else 8)


class MediumBot(SimpleBot):
    """Simple with a randomly chosen army size between 3 and 7."""

    name = "medium"

    def _setup(self, rng: random.Random) -> None:
        super()._setup(rng)
        self.bs.target_size = rng.randint(3, 7)


class StrongBot(MediumBot):
    """Scouts with one peasant, counter-picks from the attack graph once the
    enemy army is seen, then plays like Medium."""

    name = "strong"
    uses_scout = True
    fallback_tick = 1500  # nothing seen by then: stop waiting, pick at random

    def _needs_scout(self, view: BotView) -> bool:
        return self.bs.army_type is None

    # a spotted producer building gives the army away before any unit does
    BUILDING_TELLS = {
        UnitType.BARRACK: UnitType.SPEARMAN,
        UnitType.BLACKSMITH: UnitType.SWORDMAN,
        UnitType.STABLE: UnitType.CAVALRY,
        UnitType.WORKSHOP: UnitType.DRAGON,  # worst case of its three products
    }

    def _setup(self, rng: random.Random) -> None:
        super()._setup(rng)
        self.bs.army_type = None  # decided by counter-picking

    def play(self, view: BotView, out, skip) -> None:
        self._assign_miners(view, out, skip)
        self._keep_peasants(view, out, floor=4, extra=2)
        if self.bs.army_type is None:
            counts = view.enemy_army_counts()
            if not counts:
                for e in view.enemies:
                    tell = self.BUILDING_TELLS.get(e.kind)
                    if tell is not None:
                        counts[tell] = counts.get(tell, 0) + 1
            if counts:
                self.bs.army_type = strong_counter(self.balance, counts)
            elif view.tick >= self.fallback_tick:
                self.bs.army_type = CHOICE_TYPES[self.rng.randrange(len(CHOICE_TYPES))]
            else:
                self._phase("scout")
                return
        kind = self.bs.army_type
        producer = PRODUCER_OF[kind]
        if not self._ensure_building(view, producer, out, skip):
            self._phase(f"build_{producer.key()}")
            return
        alive = self._train_army(view, kind, self.bs.target_size, out)
        if alive >= self.bs.target_size or (alive >= 3 and view.tick > 5000):
            self.bs.attacking = True
        self._phase("attack" if self.bs.attacking
                    else f"train_{kind.key()}_x{self.bs.target_size}")
        self._command_army(view, out, skip,
                           defend_radius=None if self.bs.attacking else 8)


class SecondBaseBot(MediumBot):
    """Expand to the second-closest resource, then field a larger army."""

    name = "second_base"

    def _setup(self, rng: random.Random) -> None:
        super()._setup(rng)
        self.bs.target_size = rng.randint(6, 9)

    def play(self, view: BotView, out, skip) -> None:
        self._assign_miners(view, out, skip)
        halls = list(view.my_units(UnitType.TOWN_HALL))
        expanding = view.under_construction(UnitType.TOWN_HALL)
        if len(halls) < 2 and not expanding and not self.bs.built_second_base:
            if view.money >= self.balance.stats(UnitType.TOWN_HALL).cost:
                try:
                    site = second_base_site(view)
                except NoSiteAvailable:
                    self.bs.built_second_base = True  # map too cramped: skip
                else:
                    builder = self._pick_builder(view, skip)
                    if builder is not None:
                        out.append((builder.id, ActionRecord(
                            ActionType.BUILD_BUILDING,
                            unit_type=UnitType.TOWN_HALL, cell=site)))
                        skip.add(builder.id)
            self._phase("second_base")
            return
        if len(halls) >= 2:
            self.bs.built_second_base = True
            # a bigger economy: keep six peasants mining across the bases
            peasants = list(view.my_units(UnitType.PEASANT))
            if len(peasants) < 6:
                self._train_peasant(view, out)
        kind = self.bs.army_type
        producer = PRODUCER_OF[kind]
        if not self._ensure_building(view, producer, out, skip):
            self._phase(f"build_{producer.key()}")
            return
        alive = self._train_army(view, kind, self.bs.target_size, out)
        if alive >= self.bs.target_size or (alive >= 3 and view.tick > 5000):
            self.bs.attacking = True
        self._phase("attack" if self.bs.attacking
                    else f"train_{kind.key()}_x{self.bs.target_size}")
        self._command_army(view, out, skip,
                           defend_radius=None if self.bs.attacking else 8)

    def _train_peasant(self, view: BotView, out) -> None:
        if view.money < self.balance.stats(UnitType.PEASANT).cost:
            return
        producer = view.idle_producer(UnitType.TOWN_HALL)
        if producer is not None:
            out.append((producer.id,
                        ActionRecord(ActionType.TRAIN_UNIT, unit_type=UnitType.PEASANT)))


class TowerRushBot(ScriptedBot):
    """Scout out the enemy hall, then drop guard towers on its doorstep."""

    name = "tower_rush"
    uses_scout = True

    def _needs_scout(self, view: BotView) -> bool:
        return view.enemy_hall() is None

    def play(self, view: BotView, out, skip) -> None:
        self._assign_miners(view, out, skip)
        self._keep_peasants(view, out, floor=3, extra=1)
        hall = view.enemy_hall()
        if hall is None:
            self._phase("scout")
            return
        self._phase("tower_rush")
        in_progress = view.under_construction(UnitType.GUARD_TOWER)
        if in_progress:
            return
        if view.money < self.balance.stats(UnitType.GUARD_TOWER).cost:
            return
        sites = tower_rush_plan(view)
        if not sites:
            return
        builder = self._pick_builder(view, skip)
        if builder is None:
            return
        out.append((builder.id, ActionRecord(
            ActionType.BUILD_BUILDING, unit_type=UnitType.GUARD_TOWER,
            cell=sites[0])))
        skip.add(builder.id)


class PeasantRushBot(ScriptedBot):
    """Mine with three, then flood the map with attacking peasants.

    Never constructs a building of any kind."""

    name = "peasant_rush"

    def play(self, view: BotView, out, skip) -> None:
        peasants = sorted(view.my_units(UnitType.PEASANT), key=lambda u: u.id)
        attackers = peasants[3:]
        self._assign_miners(view, out, skip | {u.id for u in attackers})
        if view.money >= self.balance.stats(UnitType.PEASANT).cost:
            producer = view.idle_producer(UnitType.TOWN_HALL)
            if producer is not None:
                out.append((producer.id, ActionRecord(
                    ActionType.TRAIN_UNIT, unit_type=UnitType.PEASANT)))
        self._phase("attack" if attackers else "mine")
        visible = [e for e in view.enemies if e.visible]
        remembered = [e for e in view.enemies if not e.visible]
        hunt = None
        for u in attackers:
            if u.current != ActionType.IDLE:
                continue
            if visible:
                enemy = min(visible, key=lambda e: (
                    max(abs(e.cell[0] - u.cell[0]), abs(e.cell[1] - u.cell[1])),
                    e.kind.is_building(), e.id))
                out.append((u.id, ActionRecord(ActionType.ATTACK, target_id=enemy.id)))
            elif remembered:
                ghost = min(remembered, key=lambda e: (
                    max(abs(e.cell[0] - u.cell[0]), abs(e.cell[1] - u.cell[1])), e.id))
                out.append((u.id, ActionRecord(ActionType.MOVE, cell=ghost.cell)))
            else:
                if hunt is None:
                    hunt = view.nearest_unexplored(u.cell)
                if hunt is not None:
                    out.append((u.id, ActionRecord(ActionType.MOVE, cell=hunt)))


STRATEGIES: dict[str, type[ScriptedBot]] = {
    cls.name: cls
    for cls in (SimpleBot, MediumBot, StrongBot, SecondBaseBot,
                TowerRushBot, PeasantRushBot)
}


def make_bot(strategy: str, player: int, seed: int,
             balance: BalanceConfig | None = None,
             resource_scaling: float = 1.0) -> ScriptedBot:
    key = strategy.lower().replace("-", "_")
    if key not in STRATEGIES:
        raise KeyError(f"unknown strategy {strategy!r}; "
                       f"expected one of {sorted(STRATEGIES)}")
    return STRATEGIES[key](player=player, seed=seed, balance=balance,
                           resource_scaling=resource_scaling)
