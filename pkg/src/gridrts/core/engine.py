"""Game rules: command validation and the fixed-phase tick step.

Phase order inside one tick (a design invariant — changing it changes every
replay): command intake -> movement -> combat (simultaneous damage, deaths
after all attacks) -> gather/deposit -> production/construction ->
visibility refresh -> outcome check.  The engine draws no randomness, so
state evolution is a pure function of (state, submitted commands).
"""
from __future__ import annotations

import math

from ..balance import FP, PRODUCES, BalanceConfig
from .state import N_PLAYERS, GameState
from .types import (
    IDLE, ActionRecord, ActionType, Cell, Event, Outcome, ResourceNode, Unit,
    UnitType, chebyshev,
)
from .visibility import VisibilityMemory

# rejection reasons returned by issue_command (None means accepted)
NOT_OWNED = "not_owned"
NOT_READY = "not_ready"
TARGET_UNATTACKABLE = "target_unattackable"
TARGET_NOT_VISIBLE = "target_not_visible"
INSUFFICIENT_FUNDS = "insufficient_funds"
ILLEGAL_CELL = "illegal_cell"
WRONG_PRODUCER = "wrong_producer"
PRODUCER_BUSY = "producer_busy"
ILLEGAL_ACTION = "illegal_action"
UNKNOWN_TARGET = "unknown_target"


class EngineError(Exception):
    pass


class GameOver(EngineError):
    pass


class OutOfRange(EngineError):
    pass


class OnCooldown(EngineError):
    pass


class TargetUnattackable(EngineError):
    pass


_CENTER = FP // 2


def _center(cell: Cell) -> tuple[int, int]:
    return (cell[0] * FP + _CENTER, cell[1] * FP + _CENTER)


def _at_center(unit: Unit) -> bool:
    return unit.x_fp % FP == _CENTER and unit.y_fp % FP == _CENTER


def new_game(config: BalanceConfig, grid, seed: int,
             resource_scaling: tuple[float, float] = (1.0, 1.0)) -> GameState:
    """Fresh game: one town hall and three peasants per player."""
    config.validate()
    grid.validate()
    state = GameState(config=config, grid=grid, seed=seed,
                      resource_scaling=list(resource_scaling))
    state.money = [config.starting_money] * N_PLAYERS
    state.vis = [VisibilityMemory(grid.size) for _ in range(N_PLAYERS)]

    for x, y in grid.resource_spawns:
        node = ResourceNode(id=state.alloc_id(), x=x, y=y,
                            remaining=config.resource_capacity)
        state.resources[node.id] = node
        state.resource_at[(x, y)] = node.id

    for player, spawn in enumerate(grid.townhall_spawns):
        _spawn_unit(state, player, UnitType.TOWN_HALL, spawn, complete=True)
        placed = 0
        for cell in _adjacent_cells(state, spawn):
            if state.grid.is_grass(cell) and cell not in state.building_at \
                    and cell not in state.resource_at:
                _spawn_unit(state, player, UnitType.PEASANT, cell, complete=True)
                placed += 1
                if placed == 3:
                    break
        while placed < 3:  # cramped spawn: peasants may share a cell
            _spawn_unit(state, player, UnitType.PEASANT, spawn, complete=True)
            placed += 1

    for player in range(N_PLAYERS):
        state.vis[player].refresh_snapshots(
            state.units_of(state.enemy_of(player)), state.tick)
    return state


def _adjacent_cells(state: GameState, cell: Cell, radius: int = 1):
    """In-bounds cells within Chebyshev radius, in lexicographic (x, y) order."""
    size = state.grid.size
    x0, y0 = cell
    for nx in range(max(0, x0 - radius), min(size, x0 + radius + 1)):
        for ny in range(max(0, y0 - radius), min(size, y0 + radius + 1)):
            if (nx, ny) != cell:
                yield (nx, ny)


def _spawn_unit(state: GameState, owner: int, kind: UnitType, cell: Cell,
                complete: bool) -> Unit:
    stats = state.config.stats(kind)
    cx, cy = _center(cell)
    unit = Unit(
        id=state.alloc_id(), owner=owner, kind=kind, hp=stats.max_hp,
        x_fp=cx, y_fp=cy,
        build_ticks_total=0 if complete else stats.build_ticks,
        stats=stats, building=kind.is_building(),
    )
    if not complete:
        # observable marker: a building under construction carries the build
        # action until it finishes, so players can tell it apart from idle
        unit.current_action = ActionRecord(ActionType.BUILD_BUILDING,
                                           unit_type=kind, cell=cell)
    state.units[unit.id] = unit
    if kind.is_building():
        state.building_at[cell] = unit.id
    if state.vis:
        state.vis[owner].add_stamp(cell, stats.sight)
    if state.event_sink is not None:
        state.event_sink.append(Event("spawn", state.tick,
                                      {"unit": unit.id, "kind": kind.key(),
                                       "owner": owner, "cell": list(cell),
                                       "complete": complete}))
    return unit


def _kill_unit(state: GameState, unit: Unit, events: list[Event]) -> None:
    del state.units[unit.id]
    if unit.building and state.building_at.get(unit.cell) == unit.id:
        del state.building_at[unit.cell]
    state.vis[unit.owner].remove_stamp(unit.cell, unit.stats.sight)
    events.append(Event("death", state.tick,
                        {"unit": unit.id, "kind": unit.kind.key(),
                         "owner": unit.owner, "cell": list(unit.cell)}))


def _set_action(unit: Unit, action: ActionRecord) -> None:
    unit.previous_action = unit.current_action
    unit.current_action = action
    unit.waypoint = None
    unit.mine_ticks_left = 0


def _complete_action(unit: Unit) -> None:
    _set_action(unit, IDLE)


# ── command validation ────────────────────────────────────────────────────

def issue_command(state: GameState, player: int, unit_id: int,
                  action: ActionRecord) -> str | None:
    """Validate and apply one command; returns None or a rejection reason.

    Accepted commands replace the unit's current action (the previous one is
    remembered); Continue never touches anything.  Train/build costs are
    debited here, atomically with acceptance.
    """
    if not action.payload_ok():
        return ILLEGAL_ACTION
    unit = state.units.get(unit_id)
    if unit is None or unit.owner != player:
        return NOT_OWNED
    if not unit.complete:
        return NOT_READY
    t = action.type

    if t == ActionType.CONTINUE:
        return None
    if t == ActionType.IDLE:
        if unit.producing is not None:
            return PRODUCER_BUSY  # paid production always runs to completion
        _set_action(unit, IDLE)
        return None
    if t == ActionType.MOVE:
        stats = state.config.stats(unit.kind)
        if unit.kind.is_building() or stats.speed_fp == 0:
            return ILLEGAL_ACTION
        if not state.nav.in_bounds(action.cell):
            return ILLEGAL_CELL
        if not stats.flying and state.grid.water[action.cell[1], action.cell[0]]:
            return ILLEGAL_CELL
        _set_action(unit, action)
        return None
    if t == ActionType.GATHER:
        if unit.kind != UnitType.PEASANT:
            return ILLEGAL_ACTION
        if action.target_id not in state.resources:
            return UNKNOWN_TARGET
        _set_action(unit, action)
        return None
    if t == ActionType.ATTACK:
        if state.config.stats(unit.kind).damage <= 0:
            return ILLEGAL_ACTION
        target = state.units.get(action.target_id)
        if target is None:
            return UNKNOWN_TARGET
        if target.owner == player or target.owner < 0:
            return TARGET_UNATTACKABLE
        if not state.config.can_attack(unit.kind, target.kind):
            return TARGET_UNATTACKABLE
        if not state.vis[player].cell_visible(target.cell):
            return TARGET_NOT_VISIBLE
        _set_action(unit, action)
        return None
    if t == ActionType.TRAIN_UNIT:
        if action.unit_type not in PRODUCES.get(unit.kind, ()):
            return WRONG_PRODUCER
        if unit.producing is not None:
            return PRODUCER_BUSY
        stats = state.config.stats(action.unit_type)
        if state.money[player] < stats.cost:
            return INSUFFICIENT_FUNDS
        state.money[player] -= stats.cost
        unit.producing = action.unit_type
        unit.produce_ticks_left = stats.build_ticks
        _set_action(unit, action)
        return None
    if t == ActionType.BUILD_BUILDING:
        if unit.kind != UnitType.PEASANT or not action.unit_type.is_building():
            return WRONG_PRODUCER
        cell = action.cell
        if not state.nav.in_bounds(cell) or state.grid.water[cell[1], cell[0]]:
            return ILLEGAL_CELL
        existing_id = state.building_at.get(cell)
        if existing_id is not None:
            existing = state.units[existing_id]
            if (existing.owner == player and existing.kind == action.unit_type
                    and not existing.complete):
                _set_action(unit, action)  # resume a stalled construction
                return None
            return ILLEGAL_CELL
        if cell in state.resource_at:
            return ILLEGAL_CELL
        stats = state.config.stats(action.unit_type)
        if state.money[player] < stats.cost:
            return INSUFFICIENT_FUNDS
        state.money[player] -= stats.cost
        _spawn_unit(state, player, action.unit_type, cell, complete=False)
        _set_action(unit, action)
        return None
    return ILLEGAL_ACTION


def resolve_attack(config: BalanceConfig, attacker: Unit, target: Unit) -> int:
    """Damage of one attack; resets the attacker's cooldown.

    damage = base_damage x multiplier(attacker, target), rounded half-up.
    """
    stats = config.stats(attacker.kind)
    if not config.can_attack(attacker.kind, target.kind):
        raise TargetUnattackable(
            f"{attacker.kind.key()} cannot attack {target.kind.key()}")
    if chebyshev(attacker.cell, target.cell) > stats.attack_range:
        raise OutOfRange
    if attacker.cooldown > 0:
        raise OnCooldown
    damage = math.floor(stats.damage * config.multiplier(attacker.kind, target.kind) + 0.5)
    attacker.cooldown = stats.attack_cooldown
    return damage


def check_outcome(state: GameState) -> int:
    """Win when the opponent holds no town halls (built or building); draw at
    the tick limit or on simultaneous base loss."""
    halls = [0, 0]
    for u in state.units.values():
        if u.kind == UnitType.TOWN_HALL:
            halls[u.owner] += 1
    if halls[0] == 0 and halls[1] == 0:
        return Outcome.DRAW
    if halls[1] == 0:
        return Outcome.win(0)
    if halls[0] == 0:
        return Outcome.win(1)
    if state.tick >= state.config.max_ticks:
        return Outcome.DRAW
    return Outcome.ONGOING


def compute_visibility(state: GameState, player: int):
    """Three-state visibility grid plus refreshed last-seen snapshots."""
    vis = state.vis[player]
    vis.refresh_snapshots(state.units_of(state.enemy_of(player)), state.tick)
    return vis.grid(), vis.snapshots


# ── the tick step ─────────────────────────────────────────────────────────

Commands = dict[int, list[tuple[int, ActionRecord]]]


def step(state: GameState, commands: Commands | None = None) -> list[Event]:
    """Advance exactly one tick; returns the events it produced."""
    if state.outcome != Outcome.ONGOING:
        raise GameOver(f"game ended: {Outcome.name(state.outcome)}")
    events: list[Event] = []
    state.event_sink = events

    if commands:
        for player in range(N_PLAYERS):
            for unit_id, action in commands.get(player, ()):
                reason = issue_command(state, player, unit_id, action)
                if reason is not None:
                    events.append(Event("reject", state.tick,
                                        {"player": player, "unit": unit_id,
                                         "reason": reason}))

    _phase_movement(state)
    _phase_combat(state, events)
    _phase_gather(state, events)
    _phase_production(state, events)

    for player in range(N_PLAYERS):
        state.vis[player].refresh_snapshots(
            state.units_of(state.enemy_of(player)), state.tick)

    outcome = check_outcome(state)
    if outcome != Outcome.ONGOING:
        state.outcome = outcome
        events.append(Event("outcome", state.tick,
                            {"outcome": Outcome.name(outcome)}))
    state.tick += 1
    state.event_sink = None
    return events


def _known_target_cell(state: GameState, player: int, target_id: int) -> Cell | None:
    """Where an attacker should head: a live commanded target is tracked
    (attack-pursuit; fog gates only command issue), a dead one is chased to
    its remembered cell until the spot is seen empty."""
    target = state.units.get(target_id)
    if target is not None:
        return target.cell
    snap = state.vis[player].snapshots.get(target_id)
    return snap.cell if snap is not None else None


def _walk(state: GameState, unit: Unit, dest: Cell) -> bool:
    """Advance one tick of movement toward dest; False when no progress is possible."""
    stats = unit.stats
    speed = stats.speed_fp
    if speed == 0:
        return False
    if unit.waypoint is None:
        if unit.cell == dest:
            unit.waypoint = dest  # settle onto the cell center
        else:
            nxt = state.nav.next_step(unit.cell, dest, stats.flying)
            if nxt is None and not stats.flying:
                nxt = _greedy_step(state, unit.cell, dest)
            if nxt is None:
                if _at_center(unit):
                    return False
                _settle(state, unit, speed)
                return True
            unit.waypoint = nxt
    tx, ty = _center(unit.waypoint)
    _move_fp(state, unit, tx, ty, speed)
    if unit.x_fp == tx and unit.y_fp == ty:
        unit.waypoint = None
    return True


def _settle(state: GameState, unit: Unit, speed: int) -> bool:
    """Off-center with nowhere to go: drift back to the local cell center."""
    tx, ty = _center(unit.cell)
    _move_fp(state, unit, tx, ty, speed)
    return True


def _move_fp(state: GameState, unit: Unit, tx: int, ty: int, speed: int) -> None:
    old_cell = unit.cell
    dx = tx - unit.x_fp
    dy = ty - unit.y_fp
    unit.x_fp += max(-speed, min(speed, dx))
    unit.y_fp += max(-speed, min(speed, dy))
    new_cell = unit.cell
    if new_cell != old_cell:
        state.vis[unit.owner].move_stamp(old_cell, new_cell, unit.stats.sight)


def _greedy_step(state: GameState, cur: Cell, dest: Cell) -> Cell | None:
    """Fallback when dest is not ground-reachable (e.g. chasing a dragon over
    water): take the passable step that best closes in on the target."""
    best = None
    best_key = None
    cur_d = chebyshev(cur, dest)
    for cell in _adjacent_cells(state, cur):
        if not state.grid.is_grass(cell):
            continue
        d = chebyshev(cell, dest)
        if d >= cur_d:
            continue
        key = (d, abs(cell[0] - dest[0]) + abs(cell[1] - dest[1]), cell)
        if best_key is None or key < best_key:
            best, best_key = cell, key
    return best


def _phase_movement(state: GameState) -> None:
    units = state.units
    IDLE_T, CONT_T = ActionType.IDLE, ActionType.CONTINUE
    for unit in list(units.values()):
        if unit.cooldown > 0:
            unit.cooldown -= 1
        if unit.building:
            continue
        act = unit.current_action
        t = act.type
        if t == IDLE_T or t == CONT_T:
            continue
        if t == ActionType.MOVE:
            if unit.cell == act.cell and _at_center(unit):
                _complete_action(unit)
            elif not _walk(state, unit, act.cell):
                _complete_action(unit)  # unreachable: give up rather than spin
        elif t == ActionType.ATTACK:
            target = units.get(act.target_id)
            tcell = _known_target_cell(state, unit.owner, act.target_id)
            if tcell is None:
                _complete_action(unit)
                continue
            in_range = (target is not None
                        and chebyshev(unit.cell, target.cell) <= unit.stats.attack_range)
            if not in_range:
                _walk(state, unit, tcell)
        elif t == ActionType.GATHER:
            node = state.resources.get(act.target_id)
            if unit.carry > 0:
                hall = _home_hall(state, unit)
                if hall is not None and chebyshev(unit.cell, hall.cell) > 1:
                    _walk(state, unit, hall.cell)
            elif node is None:
                _complete_action(unit)
            elif chebyshev(unit.cell, node.cell) > 1:
                _walk(state, unit, node.cell)
        elif t == ActionType.BUILD_BUILDING:
            site_id = state.building_at.get(act.cell)
            building = units.get(site_id) if site_id is not None else None
            if building is None or building.complete:
                _complete_action(unit)
            elif chebyshev(unit.cell, act.cell) > 1:
                _walk(state, unit, act.cell)


def _nearest_hall(state: GameState, unit: Unit) -> Unit | None:
    """Closest completed own town hall by ground-path distance (ties: lowest id)."""
    best = None
    best_key = None
    for u in state.units.values():
        if u.owner == unit.owner and u.kind == UnitType.TOWN_HALL and u.complete:
            d = state.nav.distance(unit.cell, u.cell)
            key = (d, u.id)
            if best_key is None or key < best_key:
                best, best_key = u, key
    return best


def _home_hall(state: GameState, unit: Unit) -> Unit | None:
    """The hall a carrying peasant is returning to, chosen once per trip."""
    if unit.home_hall is not None:
        hall = state.units.get(unit.home_hall)
        if hall is not None and hall.complete:
            return hall
        unit.home_hall = None
    hall = _nearest_hall(state, unit)
    if hall is not None:
        unit.home_hall = hall.id
    return hall


def _tower_target(state: GameState, tower: Unit) -> int | None:
    """Auto-acquire: nearest visible attackable enemy in range (ties: lowest id)."""
    stats = state.config.stats(tower.kind)
    vis = state.vis[tower.owner]
    best = None
    best_key = None
    for u in state.units.values():
        if u.owner < 0 or u.owner == tower.owner:
            continue
        d = chebyshev(tower.cell, u.cell)
        if d > stats.attack_range:
            continue
        if not vis.cell_visible(u.cell):
            continue
        key = (d, u.id)
        if best_key is None or key < best_key:
            best, best_key = u, key
    return best.id if best is not None else None


def _phase_combat(state: GameState, events: list[Event]) -> None:
    config = state.config
    damage_acc: dict[int, int] = {}
    for unit in state.units.values():
        act = unit.current_action
        if act.type == ActionType.ATTACK:
            target_id = act.target_id
        elif unit.kind is UnitType.GUARD_TOWER and unit.complete:
            target_id = _tower_target(state, unit)
            if target_id is None:
                continue
        else:
            continue
        target = state.units.get(target_id)
        if target is None:
            continue
        if unit.cooldown > 0:
            continue
        if chebyshev(unit.cell, target.cell) > unit.stats.attack_range:
            continue
        damage = resolve_attack(config, unit, target)
        damage_acc[target_id] = damage_acc.get(target_id, 0) + damage
        events.append(Event("damage", state.tick,
                            {"attacker": unit.id, "attacker_kind": unit.kind.key(),
                             "target": target_id, "target_kind": target.kind.key(),
                             "amount": damage}))
    if not damage_acc:
        return
    dead = []
    for target_id, total in damage_acc.items():
        target = state.units[target_id]
        target.hp -= total
        if target.hp <= 0:
            dead.append(target)
    for unit in dead:
        _kill_unit(state, unit, events)


def _phase_gather(state: GameState, events: list[Event]) -> None:
    config = state.config
    for unit in state.units.values():
        act = unit.current_action
        if act.type != ActionType.GATHER or unit.kind != UnitType.PEASANT:
            continue
        if unit.carry > 0:
            hall = _home_hall(state, unit)
            if hall is not None and chebyshev(unit.cell, hall.cell) <= 1:
                amount = math.floor(unit.carry * state.resource_scaling[unit.owner] + 0.5)
                state.money[unit.owner] += amount
                events.append(Event("deposit", state.tick,
                                    {"player": unit.owner, "amount": amount,
                                     "carry": unit.carry}))
                unit.carry = 0
                unit.home_hall = None
        else:
            node = state.resources.get(act.target_id)
            if node is None or chebyshev(unit.cell, node.cell) > 1:
                continue
            if unit.mine_ticks_left == 0:
                unit.mine_ticks_left = config.mine_ticks
            unit.mine_ticks_left -= 1
            if unit.mine_ticks_left == 0:
                node.remaining -= config.carry_amount
                unit.carry = config.carry_amount
                events.append(Event("mine", state.tick,
                                    {"player": unit.owner, "resource": node.id,
                                     "amount": config.carry_amount,
                                     "remaining": node.remaining}))
                if node.remaining <= 0:
                    del state.resources[node.id]
                    del state.resource_at[node.cell]


def _phase_production(state: GameState, events: list[Event]) -> None:
    config = state.config
    building_sites: set[tuple[int, Cell]] = set()
    for unit in state.units.values():
        act = unit.current_action
        if (act.type == ActionType.BUILD_BUILDING and unit.kind == UnitType.PEASANT
                and chebyshev(unit.cell, act.cell) <= 1):
            building_sites.add((unit.owner, act.cell))

    for unit in list(state.units.values()):
        if not unit.building:
            continue
        if not unit.complete:
            if (unit.owner, unit.cell) in building_sites:
                unit.build_ticks_done += 1
                if unit.complete:
                    _complete_action(unit)
                    events.append(Event("complete", state.tick,
                                        {"unit": unit.id, "kind": unit.kind.key(),
                                         "owner": unit.owner, "cell": list(unit.cell)}))
            continue
        if unit.producing is None:
            continue
        if unit.produce_ticks_left > 0:
            unit.produce_ticks_left -= 1
        if unit.produce_ticks_left == 0:
            cell = _spawn_cell(state, unit.cell)
            if cell is None:
                continue  # fully walled in: hold until a cell frees up
            _spawn_unit(state, unit.owner, unit.producing, cell, complete=True)
            unit.producing = None
            _complete_action(unit)


def _spawn_cell(state: GameState, around: Cell) -> Cell | None:
    for radius in (1, 2):
        for cell in _adjacent_cells(state, around, radius):
            if state.grid.is_grass(cell) and cell not in state.building_at \
                    and cell not in state.resource_at:
                return cell
    return None
