from __future__ import annotations

import math

import pytest

from gridrts.balance import BalanceConfig
from gridrts.core import engine
from gridrts.core.engine import (
    ILLEGAL_CELL, PRODUCER_BUSY, TARGET_NOT_VISIBLE, TARGET_UNATTACKABLE,
    WRONG_PRODUCER, GameOver, OnCooldown, OutOfRange, TargetUnattackable,
    check_outcome, issue_command, new_game, resolve_attack, step,
)
from gridrts.core.types import (
    ActionRecord, ActionType, Outcome, UnitType,
)
from gridrts.mapgen import generate_map

from .conftest import empty_state, flat_grid, put


def attack(target_id):
    return ActionRecord(ActionType.ATTACK, target_id=target_id)


def gather(resource_id):
    return ActionRecord(ActionType.GATHER, target_id=resource_id)


def move(cell):
    return ActionRecord(ActionType.MOVE, cell=cell)


def train(kind):
    return ActionRecord(ActionType.TRAIN_UNIT, unit_type=kind)


def build(kind, cell):
    return ActionRecord(ActionType.BUILD_BUILDING, unit_type=kind, cell=cell)


def run_ticks(state, n, commands=None):
    events = []
    for _ in range(n):
        events.extend(step(state, commands))
        commands = None
        if state.outcome != Outcome.ONGOING:
            break
    return events


# ── new_game ──────────────────────────────────────────────────────────────

def test_new_game_starts_with_halls_and_peasants(config):
    grid = generate_map(7)
    state = new_game(config, grid, seed=7)
    halls = [u for u in state.units.values() if u.kind == UnitType.TOWN_HALL]
    peasants = [u for u in state.units.values() if u.kind == UnitType.PEASANT]
    assert len(halls) == 2
    assert len(peasants) == 6
    assert state.money == [config.starting_money] * 2
    assert state.tick == 0
    assert state.outcome == Outcome.ONGOING
    for p in peasants:
        hall = next(h for h in halls if h.owner == p.owner)
        assert max(abs(p.cell[0] - hall.cell[0]), abs(p.cell[1] - hall.cell[1])) <= 1


def test_new_game_is_deterministic(config):
    grid = generate_map(7)
    a = new_game(config, grid, seed=7)
    b = new_game(config, generate_map(7), seed=7)
    assert a.content_hash() == b.content_hash()


def test_new_game_rejects_bad_map(config):
    from gridrts.mapgen import InvalidMap, MapGrid
    import numpy as np
    water = np.zeros((32, 32), dtype=bool)
    water[3, 3] = True  # spawn on water
    bad = MapGrid(water, ((3, 3), (28, 28)), [])
    with pytest.raises(InvalidMap):
        new_game(config, bad, seed=1)


# ── issue_command ─────────────────────────────────────────────────────────

def test_ground_unit_cannot_attack_dragon():
    state = empty_state()
    spear = put(state, 0, UnitType.SPEARMAN, (10, 10))
    dragon = put(state, 1, UnitType.DRAGON, (11, 10))
    assert issue_command(state, 0, spear.id, attack(dragon.id)) == TARGET_UNATTACKABLE


def test_archer_may_attack_dragon():
    state = empty_state()
    archer = put(state, 0, UnitType.ARCHER, (10, 10))
    dragon = put(state, 1, UnitType.DRAGON, (11, 10))
    assert issue_command(state, 0, archer.id, attack(dragon.id)) is None


def test_build_on_water_rejected():
    import numpy as np
    water = np.zeros((32, 32), dtype=bool)
    water[12, 12] = True
    state = empty_state(water=water)
    peasant = put(state, 0, UnitType.PEASANT, (10, 10))
    assert issue_command(state, 0, peasant.id, build(UnitType.WORKSHOP, (12, 12))) == ILLEGAL_CELL


def test_workshop_trains_archer_and_debits_money(config):
    state = empty_state()
    shop = put(state, 0, UnitType.WORKSHOP, (10, 10))
    before = state.money[0]
    assert issue_command(state, 0, shop.id, train(UnitType.ARCHER)) is None
    assert state.money[0] == before - config.stats(UnitType.ARCHER).cost


def test_barrack_cannot_train_dragon():
    state = empty_state()
    barrack = put(state, 0, UnitType.BARRACK, (10, 10))
    assert issue_command(state, 0, barrack.id, train(UnitType.DRAGON)) == WRONG_PRODUCER


def test_attack_requires_visibility():
    state = empty_state()
    archer = put(state, 0, UnitType.ARCHER, (5, 5))
    far_enemy = put(state, 1, UnitType.SPEARMAN, (30, 30))
    assert issue_command(state, 0, archer.id, attack(far_enemy.id)) == TARGET_NOT_VISIBLE


def test_producer_is_busy_while_training():
    state = empty_state(money=10_000)
    hall = put(state, 0, UnitType.TOWN_HALL, (10, 10))
    assert issue_command(state, 0, hall.id, train(UnitType.PEASANT)) is None
    assert issue_command(state, 0, hall.id, train(UnitType.PEASANT)) == PRODUCER_BUSY


def test_continue_leaves_action_untouched():
    state = empty_state()
    spear = put(state, 0, UnitType.SPEARMAN, (10, 10))
    issue_command(state, 0, spear.id, move((12, 12)))
    before = spear.current_action
    assert issue_command(state, 0, spear.id, ActionRecord(ActionType.CONTINUE)) is None
    assert spear.current_action == before


def test_commands_replace_and_remember_previous():
    state = empty_state()
    spear = put(state, 0, UnitType.SPEARMAN, (10, 10))
    issue_command(state, 0, spear.id, move((12, 12)))
    issue_command(state, 0, spear.id, move((14, 14)))
    assert spear.current_action.cell == (14, 14)
    assert spear.previous_action.cell == (12, 12)


def test_not_owned_and_not_ready():
    state = empty_state()
    spear = put(state, 1, UnitType.SPEARMAN, (10, 10))
    assert issue_command(state, 0, spear.id, move((1, 1))) == engine.NOT_OWNED
    site = put(state, 0, UnitType.BARRACK, (5, 5), complete=False)
    assert issue_command(state, 0, site.id, train(UnitType.SPEARMAN)) == engine.NOT_READY


# ── resolve_attack ────────────────────────────────────────────────────────

def test_damage_is_base_times_multiplier(config):
    state = empty_state()
    archer = put(state, 0, UnitType.ARCHER, (10, 10))
    dragon = put(state, 1, UnitType.DRAGON, (11, 10))
    assert resolve_attack(config, archer, dragon) == 16  # 8 x 2.0
    sword = put(state, 0, UnitType.SWORDMAN, (12, 10))
    spear = put(state, 1, UnitType.SPEARMAN, (13, 10))
    assert resolve_attack(config, sword, spear) == 20  # 10 x 2.0


def test_resolve_attack_errors(config):
    state = empty_state()
    archer = put(state, 0, UnitType.ARCHER, (0, 0))
    enemy = put(state, 1, UnitType.SPEARMAN, (20, 20))
    with pytest.raises(OutOfRange):
        resolve_attack(config, archer, enemy)
    near = put(state, 1, UnitType.SPEARMAN, (1, 1))
    resolve_attack(config, archer, near)
    with pytest.raises(OnCooldown):
        resolve_attack(config, archer, near)
    spear = put(state, 0, UnitType.SPEARMAN, (2, 2))
    dragon = put(state, 1, UnitType.DRAGON, (3, 3))
    with pytest.raises(TargetUnattackable):
        resolve_attack(config, spear, dragon)


def test_lone_catapult_kills_tower_in_oracle_attack_count(config):
    # independent oracle: simulate the attack arithmetic without the engine
    dmg = math.floor(config.stats(UnitType.CATAPULT).damage
                     * config.multiplier(UnitType.CATAPULT, UnitType.GUARD_TOWER) + 0.5)
    oracle_attacks = math.ceil(config.stats(UnitType.GUARD_TOWER).max_hp / dmg)
    assert oracle_attacks == 4

    state = empty_state()
    cata = put(state, 0, UnitType.CATAPULT, (10, 10))
    tower = put(state, 1, UnitType.GUARD_TOWER, (16, 10))  # outranges the tower
    # issue-time visibility would come from an allied spotter; set the action
    # directly since this exercises the combat loop, not command legality
    engine._set_action(cata, attack(tower.id))
    attacks = 0
    events = step(state)
    for _ in range(2000):
        attacks += sum(1 for e in events if e.kind == "damage" and e.data["attacker"] == cata.id)
        if tower.id not in state.units:
            break
        events = step(state)
    assert tower.id not in state.units
    assert attacks == oracle_attacks
    assert cata.hp == config.stats(UnitType.CATAPULT).max_hp  # tower never reached it


# ── step ──────────────────────────────────────────────────────────────────

def test_mutual_kill_same_tick(config):
    state = empty_state()
    a = put(state, 0, UnitType.SPEARMAN, (10, 10))
    b = put(state, 1, UnitType.SPEARMAN, (11, 10))
    a.hp = 10
    b.hp = 10
    step(state, {0: [(a.id, attack(b.id))], 1: [(b.id, attack(a.id))]})
    assert a.id not in state.units
    assert b.id not in state.units


def test_mining_cycle_and_deposit(config):
    state = empty_state(with_halls=False)
    hall = put(state, 0, UnitType.TOWN_HALL, (5, 5))
    put(state, 1, UnitType.TOWN_HALL, (28, 28))
    peasant = put(state, 0, UnitType.PEASANT, (10, 10))
    from gridrts.core.types import ResourceNode
    node = ResourceNode(id=state.alloc_id(), x=11, y=10, remaining=500)
    state.resources[node.id] = node
    state.resource_at[node.cell] = node.id

    money_before = state.money[0]
    events = run_ticks(state, config.mine_ticks, {0: [(peasant.id, gather(node.id))]})
    mines = [e for e in events if e.kind == "mine"]
    assert len(mines) == 1
    assert node.remaining == 490
    assert peasant.carry == 10

    for _ in range(3000):
        events = step(state)
        if any(e.kind == "deposit" for e in events):
            break
    assert state.money[0] == money_before + 10
    assert peasant.carry == 0


def test_gameover_raised_after_finish(config):
    state = empty_state(with_halls=False)
    put(state, 0, UnitType.TOWN_HALL, (5, 5))
    # player 1 has no hall at all: immediate win for player 0
    step(state)
    assert state.outcome == Outcome.win(0)
    with pytest.raises(GameOver):
        step(state)


def test_draw_at_tick_limit():
    config = BalanceConfig(max_ticks=5)
    state = empty_state(config=config, with_halls=False)
    put(state, 0, UnitType.TOWN_HALL, (5, 5))
    put(state, 1, UnitType.TOWN_HALL, (28, 28))
    events = run_ticks(state, 10)
    assert state.outcome == Outcome.DRAW
    assert any(e.kind == "outcome" and e.data["outcome"] == "draw" for e in events)


def test_simultaneous_base_destruction_is_draw(config):
    state = empty_state(with_halls=False)
    hall_a = put(state, 0, UnitType.TOWN_HALL, (10, 10))
    hall_b = put(state, 1, UnitType.TOWN_HALL, (13, 10))
    hall_a.hp = 1
    hall_b.hp = 1
    cata_a = put(state, 0, UnitType.CATAPULT, (12, 12))
    cata_b = put(state, 1, UnitType.CATAPULT, (11, 12))
    step(state, {0: [(cata_a.id, attack(hall_b.id))],
                 1: [(cata_b.id, attack(hall_a.id))]})
    assert state.outcome == Outcome.DRAW


def test_check_outcome_win_on_hall_loss(config):
    state = empty_state(with_halls=False)
    put(state, 0, UnitType.TOWN_HALL, (5, 5))
    put(state, 1, UnitType.TOWN_HALL, (28, 28))
    assert check_outcome(state) == Outcome.ONGOING
    hall_b = next(u for u in state.units.values() if u.owner == 1)
    del state.units[hall_b.id]
    assert check_outcome(state) == Outcome.win(0)


def test_under_construction_hall_still_counts(config):
    state = empty_state(with_halls=False)
    put(state, 0, UnitType.TOWN_HALL, (5, 5))
    put(state, 1, UnitType.TOWN_HALL, (28, 28), complete=False)
    assert check_outcome(state) == Outcome.ONGOING


def test_training_spawns_unit_after_build_ticks(config):
    state = empty_state(money=1000)
    hall = put(state, 0, UnitType.TOWN_HALL, (10, 10))
    events = run_ticks(state, config.stats(UnitType.PEASANT).build_ticks + 1,
                       {0: [(hall.id, train(UnitType.PEASANT))]})
    spawns = [e for e in events if e.kind == "spawn" and e.data["kind"] == "peasant"]
    assert len(spawns) == 1
    assert hall.producing is None


def test_construction_requires_adjacent_builder(config):
    state = empty_state(money=1000)
    peasant = put(state, 0, UnitType.PEASANT, (10, 10))
    ticks = config.stats(UnitType.BARRACK).build_ticks
    events = run_ticks(state, ticks + 40, {0: [(peasant.id, build(UnitType.BARRACK, (11, 10)))]})
    completes = [e for e in events if e.kind == "complete"]
    assert len(completes) == 1
    barrack = state.units[state.building_at[(11, 10)]]
    assert barrack.complete


def test_move_arrives_and_completes(config):
    state = empty_state()
    cav = put(state, 0, UnitType.CAVALRY, (5, 5))
    run_ticks(state, 500, {0: [(cav.id, move((9, 5)))]})
    assert cav.cell == (9, 5)
    assert cav.current_action.type == ActionType.IDLE
    assert cav.previous_action.type == ActionType.MOVE


def test_step_never_applies_rejected_commands(config):
    state = empty_state()
    spear = put(state, 0, UnitType.SPEARMAN, (10, 10))
    dragon = put(state, 1, UnitType.DRAGON, (11, 10))
    before = state.content_hash()
    events = step(state, {0: [(spear.id, attack(dragon.id))]})
    rejects = [e for e in events if e.kind == "reject"]
    assert len(rejects) == 1
    assert rejects[0].data["reason"] == TARGET_UNATTACKABLE
    # nothing but the tick moved: re-running from scratch with no commands matches
    fresh = empty_state()
    put(fresh, 0, UnitType.SPEARMAN, (10, 10))
    put(fresh, 1, UnitType.DRAGON, (11, 10))

    step(fresh)
    assert state.content_hash() == fresh.content_hash()
    assert before != state.content_hash()  # tick advanced


def test_dragon_crosses_water_ground_unit_stops(config):
    import numpy as np
    water = np.zeros((32, 32), dtype=bool)
    water[:, 15] = True
    state = empty_state(water=water)
    dragon = put(state, 0, UnitType.DRAGON, (10, 10))
    spear = put(state, 0, UnitType.SPEARMAN, (10, 11))
    run_ticks(state, 2000, {0: [(dragon.id, move((20, 10))), (spear.id, move((20, 11)))]})
    assert dragon.cell == (20, 10)
    # the ground unit walks up to the shore, then gives up
    assert spear.cell == (14, 11)
    assert spear.current_action.type == ActionType.IDLE
