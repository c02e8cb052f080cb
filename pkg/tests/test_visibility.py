from __future__ import annotations

import numpy as np

from gridrts.core.engine import compute_visibility, new_game, step
from gridrts.core.types import ActionRecord, ActionType, UnitType
from gridrts.core.visibility import INVISIBLE, SEEN, VISIBLE

from .conftest import empty_state, flat_grid, put


def test_initial_visibility_is_local(config):
    state = new_game(config, flat_grid(spawns=((5, 5), (26, 26))), seed=1)
    grid, _ = compute_visibility(state, 0)
    assert grid[5, 5] == VISIBLE
    assert grid[26, 26] == INVISIBLE
    # sight radius 4 around the base cluster; far cells untouched
    assert grid[5, 12] == INVISIBLE
    assert (grid == SEEN).sum() == 0


def test_visible_to_seen_never_back_to_invisible(config):
    state = empty_state()
    scout = put(state, 0, UnitType.PEASANT, (10, 10))
    probe = (10, 10)
    grid, _ = compute_visibility(state, 0)
    assert grid[probe[1], probe[0]] == VISIBLE
    step(state, {0: [(scout.id, ActionRecord(ActionType.MOVE, cell=(20, 10)))]})
    for _ in range(2500):
        step(state)
        if scout.cell == (20, 10):
            break
    grid, _ = compute_visibility(state, 0)
    assert grid[probe[1], probe[0]] == SEEN
    assert grid[10, 20] == VISIBLE


def test_hidden_enemy_keeps_last_seen_hp(config):
    state = empty_state()
    watcher = put(state, 0, UnitType.PEASANT, (10, 10))
    enemy = put(state, 1, UnitType.SPEARMAN, (12, 10))
    step(state)
    _, snaps = compute_visibility(state, 0)
    assert snaps[enemy.id].hp == 80

    # move our watcher far away, then hurt the enemy while unobserved
    step(state, {0: [(watcher.id, ActionRecord(ActionType.MOVE, cell=(3, 3)))]})
    for _ in range(3000):
        step(state)
        if watcher.cell == (3, 3):
            break
    enemy.hp = 20
    step(state)
    _, snaps = compute_visibility(state, 0)
    assert snaps[enemy.id].hp == 80  # memory, not truth


def test_snapshot_dropped_when_spot_seen_empty(config):
    state = empty_state()
    put(state, 0, UnitType.PEASANT, (10, 10))
    enemy = put(state, 1, UnitType.CAVALRY, (13, 10))
    step(state)
    assert enemy.id in state.vis[0].snapshots

    # enemy teleports away while we keep watching its old cell
    old = enemy.cell
    enemy.x_fp = 28 * 256 + 128
    enemy.y_fp = 5 * 256 + 128
    state.vis[1].move_stamp(old, enemy.cell, config.stats(enemy.kind).sight)
    step(state)
    assert enemy.id not in state.vis[0].snapshots


def test_fog_counters_balance_on_death(config):
    state = empty_state()
    a = put(state, 0, UnitType.SPEARMAN, (10, 10))
    b = put(state, 1, UnitType.SPEARMAN, (11, 10))
    a.hp = 5
    b.hp = 5
    step(state, {0: [(a.id, ActionRecord(ActionType.ATTACK, target_id=b.id))],
                 1: [(b.id, ActionRecord(ActionType.ATTACK, target_id=a.id))]})
    # both dead; counters must return to the hall-only stamps (no negatives)
    assert min(state.vis[0].counters) >= 0
    assert min(state.vis[1].counters) >= 0


def test_enemy_in_invisible_cell_not_in_snapshots(config):
    state = empty_state()
    put(state, 0, UnitType.PEASANT, (10, 10))
    hidden = put(state, 1, UnitType.DRAGON, (20, 20))
    step(state)
    assert hidden.id not in state.vis[0].snapshots
