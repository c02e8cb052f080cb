from __future__ import annotations

from collections import deque

import numpy as np
import pytest

from gridrts.balance import BalanceConfig
from gridrts.core.engine import _spawn_unit
from gridrts.core.state import GameState
from gridrts.core.types import Cell, UnitType
from gridrts.core.visibility import VisibilityMemory
from gridrts.mapgen import MapGrid, MapParams

SIZE = 32


def flat_grid(spawns=((3, 3), (28, 28)), resources=(), water: np.ndarray | None = None) -> MapGrid:
    if water is None:
        water = np.zeros((SIZE, SIZE), dtype=bool)
    return MapGrid(water, tuple(spawns), list(resources), seed=0, params=MapParams())


@pytest.fixture
def config() -> BalanceConfig:
    return BalanceConfig()


def empty_state(config: BalanceConfig | None = None, water: np.ndarray | None = None,
                money: int = 300, with_halls: bool = True) -> GameState:
    """A bare state on a flat map, for surgical unit placement.

    Corner town halls are included by default so the outcome check stays
    Ongoing; pass with_halls=False for outcome-specific tests.
    """
    config = config or BalanceConfig()
    state = GameState(config=config, grid=flat_grid(water=water), seed=0)
    state.vis = [VisibilityMemory(SIZE), VisibilityMemory(SIZE)]
    state.money = [money, money]
    if with_halls:
        _spawn_unit(state, 0, UnitType.TOWN_HALL, (3, 3), complete=True)
        _spawn_unit(state, 1, UnitType.TOWN_HALL, (28, 28), complete=True)
    return state


def put(state: GameState, owner: int, kind: UnitType, cell: Cell, complete: bool = True):
    return _spawn_unit(state, owner, kind, cell, complete=complete)


# ── independent oracles (pure-python, no scipy) ──────────────────────────

def bfs_distances(water: np.ndarray, start: Cell) -> dict[Cell, int]:
    """8-connected BFS over grass; the pathfinding oracle for tests."""
    h, w = water.shape
    if water[start[1], start[0]]:
        return {}
    dist = {start: 0}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        d = dist[(x, y)]
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and not water[ny, nx] \
                        and (nx, ny) not in dist:
                    dist[(nx, ny)] = d + 1
                    queue.append((nx, ny))
    return dist


def bfs_connected(water: np.ndarray, a: Cell, b: Cell) -> bool:
    return b in bfs_distances(water, a)
