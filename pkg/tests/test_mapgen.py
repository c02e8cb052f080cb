from __future__ import annotations

import numpy as np
import pytest

from gridrts.mapgen import (
    MAP_SIZE, GenerationFailed, InvalidMap, MapGrid, MapParams, generate_map,
    verify_connectivity,
)

from .conftest import bfs_connected, bfs_distances


def test_same_seed_same_map():
    a = generate_map(7)
    b = generate_map(7)
    assert np.array_equal(a.water, b.water)
    assert a.townhall_spawns == b.townhall_spawns
    assert a.resource_spawns == b.resource_spawns


def test_generated_maps_are_connected_and_fair():
    for seed in range(50):
        grid = generate_map(seed)
        a, b = grid.townhall_spawns
        # oracle flood fill, independent of the scipy-backed implementation
        assert bfs_connected(grid.water, a, b)
        d1 = bfs_distances(grid.water, a)
        d2 = bfs_distances(grid.water, b)
        for cell in grid.resource_spawns:
            assert cell in d1 and cell in d2
            assert abs(d1[cell] - d2[cell]) <= grid.params.equidistance_tolerance


def test_spawns_are_far_apart_and_not_water_ringed():
    for seed in range(30):
        grid = generate_map(seed)
        a, b = grid.townhall_spawns
        assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) >= grid.params.min_spawn_distance
        for sx, sy in (a, b):
            neighbors = [
                (sx + dx, sy + dy)
                for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0)
            ]
            assert any(grid.is_grass(c) for c in neighbors)


def test_zero_water_fraction_gives_all_grass():
    grid = generate_map(3, MapParams(water_fraction=0.0))
    assert not grid.water.any()
    assert verify_connectivity(grid, *grid.townhall_spawns)


def test_resource_cells_distinct():
    grid = generate_map(11)
    assert len(set(grid.resource_spawns)) == len(grid.resource_spawns)
    assert len(grid.resource_spawns) == grid.params.n_resources


def test_serialization_round_trip():
    grid = generate_map(42)
    text = grid.serialize()
    back = MapGrid.parse(text)
    assert np.array_equal(back.water, grid.water)
    assert back.townhall_spawns == grid.townhall_spawns
    assert sorted(back.resource_spawns) == sorted(grid.resource_spawns)
    assert back.seed == grid.seed
    assert back.params == grid.params


def test_parse_rejects_missing_spawn():
    grid = generate_map(1)
    text = grid.serialize().replace("T", ".", 1)
    with pytest.raises(InvalidMap):
        MapGrid.parse(text)


def test_params_out_of_range_rejected():
    with pytest.raises(InvalidMap):
        generate_map(1, MapParams(water_fraction=0.6))


def test_connectivity_same_cell_and_enclosed():
    water = np.zeros((MAP_SIZE, MAP_SIZE), dtype=bool)
    grid = MapGrid(water.copy(), ((3, 3), (28, 28)), [])
    assert verify_connectivity(grid, (5, 5), (5, 5))
    ring = water.copy()
    ring[9:12, 9] = True
    ring[9:12, 11] = True
    ring[9, 9:12] = True
    ring[11, 9:12] = True
    enclosed = MapGrid(ring, ((3, 3), (28, 28)), [])
    assert not verify_connectivity(enclosed, (3, 3), (10, 10))


def test_generation_failed_is_raised_for_impossible_params():
    # 32x32 map cannot hold 2000 distinct resource cells
    with pytest.raises(GenerationFailed):
        generate_map(5, MapParams(n_resources=2000))
