from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from gridrts.core.pathing import UNREACHABLE, Navigator, find_path

from .conftest import SIZE, bfs_distances


def empty_water():
    return np.zeros((SIZE, SIZE), dtype=bool)


def test_path_length_matches_chebyshev_on_empty_map():
    # oracle: BFS on the empty grid gives Chebyshev distance 5 for (0,0)->(5,3)
    assert bfs_distances(empty_water(), (0, 0))[(5, 3)] == 5
    path = find_path(empty_water(), (0, 0), (5, 3))
    assert path is not None
    assert len(path) == 5
    assert path[-1] == (5, 3)


def test_same_cell_gives_empty_path():
    assert find_path(empty_water(), (4, 4), (4, 4)) == []


def test_water_wall_disconnects_ground_but_not_flying():
    water = empty_water()
    water[:, 16] = True  # full vertical channel
    assert find_path(water, (2, 2), (30, 2)) is None
    flight = find_path(water, (2, 2), (30, 2), flying=True)
    assert flight is not None
    assert len(flight) == 28


def test_path_avoids_water_and_steps_are_adjacent():
    water = empty_water()
    water[5:20, 10] = True
    path = find_path(water, (2, 10), (20, 10))
    assert path is not None
    cur = (2, 10)
    for cell in path:
        assert max(abs(cell[0] - cur[0]), abs(cell[1] - cur[1])) == 1
        assert not water[cell[1], cell[0]]
        cur = cell
    assert cur == (20, 10)
    assert len(path) == bfs_distances(water, (2, 10))[(20, 10)]


def test_tie_break_is_lexicographic():
    nav = Navigator(empty_water())
    # from (5,5) to (5,1): straight north; every column step ties on distance,
    # lexicographic order picks the smallest (x, y) neighbor.
    step = nav.next_step((5, 5), (5, 1), flying=False)
    assert step == (4, 4)


def test_distance_unreachable_value():
    water = empty_water()
    water[0:3, 0:3] = True
    water[0, 0] = False  # grass island at origin
    nav = Navigator(water)
    assert nav.distance((0, 0), (10, 10)) == UNREACHABLE


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 30), st.integers(0, 30),
       st.integers(0, 30), st.integers(0, 30))
def test_path_length_equals_bfs_oracle(seed, ax, ay, bx, by):
    rng = np.random.default_rng(seed)
    water = rng.random((SIZE, SIZE)) < 0.25
    water[ay, ax] = False
    water[by, bx] = False
    oracle = bfs_distances(water, (ax, ay))
    path = find_path(water, (ax, ay), (bx, by))
    if (bx, by) not in oracle:
        assert path is None
    else:
        assert path is not None
        assert len(path) == oracle[(bx, by)]
