"""Grid pathfinding on the 32x32 map.

Movement is 8-connected; ground units are blocked by water, flying units
ignore terrain.  Instead of storing explicit paths, the engine walks
"downhill" on cached BFS distance fields keyed by destination cell: a field
is computed once (scipy's C implementation) and shared by every unit heading
to that destination, which is what makes chase behaviour cheap.

Shortest-path ties are broken by lexicographic (x, y) order of the next
cell, so paths are reproducible.
"""
from __future__ import annotations

from collections import OrderedDict

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .types import Cell

UNREACHABLE = np.iinfo(np.int32).max

# neighbor offsets in lexicographic (dx, dy) order of the resulting cell
_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def _grid_graph(passable: np.ndarray) -> csr_matrix:
    """8-connected adjacency over passable cells (row-major flat indexing)."""
    h, w = passable.shape
    idx = np.arange(h * w).reshape(h, w)
    flat = passable.ravel()
    rows, cols = [], []
    for dx, dy in _OFFSETS:
        src = idx[max(0, -dy):h - max(0, dy), max(0, -dx):w - max(0, dx)].ravel()
        dst = idx[max(0, dy):h - max(0, -dy), max(0, dx):w - max(0, -dx)].ravel()
        ok = flat[src] & flat[dst]
        rows.append(src[ok])
        cols.append(dst[ok])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    return csr_matrix((np.ones(len(r), np.int8), (r, c)), shape=(h * w, h * w))


class Navigator:
    """Distance-field oracle for one terrain grid.

    ``water`` is a (h, w) bool array.  Fields are cached per destination
    cell with a small LRU; terrain never changes during a game so cached
    fields stay valid.
    """

    def __init__(self, water: np.ndarray, cache_size: int = 128):
        self.water = water
        self.h, self.w = water.shape
        self._graph = _grid_graph(~water)
        self._cache: OrderedDict[Cell, np.ndarray] = OrderedDict()
        self._cache_size = cache_size

    def passable(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.w and 0 <= y < self.h and not self.water[y, x]

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.w and 0 <= cell[1] < self.h

    def field(self, dest: Cell) -> list[int]:
        """Ground-path distance (in steps) from every cell to ``dest``.

        Returned as a flat row-major int list: the engine does many point
        lookups per tick and plain list indexing beats numpy scalar access.
        """
        cached = self._cache.get(dest)
        if cached is not None:
            self._cache.move_to_end(dest)
            return cached
        d = dijkstra(self._graph, unweighted=True, indices=dest[1] * self.w + dest[0],
                     directed=False)
        fld = np.where(np.isinf(d), UNREACHABLE, d).astype(np.int32).tolist()
        self._cache[dest] = fld
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return fld

    def distance(self, a: Cell, b: Cell) -> int:
        """Ground-path steps between two cells; UNREACHABLE if disconnected."""
        return self.field(b)[a[1] * self.w + a[0]]

    def next_step(self, cur: Cell, dest: Cell, flying: bool) -> Cell | None:
        """The next cell on a shortest path cur -> dest, or None if done/stuck."""
        if cur == dest:
            return None
        if flying:
            dx = (dest[0] > cur[0]) - (dest[0] < cur[0])
            dy = (dest[1] > cur[1]) - (dest[1] < cur[1])
            return (cur[0] + dx, cur[1] + dy)
        fld = self.field(dest)
        w = self.w
        here = fld[cur[1] * w + cur[0]]
        if here == UNREACHABLE:
            return None
        best: Cell | None = None
        best_d = here
        for dx, dy in _OFFSETS:
            nx, ny = cur[0] + dx, cur[1] + dy
            if 0 <= nx < w and 0 <= ny < self.h:
                d = fld[ny * w + nx]
                if d < best_d:
                    best_d = d
                    best = (nx, ny)
        return best

    def find_path(self, start: Cell, dest: Cell, flying: bool = False) -> list[Cell] | None:
        """Full shortest path as a cell list excluding ``start``.

        Returns [] when start == dest and None when unreachable.
        """
        if start == dest:
            return []
        if not self.in_bounds(start) or not self.in_bounds(dest):
            return None
        if flying:
            path = []
            cur = start
            while cur != dest:
                cur = self.next_step(cur, dest, flying=True)
                path.append(cur)
            return path
        if self.water[start[1], start[0]] or self.water[dest[1], dest[0]]:
            return None
        if self.distance(start, dest) == UNREACHABLE:
            return None
        path = []
        cur = start
        while cur != dest:
            cur = self.next_step(cur, dest, flying=False)
            if cur is None:  # pragma: no cover - guarded by the distance check
                return None
            path.append(cur)
        return path


def find_path(water: np.ndarray, start: Cell, dest: Cell, flying: bool = False) -> list[Cell] | None:
    """One-shot convenience wrapper around Navigator.find_path."""
    return Navigator(water).find_path(start, dest, flying)
