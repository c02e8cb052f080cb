"""Procedural 32x32 map generation.

Town halls are placed far apart, water is added as random blobs biased
toward the corridor between the bases (bottlenecks), and every blob that
would disconnect the two spawns is rejected outright.  Resource nodes are
placed approximately equidistant from both bases by ground-path distance.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core.pathing import UNREACHABLE, Navigator
from .core.types import Cell

MAP_SIZE = 32
_LABEL_8CONN = np.ones((3, 3), dtype=int)


class InvalidMap(ValueError):
    pass


class GenerationFailed(RuntimeError):
    """No valid layout found within the retry budget; caller should reseed."""


@dataclass(frozen=True)
class MapParams:
    water_fraction: float = 0.15
    n_resources: int = 5
    equidistance_tolerance: int = 4
    min_spawn_distance: int = 16

    def validate(self) -> None:
        if not 0.0 <= self.water_fraction <= 0.35:
            raise InvalidMap(f"water_fraction {self.water_fraction} outside [0, 0.35]")
        if self.n_resources < 1 or self.equidistance_tolerance < 0:
            raise InvalidMap("bad map params")


@dataclass
class MapGrid:
    """Terrain plus spawn and resource placements.

    ``water`` is a (32, 32) bool array indexed [y, x]; grass is ~water.
    """

    water: np.ndarray
    townhall_spawns: tuple[Cell, Cell]
    resource_spawns: list[Cell]
    seed: int = 0
    params: MapParams = field(default_factory=MapParams)

    def __post_init__(self):
        # canonical resource order: row-major; spawn order is player order
        self.resource_spawns = sorted(self.resource_spawns, key=lambda c: (c[1], c[0]))

    @property
    def size(self) -> int:
        return self.water.shape[0]

    def is_grass(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.size and 0 <= y < self.size and not self.water[y, x]

    def validate(self) -> None:
        for spawn in self.townhall_spawns:
            if not self.is_grass(spawn):
                raise InvalidMap(f"town hall spawn {spawn} not on grass")
        if len(set(self.resource_spawns)) != len(self.resource_spawns):
            raise InvalidMap("duplicate resource cells")
        for cell in self.resource_spawns:
            if not self.is_grass(cell):
                raise InvalidMap(f"resource {cell} not on grass")
        if not verify_connectivity(self, *self.townhall_spawns):
            raise InvalidMap("town halls are not ground-connected")

    # ── text serialization: one row per line, {., ~, T, R} ──────────────

    def serialize(self) -> str:
        p = self.params
        a, b = self.townhall_spawns
        header = (
            f"gridmap v1 seed={self.seed} water_fraction={p.water_fraction}"
            f" n_resources={p.n_resources} tolerance={p.equidistance_tolerance}"
            f" min_spawn_distance={p.min_spawn_distance}"
            f" spawns={a[0]},{a[1]};{b[0]},{b[1]}"
        )
        rows = []
        spawns = set(self.townhall_spawns)
        resources = set(self.resource_spawns)
        for y in range(self.size):
            row = []
            for x in range(self.size):
                if (x, y) in spawns:
                    row.append("T")
                elif (x, y) in resources:
                    row.append("R")
                elif self.water[y, x]:
                    row.append("~")
                else:
                    row.append(".")
            rows.append("".join(row))
        return header + "\n" + "\n".join(rows) + "\n"

    @classmethod
    def parse(cls, text: str) -> "MapGrid":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("gridmap v1"):
            raise InvalidMap("missing gridmap header")
        header = dict(re.findall(r"(\w+)=(\S+)", lines[0]))
        params = MapParams(
            water_fraction=float(header.get("water_fraction", 0.15)),
            n_resources=int(header.get("n_resources", 5)),
            equidistance_tolerance=int(header.get("tolerance", 4)),
            min_spawn_distance=int(header.get("min_spawn_distance", 16)),
        )
        grid_lines = lines[1:]
        size = len(grid_lines)
        water = np.zeros((size, size), dtype=bool)
        spawns: list[Cell] = []
        resources: list[Cell] = []
        for y, row in enumerate(grid_lines):
            if len(row) != size:
                raise InvalidMap(f"row {y} has length {len(row)}, expected {size}")
            for x, ch in enumerate(row):
                if ch == "~":
                    water[y, x] = True
                elif ch == "T":
                    spawns.append((x, y))
                elif ch == "R":
                    resources.append((x, y))
                elif ch != ".":
                    raise InvalidMap(f"unknown terrain character {ch!r}")
        if len(spawns) != 2:
            raise InvalidMap(f"expected 2 town hall spawns, found {len(spawns)}")
        if "spawns" in header:  # authoritative player order
            a, b = header["spawns"].split(";")
            ordered = (tuple(map(int, a.split(","))), tuple(map(int, b.split(","))))
            if set(ordered) != set(spawns):
                raise InvalidMap("header spawn order disagrees with grid")
            spawns = list(ordered)
        grid = cls(water, (spawns[0], spawns[1]), resources,
                   seed=int(header.get("seed", 0)), params=params)
        grid.validate()
        return grid


def verify_connectivity(grid: MapGrid, a: Cell, b: Cell) -> bool:
    """True iff an 8-connected grass path joins a and b."""
    if not grid.is_grass(a) or not grid.is_grass(b):
        return False
    if a == b:
        return True
    labels, _ = ndimage.label(~grid.water, structure=_LABEL_8CONN)
    return labels[a[1], a[0]] == labels[b[1], b[0]]


def generate_map(seed: int, params: MapParams | None = None, max_attempts: int = 25) -> MapGrid:
    params = params or MapParams()
    params.validate()
    rng = random.Random(seed)
    for _ in range(max_attempts):
        grid = _attempt(rng, seed, params)
        if grid is not None:
            return grid
    raise GenerationFailed(f"no valid map for seed {seed} in {max_attempts} attempts")


def _attempt(rng: random.Random, seed: int, params: MapParams) -> MapGrid | None:
    size = MAP_SIZE
    water = np.zeros((size, size), dtype=bool)

    spawns = _place_spawns(rng, size, params.min_spawn_distance)
    if spawns is None:
        return None
    a, b = spawns

    # 3x3 around each spawn stays grass: keeps halls buildable around and
    # guarantees they are never fully ringed by water.
    protected = np.zeros((size, size), dtype=bool)
    for sx, sy in (a, b):
        protected[max(0, sy - 1):sy + 2, max(0, sx - 1):sx + 2] = True

    target_water = int(params.water_fraction * size * size)
    for _ in range(rng.randint(2, 6)):
        if water.sum() >= target_water:
            break
        blob = _random_blob(rng, size, a, b)
        blob &= ~protected
        if not blob.any():
            continue
        trial = water | blob
        labels, _ = ndimage.label(~trial, structure=_LABEL_8CONN)
        if labels[a[1], a[0]] != labels[b[1], b[0]]:
            continue  # reject: blob would disconnect the spawns
        water = trial

    nav = Navigator(water)
    d1 = nav.field(a)
    d2 = nav.field(b)
    candidates = [
        (x, y)
        for y in range(size)
        for x in range(size)
        if not water[y, x]
        and d1[y * size + x] != UNREACHABLE
        and d2[y * size + x] != UNREACHABLE
        and abs(d1[y * size + x] - d2[y * size + x]) <= params.equidistance_tolerance
        and min(d1[y * size + x], d2[y * size + x]) >= 3
    ]
    if len(candidates) < params.n_resources:
        return None
    resources = rng.sample(candidates, params.n_resources)

    grid = MapGrid(water, (a, b), resources, seed=seed, params=params)
    grid.validate()
    return grid


def _place_spawns(rng: random.Random, size: int, min_distance: int) -> tuple[Cell, Cell] | None:
    for _ in range(100):
        ax, ay = rng.randint(2, size - 3), rng.randint(2, size - 3)
        bx, by = rng.randint(2, size - 3), rng.randint(2, size - 3)
        if max(abs(ax - bx), abs(ay - by)) >= min_distance:
            return (ax, ay), (bx, by)
    return None


def _random_blob(rng: random.Random, size: int, a: Cell, b: Cell) -> np.ndarray:
    """Rectangular or elliptical water blob biased toward the base-to-base corridor."""
    t = rng.uniform(0.25, 0.75)
    cx = a[0] + t * (b[0] - a[0]) + rng.uniform(-6, 6)
    cy = a[1] + t * (b[1] - a[1]) + rng.uniform(-6, 6)
    rx = rng.randint(1, 5)
    ry = rng.randint(1, 5)
    ys, xs = np.mgrid[0:size, 0:size]
    if rng.random() < 0.5:
        blob = (np.abs(xs - cx) <= rx) & (np.abs(ys - cy) <= ry)
    else:
        blob = ((xs - cx) / (rx + 0.5)) ** 2 + ((ys - cy) / (ry + 0.5)) ** 2 <= 1.0
    return blob
