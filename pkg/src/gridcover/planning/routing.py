"""Breadth-first routing over Free cells with a fixed expansion order."""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence

import numpy as np

from gridcover.core.exceptions import NoPathError
from gridcover.core.models import Action
from gridcover.sim.terrain import Cell, TerrainGrid, neighbors

Grid = TerrainGrid | np.ndarray


def _passable(grid: Grid) -> np.ndarray:
    """Free-cell mask of a terrain, or the mask itself."""
    return grid.free if isinstance(grid, TerrainGrid) else grid


def bfs_distances(grid: Grid, source: Cell) -> np.ndarray:
    """Step counts from ``source`` to every passable cell; −1 where unreachable."""
    passable = _passable(grid)
    size = passable.shape[0]
    dist = np.full(passable.shape, -1, dtype=np.int64)
    if not passable[source]:
        return dist
    dist[source] = 0
    queue: deque[Cell] = deque([source])
    while queue:
        cell = queue.popleft()
        for nxt in neighbors(cell, size):
            if passable[nxt] and dist[nxt] < 0:
                dist[nxt] = dist[cell] + 1
                queue.append(nxt)
    return dist


def bfs_route(grid: Grid, start: Cell, goal: Cell) -> list[Cell]:
    """Shortest 8-connected path [start, ..., goal] expanding N, NE, E, SE, S, SW, W, NW.

    Raises:
        NoPathError: ``goal`` is unreachable from ``start``.
    """
    passable = _passable(grid)
    if start == goal:
        return [start]
    size = passable.shape[0]
    if not (passable[start] and passable[goal]):
        raise NoPathError(f"Endpoints {start} -> {goal} must both be passable")
    parent: dict[Cell, Cell] = {start: start}
    queue: deque[Cell] = deque([start])
    while queue:
        cell = queue.popleft()
        for nxt in neighbors(cell, size):
            if passable[nxt] and nxt not in parent:
                parent[nxt] = cell
                if nxt == goal:
                    return _unwind(parent, start, goal)
                queue.append(nxt)
    raise NoPathError(f"No path from {start} to {goal}")


def _unwind(parent: dict[Cell, Cell], start: Cell, goal: Cell) -> list[Cell]:
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def route_preferring(free: np.ndarray, region: np.ndarray, start: Cell, goal: Cell) -> list[Cell]:
    """Route inside ``region`` when possible, otherwise anywhere on ``free``."""
    inside = free & region
    inside[start] = inside[goal] = True
    try:
        return bfs_route(inside, start, goal)
    except NoPathError:
        return bfs_route(free, start, goal)


def path_to_actions(path: Sequence[Cell]) -> list[Action]:
    """Movement actions that walk ``path``; repeated cells are skipped."""
    actions: list[Action] = []
    for a, b in zip(path[:-1], path[1:], strict=True):
        if a == b:
            continue
        actions.append(Action.from_delta(b[0] - a[0], b[1] - a[1]))
    return actions
