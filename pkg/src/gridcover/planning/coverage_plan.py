"""Per-region coverage plans: boundary waypoints, greedy ordering, inward spiral, BFS glue."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gridcover.core.logging import get_logger
from gridcover.core.models import Action
from gridcover.planning.routing import bfs_distances, path_to_actions, route_preferring
from gridcover.planning.voronoi import VoronoiPartition, chebyshev
from gridcover.sim.terrain import Cell, footprint_bounds, neighbors

logger = get_logger(__name__)


@dataclass
class BoundaryGraph:
    """Waypoints near a region's edge plus its centroid.

    ``distances[a, b]`` is the BFS step count between waypoints over Free
    cells (``inf`` when unreachable).
    """

    waypoints: list[Cell]
    distances: np.ndarray
    free: np.ndarray

    def __len__(self) -> int:
        return len(self.waypoints)

    def is_connected(self) -> bool:
        return bool(np.isfinite(self.distances).all())


@dataclass
class CoveragePlan:
    agent_id: int
    waypoints: list[Cell] = field(default_factory=list)
    path: list[Cell] = field(default_factory=list)

    @property
    def actions(self) -> list[Action]:
        return path_to_actions(self.path)


def _cells(mask: np.ndarray) -> list[Cell]:
    rows, cols = np.nonzero(mask)
    return list(zip(rows.tolist(), cols.tolist(), strict=True))


def _perimeter(region: np.ndarray) -> np.ndarray:
    """Region cells with a 4-neighbour outside the region or off the map."""
    padded = np.pad(region, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return region & ~interior


def region_centroid(region: np.ndarray, free: np.ndarray) -> Cell | None:
    """The Free region cell closest (Chebyshev, then row-major) to the region's mean cell."""
    candidates = _cells(region & free)
    if not candidates:
        return None
    rows, cols = np.nonzero(region)
    mean = (float(rows.mean()), float(cols.mean()))
    return min(
        candidates,
        key=lambda c: (max(abs(c[0] - mean[0]), abs(c[1] - mean[1])), c),
    )


def build_boundary_graph(
    partition: VoronoiPartition, agent_id: int, sensor_k: int
) -> BoundaryGraph:
    """Perimeter waypoints thinned to Chebyshev spacing ``sensor_k``, plus the centroid.

    Perimeter cells are walked by angle around the centroid; a cell is kept
    when it lies at least ``sensor_k`` from every kept cell, so neighbouring
    footprints tile the boundary.
    """
    region = partition.region(agent_id)
    free = partition.terrain.free
    centroid = region_centroid(region, free)
    if centroid is None:
        return BoundaryGraph([], np.zeros((0, 0)), free)

    perimeter = _cells(_perimeter(region) & free)
    perimeter.sort(key=lambda c: (math.atan2(c[0] - centroid[0], c[1] - centroid[1]), c))
    kept: list[Cell] = []
    for cell in perimeter:
        if all(chebyshev(cell, other) >= sensor_k for other in kept):
            kept.append(cell)
    waypoints = [w for w in kept if w != centroid] + [centroid]

    distances = np.full((len(waypoints), len(waypoints)), np.inf)
    for a, source in enumerate(waypoints):
        dist = bfs_distances(free, source)
        for b, target in enumerate(waypoints):
            if dist[target] >= 0:
                distances[a, b] = float(dist[target])
    return BoundaryGraph(waypoints, distances, free)


def _uncovered_in_footprint(coverage: np.ndarray, cell: Cell, k: int, scope: np.ndarray) -> int:
    r0, r1, c0, c1 = footprint_bounds(cell, k, coverage.shape[0])
    return int((~coverage[r0:r1, c0:c1] & scope[r0:r1, c0:c1]).sum())


def greedy_visit_order(
    graph: BoundaryGraph,
    start: Cell,
    coverage: np.ndarray,
    sensor_k: int,
    scope: np.ndarray | None = None,
) -> list[Cell]:
    """Visit order maximising newly covered cells at each pick.

    Ties go to the shorter BFS distance from the current cell, then the lower
    row-major cell index.  Only cells in ``scope`` (default: all) count as
    worth covering.
    """
    size = coverage.shape[0]
    covered = coverage.copy()
    scope = np.ones_like(coverage) if scope is None else scope
    remaining = list(graph.waypoints)
    order: list[Cell] = []
    current = start
    while remaining:
        dist = bfs_distances(graph.free, current)

        def rank(cell: Cell, dist: np.ndarray = dist) -> tuple[int, float, int]:
            steps = float(dist[cell]) if dist[cell] >= 0 else math.inf
            gain = _uncovered_in_footprint(covered, cell, sensor_k, scope)
            return (-gain, steps, cell[0] * size + cell[1])

        best = min(remaining, key=rank)
        remaining.remove(best)
        order.append(best)
        r0, r1, c0, c1 = footprint_bounds(best, sensor_k, size)
        covered[r0:r1, c0:c1] = True
        current = best
    return order


def _lanes(lo: int, hi: int, k: int) -> list[int]:
    """Lane centres at spacing k whose half-width footprints tile [lo, hi]."""
    half = k // 2
    lanes: list[int] = []
    centre = lo + half
    while True:
        clamped = min(centre, hi)
        if not lanes or lanes[-1] != clamped:
            lanes.append(clamped)
        if clamped + half >= hi:
            return lanes
        centre += k


def _spiral_indices(n_rows: int, n_cols: int) -> list[tuple[int, int]]:
    """Clockwise inward spiral over an n_rows×n_cols lattice, from (0, 0)."""
    order: list[tuple[int, int]] = []
    top, bottom, left, right = 0, n_rows - 1, 0, n_cols - 1
    while top <= bottom and left <= right:
        order.extend((top, c) for c in range(left, right + 1))
        order.extend((r, right) for r in range(top + 1, bottom + 1))
        if top < bottom:
            order.extend((bottom, c) for c in range(right - 1, left - 1, -1))
        if left < right:
            order.extend((r, left) for r in range(bottom - 1, top, -1))
        top, bottom, left, right = top + 1, bottom - 1, left + 1, right - 1
    return order


def _snap(cell: Cell, targets: np.ndarray, radius: int) -> Cell | None:
    """Nearest ``targets`` cell within Chebyshev ``radius`` of ``cell``."""
    size = targets.shape[0]
    r, c = cell
    best: tuple[int, Cell] | None = None
    for rr in range(max(r - radius, 0), min(r + radius + 1, size)):
        for cc in range(max(c - radius, 0), min(c + radius + 1, size)):
            if targets[rr, cc]:
                key = (chebyshev(cell, (rr, cc)), (rr, cc))
                if best is None or key < best:
                    best = key
    return None if best is None else best[1]


def spiral_sweep(
    region: np.ndarray,
    sensor_k: int,
    entry: Cell,
    free: np.ndarray | None = None,
) -> list[Cell]:
    """Inward rectangular spiral over the region's bounding box, lanes ``sensor_k`` apart.

    The spiral starts at the lattice corner nearest ``entry`` and ends near
    the centre.  Lattice points off the region (or on obstacles) snap to the
    nearest standable region cell within half a footprint; a final pass adds
    waypoints until every region cell lies in some footprint.
    """
    size = region.shape[0]
    free = np.ones_like(region) if free is None else free
    standable = region & free
    rows, cols = np.nonzero(region)
    if rows.size == 0:
        return []
    half = sensor_k // 2

    row_lanes = _lanes(int(rows.min()), int(rows.max()), sensor_k)
    col_lanes = _lanes(int(cols.min()), int(cols.max()), sensor_k)
    # orient the lattice so the spiral starts at the corner nearest the entry
    if abs(entry[0] - row_lanes[-1]) < abs(entry[0] - row_lanes[0]):
        row_lanes.reverse()
    if abs(entry[1] - col_lanes[-1]) < abs(entry[1] - col_lanes[0]):
        col_lanes.reverse()

    waypoints: list[Cell] = []
    seen: set[Cell] = set()
    for a, b in _spiral_indices(len(row_lanes), len(col_lanes)):
        point = (row_lanes[a], col_lanes[b])
        cell = point if standable[point] else _snap(point, standable, half)
        if cell is not None and cell not in seen:
            seen.add(cell)
            waypoints.append(cell)

    covered = np.zeros_like(region)
    for cell in waypoints:
        r0, r1, c0, c1 = footprint_bounds(cell, sensor_k, size)
        covered[r0:r1, c0:c1] = True
    for cell in _cells(region & ~covered):
        if covered[cell]:
            continue
        fix = _snap(cell, standable, half) or _snap(cell, free, half)
        if fix is None:
            continue
        if fix not in seen:
            seen.add(fix)
            waypoints.append(fix)
        r0, r1, c0, c1 = footprint_bounds(fix, sensor_k, size)
        covered[r0:r1, c0:c1] = True
    return waypoints


def plan_region(
    partition: VoronoiPartition,
    agent_id: int,
    sensor_k: int,
    coverage: np.ndarray,
) -> CoveragePlan:
    """Greedy boundary tour, then spiral, joined by BFS detours.

    Waypoints whose footprint would add no region coverage when reached are
    dropped.  Routes stay inside the region when they can.
    """
    start = partition.seeds[agent_id]
    region = partition.region(agent_id)
    free = partition.terrain.free
    size = partition.terrain.size
    graph = build_boundary_graph(partition, agent_id, sensor_k)
    boundary = greedy_visit_order(graph, start, coverage, sensor_k, scope=region)
    entry = boundary[-1] if boundary else start
    candidates = boundary + spiral_sweep(region, sensor_k, entry, free)

    covered = coverage.copy()
    plan = CoveragePlan(agent_id=agent_id, path=[start])

    def sense(cell: Cell) -> None:
        r0, r1, c0, c1 = footprint_bounds(cell, sensor_k, size)
        covered[r0:r1, c0:c1] = True

    sense(start)
    for waypoint in candidates:
        if _uncovered_in_footprint(covered, waypoint, sensor_k, region) == 0:
            continue
        leg = route_preferring(free, region, plan.path[-1], waypoint)
        for cell in leg[1:]:
            plan.path.append(cell)
            sense(cell)
        plan.waypoints.append(waypoint)
    logger.debug(
        "region_planned",
        agent=agent_id,
        region_cells=int(region.sum()),
        waypoints=len(plan.waypoints),
        steps=len(plan.path) - 1,
    )
    return plan


def path_is_safe(path: list[Cell], free: np.ndarray) -> bool:
    """Every cell Free and consecutive cells 8-adjacent."""
    size = free.shape[0]
    if not all(free[c] for c in path):
        return False
    return all(b in set(neighbors(a, size)) for a, b in zip(path[:-1], path[1:], strict=True))
