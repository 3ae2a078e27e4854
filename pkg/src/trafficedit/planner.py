"""Way-point path planning on the labeled grid.

User paths are planned segment by segment between consecutive way-point
cells with A*. The heuristic adds a label bias to the Euclidean
distance::

    h(n) = |n - n_goal| + mu_a * exp(mu_b * label(n))

With the defaults mu_a = 20, mu_b = -1.5, a lane-center cell (label 2)
is cheaper to expand than a plain drivable cell (label 1), so searches
hug lane centers where possible. The bias makes the heuristic
inadmissible on purpose; paths may be slightly longer than the
Euclidean optimum but follow drivable structure.

Raw cell paths are post-processed into a spline reference path:
down-sampling, Gaussian smoothing with fixed endpoints, then cubic
spline interpolation.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from trafficedit.frenet import RefPath, make_path
from trafficedit.scene import DRIVABLE, UNREACHABLE, GridMap

MU_A = 20.0
MU_B = -1.5

DOWNSAMPLE_SPACING = 2.0  # meters between kept cell centers
SMOOTH_SIGMA = 2.0        # Gaussian kernel sigma, in samples
SMOOTH_WINDOW = 5         # kernel support, in samples


class PlanningError(Exception):
    """No drivable route, or the smoothed path leaves the drivable area."""


@dataclass
class PlanRequest:
    waypoints: list  # ordered 2D points, length >= 2
    mu_a: float = MU_A
    mu_b: float = MU_B


_STEPS = [
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
]


def heuristic_bias(mu_a: float, mu_b: float, label: int) -> float:
    return mu_a * math.exp(mu_b * label)


def _astar_segment(grid: GridMap, start, goal, mu_a, mu_b):
    """A* from start cell to goal cell over drivable cells."""
    res = grid.resolution
    cells = grid.cells
    goal_center = grid.cell_to_world(goal)

    def h(rc):
        p = grid.cell_to_world(rc)
        return float(np.hypot(*(p - goal_center))) + heuristic_bias(mu_a, mu_b, int(cells[rc]))

    # Heap entries (f, g, row, col) keep tie-breaking deterministic.
    open_heap = [(h(start), 0.0, start[0], start[1])]
    came_from = {}
    g_score = {start: 0.0}
    closed = set()

    while open_heap:
        _, g, r, c = heapq.heappop(open_heap)
        current = (r, c)
        if current in closed:
            continue
        closed.add(current)
        if current == goal:
            path = [current]
            while path[-1] != start:
                path.append(came_from[path[-1]])
            path.reverse()
            return path
        for dr, dc in _STEPS:
            nr, nc = r + dr, c + dc
            nxt = (nr, nc)
            if not grid.in_grid(nxt) or cells[nxt] == UNREACHABLE or nxt in closed:
                continue
            if dr != 0 and dc != 0:
                # No corner cutting: a diagonal move is blocked when both
                # orthogonal neighbors are unreachable.
                if cells[r + dr, c] == UNREACHABLE and cells[r, c + dc] == UNREACHABLE:
                    continue
            step = res * math.sqrt(2.0) if dr != 0 and dc != 0 else res
            tentative = g + step
            if tentative < g_score.get(nxt, math.inf):
                g_score[nxt] = tentative
                came_from[nxt] = current
                heapq.heappush(open_heap, (tentative + h(nxt), tentative, nr, nc))
    return None


def plan_grid_path(grid: GridMap, req: PlanRequest) -> list:
    """Plan a cell path through the request way-points.

    Returns the concatenated per-segment A* cell lists. Raises
    PlanningError when a way-point is off the drivable area or a segment
    has no route; the message names the failing segment.
    """
    if len(req.waypoints) < 2:
        raise PlanningError("need at least 2 waypoints")
    cells = []
    for i, wp in enumerate(req.waypoints):
        rc = grid.world_to_cell(wp)
        if not grid.in_grid(rc) or grid.cells[rc] < DRIVABLE:
            raise PlanningError(f"waypoint {i} at {tuple(wp)} is not on a drivable cell")
        cells.append(rc)

    full = [cells[0]]
    for i in range(len(cells) - 1):
        seg = _astar_segment(grid, cells[i], cells[i + 1], req.mu_a, req.mu_b)
        if seg is None:
            raise PlanningError(f"no drivable route for segment {i} ({cells[i]} -> {cells[i + 1]})")
        full.extend(seg[1:])
    return full


def _downsample(points: np.ndarray, spacing: float) -> np.ndarray:
    kept = [points[0]]
    acc = 0.0
    for prev, cur in zip(points[:-1], points[1:]):
        acc += float(np.hypot(*(cur - prev)))
        if acc >= spacing:
            kept.append(cur)
            acc = 0.0
    if not np.array_equal(kept[-1], points[-1]):
        kept.append(points[-1])
    if len(kept) < 2:
        kept = [points[0], points[-1]]
    return np.asarray(kept)


def _gaussian_smooth(points: np.ndarray, sigma: float, window: int) -> np.ndarray:
    if len(points) <= 2:
        return points.copy()
    half = window // 2
    offsets = np.arange(-half, half + 1)
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    out = points.copy()
    for i in range(1, len(points) - 1):
        lo = max(i - half, 0)
        hi = min(i + half, len(points) - 1)
        w = kernel[(lo - i) + half : (hi - i) + half + 1]
        out[i] = (points[lo : hi + 1] * w[:, None]).sum(axis=0) / w.sum()
    return out


def smooth_and_fit(cells: list, grid: GridMap) -> RefPath:
    """Turn a raw cell path into a drivable spline reference path.

    Raises PlanningError when fewer than 2 cells are given or the
    smoothed spline leaves the drivable area (message carries the first
    offending arc length).
    """
    if len(cells) < 2:
        raise PlanningError("need at least 2 cells to fit a path")
    centers = np.asarray([grid.cell_to_world(rc) for rc in cells])
    sampled = _downsample(centers, DOWNSAMPLE_SPACING)
    smoothed = _gaussian_smooth(sampled, SMOOTH_SIGMA, SMOOTH_WINDOW)
    path = make_path(smoothed, source="user")

    s_checks = np.arange(0.0, path.length + 1e-9, grid.resolution)
    for s in s_checks:
        if grid.label_at(path.point(float(s))) < DRIVABLE:
            raise PlanningError(f"smoothed path leaves the drivable area at s={float(s):.2f} m")
    return path


@dataclass
class PathRegistry:
    """All reference paths available to vehicles: topology plus user paths."""

    paths: dict[str, RefPath] = field(default_factory=dict)
    _counters: dict[str, int] = field(default_factory=dict)

    def _next_id(self, source: str) -> str:
        n = self._counters.get(source, 0)
        self._counters[source] = n + 1
        return f"{source}-{n}"

    def register(self, path: RefPath) -> str:
        """Add a path and return its fresh id."""
        pid = self._next_id(path.source or "user")
        path.id = pid
        self.paths[pid] = path
        return pid

    def get(self, path_id: str) -> RefPath:
        return self.paths[path_id]

    def ids(self, source: str | None = None) -> list[str]:
        if source is None:
            return sorted(self.paths)
        return sorted(pid for pid, p in self.paths.items() if p.source == source)


def register_user_path(registry: PathRegistry, path: RefPath) -> str:
    """Register a planned path; topology paths are unaffected."""
    path.source = "user"
    return registry.register(path)
