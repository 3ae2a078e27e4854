"""Static scene: lane network, scenario files, and the labeled occupancy grid.

Scenario files are JSON with two top-level keys::

    {
      "meta": {"name": "...", "grid_resolution": 0.5},
      "lanes": [
        {"id": "L0", "width": 3.5,
         "centerline": [[x, y], ...],
         "successors": ["L1", ...]},
        ...
      ]
    }

All geometry is in meters. Lane predecessors are derived from the
successor lists. The grid map labels every cell as 0 (unreachable),
1 (drivable) or 2 (lane center); lanes are rasterized segment by
segment as capsules (rectangle plus end half-discs) of the lane width.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class ScenarioError(Exception):
    """Malformed or inconsistent scenario input."""


UNREACHABLE = 0
DRIVABLE = 1
LANE_CENTER = 2

# Neighbor query window, in grid cells per side.
NEIGHBOR_WINDOW = 100


@dataclass
class Lane:
    id: str
    centerline: np.ndarray  # (N, 2)
    width: float
    successors: list[str] = field(default_factory=list)
    predecessors: list[str] = field(default_factory=list)


@dataclass
class LaneNetwork:
    lanes: dict[str, Lane]
    bounds: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax
    name: str = ""
    grid_resolution: float = 0.5

    def lane(self, lane_id: str) -> Lane:
        return self.lanes[lane_id]


def _compute_bounds(lanes: dict[str, Lane]) -> tuple[float, float, float, float]:
    xmin = ymin = float("inf")
    xmax = ymax = float("-inf")
    for lane in lanes.values():
        half = lane.width / 2.0
        xmin = min(xmin, float(lane.centerline[:, 0].min()) - half)
        xmax = max(xmax, float(lane.centerline[:, 0].max()) + half)
        ymin = min(ymin, float(lane.centerline[:, 1].min()) - half)
        ymax = max(ymax, float(lane.centerline[:, 1].max()) + half)
    if not lanes:
        return (0.0, 0.0, 0.0, 0.0)
    return (xmin, ymin, xmax, ymax)


def load_scenario(path) -> LaneNetwork:
    """Load and validate a scenario file.

    Raises ScenarioError on parse failures, dangling lane references,
    degenerate centerlines, or inconsistent successor geometry. Messages
    name the offending lane id.
    """
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot parse scenario {path}: {exc}") from exc

    meta = raw.get("meta", {})
    resolution = float(meta.get("grid_resolution", 0.5))
    lanes: dict[str, Lane] = {}
    for entry in raw.get("lanes", []):
        lane_id = str(entry.get("id"))
        pts = np.asarray(entry.get("centerline", []), dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
            raise ScenarioError(f"lane {lane_id}: centerline needs at least 2 points")
        if np.any(np.all(np.abs(np.diff(pts, axis=0)) < 1e-12, axis=1)):
            raise ScenarioError(f"lane {lane_id}: consecutive duplicate centerline points")
        width = float(entry.get("width", 0.0))
        if width <= 0:
            raise ScenarioError(f"lane {lane_id}: width must be positive")
        if lane_id in lanes:
            raise ScenarioError(f"lane {lane_id}: duplicate id")
        lanes[lane_id] = Lane(
            id=lane_id,
            centerline=pts,
            width=width,
            successors=[str(s) for s in entry.get("successors", [])],
        )

    for lane in lanes.values():
        for succ in lane.successors:
            if succ not in lanes:
                raise ScenarioError(f"lane {lane.id}: unknown successor {succ}")
            gap = np.hypot(*(lanes[succ].centerline[0] - lane.centerline[-1]))
            if gap > resolution:
                raise ScenarioError(
                    f"lane {lane.id}: successor {succ} starts {gap:.2f} m away "
                    f"from its end (limit {resolution} m)"
                )
            lanes[succ].predecessors.append(lane.id)

    net = LaneNetwork(
        lanes=lanes,
        bounds=_compute_bounds(lanes),
        name=str(meta.get("name", "")),
        grid_resolution=resolution,
    )
    # Reject cyclic topologies up front; path enumeration assumes a DAG.
    _check_acyclic(net)
    return net


def _check_acyclic(net: LaneNetwork) -> None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {lane_id: WHITE for lane_id in net.lanes}
    stack_path: list[str] = []

    def visit(lane_id: str):
        color[lane_id] = GRAY
        stack_path.append(lane_id)
        for succ in sorted(net.lanes[lane_id].successors):
            if color[succ] == GRAY:
                cycle = stack_path[stack_path.index(succ):] + [succ]
                raise ScenarioError(f"lane topology contains a cycle: {' -> '.join(cycle)}")
            if color[succ] == WHITE:
                visit(succ)
        stack_path.pop()
        color[lane_id] = BLACK

    for lane_id in sorted(net.lanes):
        if color[lane_id] == WHITE:
            visit(lane_id)


def topo_paths(net: LaneNetwork) -> list[np.ndarray]:
    """Enumerate all source-to-sink lane chains, depth first.

    Sources are lanes without predecessors, sinks lanes without
    successors. Each returned polyline concatenates the chain's
    centerlines with duplicate junction points removed. Ordering is
    deterministic: lanes and successors are visited in ascending id.
    """
    _check_acyclic(net)
    paths: list[np.ndarray] = []

    def extend(chain: list[str]):
        lane = net.lanes[chain[-1]]
        if not lane.successors:
            pieces = [net.lanes[chain[0]].centerline]
            for lane_id in chain[1:]:
                pts = net.lanes[lane_id].centerline
                prev_end = pieces[-1][-1]
                if np.hypot(*(pts[0] - prev_end)) < net.grid_resolution:
                    pts = pts[1:]
                pieces.append(pts)
            paths.append(np.vstack(pieces))
            return
        for succ in sorted(lane.successors):
            extend(chain + [succ])

    for lane_id in sorted(net.lanes):
        if not net.lanes[lane_id].predecessors:
            extend([lane_id])
    return paths


@dataclass
class GridMap:
    """Labeled occupancy grid plus a transient vehicle index.

    cells[r, c] holds the label of the cell whose center is
    origin + ((c + 0.5) * res, (r + 0.5) * res). Labels are immutable
    after build_grid; the vehicle occupancy index is rebuilt between
    simulation steps via update_occupancy.
    """

    resolution: float
    origin: tuple[float, float]
    cells: np.ndarray  # (rows, cols) uint8
    _vehicle_cells: dict = field(default_factory=dict)

    @property
    def dims(self) -> tuple[int, int]:
        return self.cells.shape

    def world_to_cell(self, p) -> tuple[int, int]:
        c = int(np.floor((p[0] - self.origin[0]) / self.resolution))
        r = int(np.floor((p[1] - self.origin[1]) / self.resolution))
        return r, c

    def cell_to_world(self, rc) -> np.ndarray:
        r, c = rc
        return np.array(
            [
                self.origin[0] + (c + 0.5) * self.resolution,
                self.origin[1] + (r + 0.5) * self.resolution,
            ]
        )

    def in_grid(self, rc) -> bool:
        r, c = rc
        return 0 <= r < self.cells.shape[0] and 0 <= c < self.cells.shape[1]

    def label_at(self, p) -> int:
        rc = self.world_to_cell(p)
        if not self.in_grid(rc):
            return UNREACHABLE
        return int(self.cells[rc])

    # -- vehicle occupancy ---------------------------------------------------

    def update_occupancy(self, vehicles) -> None:
        """Rebuild the vehicle index from (id, position) pairs.

        Positions outside the grid are ignored.
        """
        self._vehicle_cells = {}
        for vid, pos in vehicles:
            rc = self.world_to_cell(pos)
            if self.in_grid(rc):
                self._vehicle_cells[vid] = rc

    def query_window(self, center_rc, window: int = NEIGHBOR_WINDOW) -> list:
        """Vehicle ids whose cells fall inside a window x window block
        of cells centered on center_rc."""
        half = window // 2
        r0, c0 = center_rc
        out = []
        for vid, (r, c) in self._vehicle_cells.items():
            if abs(r - r0) <= half and abs(c - c0) <= half:
                out.append(vid)
        return out


def _point_segment_dist(px, py, a, b):
    """Vectorized distance from grid points (px, py) to segment a-b."""
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-18:
        return np.hypot(px - a[0], py - a[1])
    t = ((px - a[0]) * ab[0] + (py - a[1]) * ab[1]) / denom
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(px - (a[0] + t * ab[0]), py - (a[1] + t * ab[1]))


def build_grid(net: LaneNetwork, resolution: float | None = None) -> GridMap:
    """Rasterize the lane network into a labeled grid.

    Cell membership is decided by the cell center: centers within a
    segment capsule become drivable, centers within resolution/2 of a
    centerline become lane-center cells. Label 2 wins over 1 wins over 0.
    """
    if resolution is None:
        resolution = net.grid_resolution
    if resolution <= 0:
        raise ValueError("resolution must be positive")

    xmin, ymin, xmax, ymax = net.bounds
    pad = resolution
    cols = max(int(np.ceil((xmax - xmin + 2 * pad) / resolution)), 1)
    rows = max(int(np.ceil((ymax - ymin + 2 * pad) / resolution)), 1)
    origin = (xmin - pad, ymin - pad)
    cells = np.zeros((rows, cols), dtype=np.uint8)

    xs = origin[0] + (np.arange(cols) + 0.5) * resolution
    ys = origin[1] + (np.arange(rows) + 0.5) * resolution

    for lane in net.lanes.values():
        half = lane.width / 2.0
        for a, b in zip(lane.centerline[:-1], lane.centerline[1:]):
            lo = np.minimum(a, b) - half - resolution
            hi = np.maximum(a, b) + half + resolution
            c0, c1 = np.searchsorted(xs, [lo[0], hi[0]])
            r0, r1 = np.searchsorted(ys, [lo[1], hi[1]])
            if c0 >= c1 or r0 >= r1:
                continue
            px, py = np.meshgrid(xs[c0:c1], ys[r0:r1])
            dist = _point_segment_dist(px, py, a, b)
            block = cells[r0:r1, c0:c1]
            drivable = (dist <= half).astype(np.uint8) * DRIVABLE
            center = ((dist <= resolution / 2.0) & (dist <= half)).astype(np.uint8) * LANE_CENTER
            np.maximum(block, drivable, out=block)
            np.maximum(block, center, out=block)

    return GridMap(resolution=resolution, origin=origin, cells=cells)
