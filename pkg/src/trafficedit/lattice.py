"""Coarse trajectory search in the (s, v, t) lattice along a path.

The longitudinal state space is discretized with a coarse timestep and a
single acceleration quantum a: between consecutive time slices a vehicle
either accelerates, keeps its speed, or decelerates. That fixes the grid
intervals dv = a * dt and ds = a * dt^2 / 2 and makes every node
reachable through integer index arithmetic:

    accelerate: (i_s + 2 i_v + 1, i_v + 1, i_t + 1)
    maintain:   (i_s + 2 i_v,     i_v,     i_t + 1)
    decelerate: (i_s + 2 i_v - 1, i_v - 1, i_t + 1)

The graph is never materialized; successors are generated on the fly,
so searches along different paths reuse the same transition rule.

A* uses a unit step cost and the heuristic

    h = w_dist * sqrt(|s - s_g|^2 + |v - v_g|^2 + |t - t_g|^2)
      + w_accel * |v - v_parent| / dt

The second term penalizes speed changes so the search prefers
trajectories with few accelerations. The distance term mixes meters,
m/s and seconds without normalization, matching the weights it was
tuned with. When the goal is unreachable (obstacles, bounds, or the
expansion cap), the search returns the path to the expanded node
nearest the goal, preferring the smaller total heuristic on ties, with
reached_goal set to False.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

W_DIST = 1.0
W_ACCEL = 2.0
MAX_EXPANSIONS = 5_000_000


class LatticeError(Exception):
    """Search preconditions violated (blocked or out-of-bounds start)."""


class StateTimeNode(NamedTuple):
    i_s: int
    i_v: int
    i_t: int


@dataclass(frozen=True)
class LatticeSpec:
    """Discretization of the longitudinal state-time space."""

    s_max: float
    t_max: float
    v_max: float = 20.0
    dt: float = 0.5
    accel: float = 5.0
    w_dist: float = W_DIST
    w_accel: float = W_ACCEL
    max_expansions: int = MAX_EXPANSIONS

    def __post_init__(self):
        if min(self.s_max, self.t_max, self.v_max, self.dt, self.accel) <= 0:
            raise ValueError("lattice extents, dt and accel must be positive")

    @property
    def dv(self) -> float:
        return self.accel * self.dt

    @property
    def ds(self) -> float:
        return 0.5 * self.accel * self.dt * self.dt

    def s(self, node) -> float:
        return node.i_s * self.ds

    def v(self, node) -> float:
        return node.i_v * self.dv

    def t(self, node) -> float:
        return node.i_t * self.dt

    def node_at(self, s: float, v: float, t: float) -> StateTimeNode:
        """Map physical values to the nearest lattice node."""
        return StateTimeNode(
            int(round(s / self.ds)), int(round(v / self.dv)), int(round(t / self.dt))
        )

    def in_bounds(self, node: StateTimeNode) -> bool:
        return (
            0 <= node.i_s * self.ds <= self.s_max + 1e-9
            and 0 <= node.i_v * self.dv <= self.v_max + 1e-9
            and 0 <= node.i_t * self.dt <= self.t_max + 1e-9
        )


@dataclass
class ObstacleMap:
    """Blocked (i_s, i_t) intervals from other vehicles' predictions."""

    intervals: dict[int, list[tuple[int, int]]] = field(default_factory=dict)

    def blocked(self, i_s: int, i_t: int) -> bool:
        for lo, hi in self.intervals.get(i_t, ()):
            if lo <= i_s <= hi:
                return True
        return False

    def add_interval(self, i_t: int, lo: int, hi: int) -> None:
        if hi >= lo:
            self.intervals.setdefault(i_t, []).append((lo, hi))


def rasterize_obstacles(
    others,
    spec: LatticeSpec,
    jam_headway: float = 4.0,
    vehicle_length: float = 4.5,
) -> ObstacleMap:
    """Convert moving vehicles into static lattice obstacles.

    others is a list of (times, s_values) arrays per vehicle, sampled
    along the same reference path at a resolution of at most spec.dt
    (typically obtained by simulating the world without the edited
    vehicle). At each lattice time slice, the interval

        [s_j - jam_headway - vehicle_length, s_j + vehicle_length]

    around the predicted position s_j is unreachable.
    """
    obs = ObstacleMap()
    n_t = int(np.floor(spec.t_max / spec.dt + 1e-9))
    for times, s_values in others:
        times = np.asarray(times, dtype=float)
        s_values = np.asarray(s_values, dtype=float)
        if len(times) == 0:
            continue
        for i_t in range(n_t + 1):
            t = i_t * spec.dt
            if t < times[0] - spec.dt / 2 or t > times[-1] + spec.dt / 2:
                continue
            s_j = float(np.interp(t, times, s_values))
            lo = int(np.ceil((s_j - jam_headway - vehicle_length) / spec.ds - 1e-9))
            hi = int(np.floor((s_j + vehicle_length) / spec.ds + 1e-9))
            obs.add_interval(i_t, max(lo, 0), hi)
    return obs


@dataclass
class CoarseTrajectory:
    nodes: list[StateTimeNode]
    reached_goal: bool
    expansions: int = 0

    def speeds(self, spec: LatticeSpec) -> np.ndarray:
        return np.array([spec.v(n) for n in self.nodes])

    def positions(self, spec: LatticeSpec) -> np.ndarray:
        return np.array([spec.s(n) for n in self.nodes])

    def write_csv(self, path, spec: LatticeSpec) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("t_index,s,v\n")
            for n in self.nodes:
                f.write(f"{n.i_t},{spec.s(n):.6f},{spec.v(n):.6f}\n")


def successors(node: StateTimeNode, spec: LatticeSpec, obstacles: ObstacleMap | None = None):
    """Reachable nodes one coarse step ahead (up to three)."""
    out = []
    for dv in (1, 0, -1):
        nxt = StateTimeNode(node.i_s + 2 * node.i_v + dv, node.i_v + dv, node.i_t + 1)
        if nxt.i_v < 0 or not spec.in_bounds(nxt):
            continue
        if obstacles is not None and obstacles.blocked(nxt.i_s, nxt.i_t):
            continue
        out.append(nxt)
    return out


def _h_dist(node: StateTimeNode, goal: StateTimeNode, spec: LatticeSpec) -> float:
    return float(
        np.sqrt(
            (spec.s(node) - spec.s(goal)) ** 2
            + (spec.v(node) - spec.v(goal)) ** 2
            + (spec.t(node) - spec.t(goal)) ** 2
        )
    )


def search(
    start: StateTimeNode,
    goal: StateTimeNode,
    spec: LatticeSpec,
    obstacles: ObstacleMap | None = None,
) -> CoarseTrajectory:
    """A* through the implicit state-time graph.

    Always produces a trajectory: the full path when the goal is
    reachable, otherwise the path to the expanded node closest to the
    goal. Raises LatticeError when the start itself is blocked or out
    of bounds.
    """
    if not spec.in_bounds(start):
        raise LatticeError(f"start node {start} out of lattice bounds")
    if obstacles is not None and obstacles.blocked(start.i_s, start.i_t):
        raise LatticeError(f"start node {start} is blocked by an obstacle")

    h0 = spec.w_dist * _h_dist(start, goal, spec)
    # Heap entries: (f, h, i_t, i_s, i_v) for deterministic tie-breaking.
    open_heap = [(h0, h0, start.i_t, start.i_s, start.i_v)]
    came_from: dict[StateTimeNode, StateTimeNode] = {}
    closed: set[StateTimeNode] = set()
    # Every path to a node has the same depth, so g never improves; a
    # node is only re-pushed when a new parent lowers its heuristic
    # (fewer speed changes).
    g_of = {start: 0}
    h_of = {start: h0}
    best_fallback = (h0, h0, start)
    expansions = 0
    found = None

    while open_heap:
        f, h, i_t, i_s, i_v = heapq.heappop(open_heap)
        node = StateTimeNode(i_s, i_v, i_t)
        if node in closed:
            continue
        closed.add(node)
        expansions += 1

        hd = _h_dist(node, goal, spec)
        if (hd, h) < best_fallback[:2]:
            best_fallback = (hd, h, node)
        if node == goal:
            found = node
            break
        if expansions >= spec.max_expansions:
            break

        g_next = g_of[node] + 1
        for nxt in successors(node, spec, obstacles):
            if nxt in closed:
                continue
            h_next = spec.w_dist * _h_dist(nxt, goal, spec) + spec.w_accel * abs(
                spec.v(nxt) - spec.v(node)
            ) / spec.dt
            if (g_next, h_next) < (g_of.get(nxt, 1 << 60), h_of.get(nxt, float("inf"))):
                g_of[nxt] = g_next
                h_of[nxt] = h_next
                came_from[nxt] = node
                heapq.heappush(
                    open_heap, (g_next + h_next, h_next, nxt.i_t, nxt.i_s, nxt.i_v)
                )

    end = found if found is not None else best_fallback[2]
    nodes = [end]
    while nodes[-1] != start:
        nodes.append(came_from[nodes[-1]])
    nodes.reverse()
    return CoarseTrajectory(nodes=nodes, reached_goal=found is not None, expansions=expansions)
