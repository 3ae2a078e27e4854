"""Simulation world: synchronous force-based stepping of all vehicles.

Each step computes every vehicle's forces from the pre-step snapshot,
then advances all states together. Velocities and positions integrate
in the Frenet frame of each vehicle's reference path; the Cartesian
pose is re-derived from the path afterwards, so the two representations
never drift apart. Longitudinal speed is clamped at zero: vehicles do
not reverse along their paths.

Neighbor lookup goes through the grid occupancy index with a
100 x 100 cell window around the vehicle.

The world is the only mutable object here; step() requires exclusive
access. Copies made with World.clone() share the immutable scene and
paths but own their vehicle states, so optimizers can roll forward
private copies.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from trafficedit.forces import (
    DEFAULT_LANE_WIDTH,
    MOVING_DIR_EPS,
    ForceBreakdown,
    VehicleState,
    collision_force_xy,
    path_keeping_force,
    self_motivated_force,
)
from trafficedit.frenet import FrenetPose, frenet_to_cartesian
from trafficedit.planner import PathRegistry
from trafficedit.scene import NEIGHBOR_WINDOW, GridMap, LaneNetwork

DEFAULT_DT = 0.01
DEFAULT_V_MAX = 20.0


@dataclass
class TrajectoryLog:
    """Rows of (t, id, x, y, s, d, vs, vd, theta, fs, fd) per frame."""

    rows: list = field(default_factory=list)

    def append(self, t: float, state: VehicleState, force: np.ndarray) -> None:
        self.rows.append(
            (
                t,
                state.id,
                state.p[0],
                state.p[1],
                state.pose.s,
                state.pose.d,
                state.v_frenet[0],
                state.v_frenet[1],
                state.theta,
                force[0],
                force[1],
            )
        )

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("t,id,x,y,s,d,vs,vd,theta,fs,fd\n")
            for row in self.rows:
                t, vid, *vals = row
                f.write(f"{t:.3f},{vid}," + ",".join(f"{v:.6f}" for v in vals) + "\n")


class World:
    def __init__(
        self,
        net: LaneNetwork | None,
        grid: GridMap,
        paths: PathRegistry,
        dt: float = DEFAULT_DT,
        lane_width: float = DEFAULT_LANE_WIDTH,
        v_max: float = DEFAULT_V_MAX,
        seed: int = 0,
    ):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.net = net
        self.grid = grid
        self.paths = paths
        self.dt = dt
        self.lane_width = lane_width
        self.v_max = v_max
        self.frame = 0
        self.vehicles: dict[str, VehicleState] = {}
        self.rng = np.random.default_rng(seed)

    @property
    def time(self) -> float:
        return self.frame * self.dt

    # -- population ----------------------------------------------------------

    def spawn(
        self,
        path_id: str,
        s: float = 0.0,
        d: float = 0.0,
        speed: float | None = None,
        desired_speed: float = 10.0,
        vehicle_id: str | None = None,
        sample_params: bool = True,
        phantom: bool = False,
    ) -> VehicleState:
        """Place a vehicle on a reference path.

        Per-vehicle jam headway and reaction time are sampled uniformly
        from 4.0 +- 1.0 m and 1.0 +- 0.5 s with the world's seeded RNG,
        unless sample_params is false.
        """
        path = self.paths.get(path_id)
        if vehicle_id is None:
            vehicle_id = f"veh-{len(self.vehicles)}"
        if vehicle_id in self.vehicles:
            raise ValueError(f"vehicle id {vehicle_id} already exists")
        if speed is None:
            speed = desired_speed
        jam = 4.0 + self.rng.uniform(-1.0, 1.0) if sample_params else 4.0
        react = 1.0 + self.rng.uniform(-0.5, 0.5) if sample_params else 1.0
        state = VehicleState(
            id=vehicle_id,
            path_id=path_id,
            pose=FrenetPose(s, d),
            v_frenet=np.array([speed, 0.0]),
            v_desired=np.array([desired_speed, 0.0]),
            jam_headway=jam,
            reaction_time=react,
            phantom=phantom,
        )
        p, v, theta = frenet_to_cartesian(path, state.pose, state.v_frenet)
        state.p, state.v, state.theta = p, v, theta
        self.vehicles[vehicle_id] = state
        self._rebuild_occupancy()
        return state

    def add_stop_line(self, path_id: str, s: float, blocker_id: str | None = None) -> list[str]:
        """Block a path with static phantom vehicles at a stop line.

        Two phantoms are placed, at the line and one car length
        upstream: a vehicle carrying enough momentum to creep past a
        single repulsion point is still held by the next one before it
        can cross the line itself. Remove the returned ids with
        remove_vehicle when the light turns green.
        """
        if blocker_id is None:
            blocker_id = f"stop-{len(self.vehicles)}"
        ids = []
        for k, s_k in enumerate((s, max(s - 4.0, 0.0))):
            vid = blocker_id if k == 0 else f"{blocker_id}-queue"
            self.spawn(
                path_id,
                s=s_k,
                speed=0.0,
                desired_speed=0.0,
                vehicle_id=vid,
                sample_params=False,
                phantom=True,
            )
            ids.append(vid)
        return ids

    def remove_vehicle(self, vehicle_id: str) -> None:
        self.vehicles.pop(vehicle_id, None)
        self._rebuild_occupancy()

    def active_vehicles(self) -> list[VehicleState]:
        return [v for v in self.vehicles.values() if not v.finished]

    def _rebuild_occupancy(self) -> None:
        self.grid.update_occupancy(
            (v.id, v.p) for v in self.vehicles.values() if not v.finished
        )

    # -- dynamics ------------------------------------------------------------

    def neighbors(self, state: VehicleState) -> list[VehicleState]:
        ids = self.grid.query_window(self.grid.world_to_cell(state.p), NEIGHBOR_WINDOW)
        return [
            self.vehicles[i]
            for i in ids
            if i != state.id and i not in state.ignores and not self.vehicles[i].finished
        ]

    def forces(self, state: VehicleState, v_desired_override: float | None = None) -> ForceBreakdown:
        """Force breakdown for one vehicle against the current snapshot.

        Collision forces are summed in Cartesian coordinates and
        projected into the vehicle's Frenet frame at its current arc
        length. Hot path: scalar math plus the path's fast frame table.
        """
        path = self.paths.get(state.path_id)
        f_self = self_motivated_force(state, v_desired_override)
        f_keep = path_keeping_force(state, self.lane_width)

        fs = fd = 0.0
        neighbors = self.neighbors(state)
        if neighbors:
            _, _, tx, ty = path.frame_at(state.pose.s)
            px, py = float(state.p[0]), float(state.p[1])
            vx, vy = float(state.v[0]), float(state.v[1])
            speed = math.hypot(vx, vy)
            if speed > MOVING_DIR_EPS:
                mdx, mdy = vx / speed, vy / speed
            else:
                mdx, mdy = math.cos(state.theta), math.sin(state.theta)
            accel_norm = math.hypot(state.accel_max[0], state.accel_max[1])
            fx = fy = 0.0
            for other in neighbors:
                cfx, cfy = collision_force_xy(
                    px, py, vx, vy, mdx, mdy,
                    float(other.p[0]), float(other.p[1]),
                    float(other.v[0]), float(other.v[1]),
                    state.jam_headway, state.reaction_time, accel_norm,
                )
                fx += cfx
                fy += cfy
            fs = fx * tx + fy * ty
            fd = -fx * ty + fy * tx
        return ForceBreakdown(f_self=f_self, f_keep=f_keep, f_collision=np.array([fs, fd]))

    def step(self, overrides: dict[str, float] | None = None) -> dict[str, ForceBreakdown]:
        """Advance every active vehicle by one frame (synchronous update).

        overrides maps vehicle id to a desired longitudinal speed that
        replaces the vehicle's own for this frame. Vehicles reaching the
        end of their path are marked finished and dropped from future
        steps. Returns the per-vehicle force breakdowns.
        """
        overrides = overrides or {}
        active = [v for v in self.vehicles.values() if not v.finished and not v.phantom]
        breakdowns = {}
        for v in active:
            override = overrides.get(v.id)
            if override is None:
                override = v.control_at(self.frame)
            breakdowns[v.id] = self.forces(v, override)

        dt = self.dt
        for state in active:
            path = self.paths.get(state.path_id)
            f = breakdowns[state.id].total
            m = state.mass
            vs = float(state.v_frenet[0]) + float(f[0]) / m * dt
            vd = float(state.v_frenet[1]) + float(f[1]) / m * dt
            if vs < 0.0:
                vs = 0.0
            s = state.pose.s + vs * dt
            d = state.pose.d + vd * dt
            if s >= path.length:
                s = path.length
                state.finished = True
            state.v_frenet[0] = vs
            state.v_frenet[1] = vd
            state.pose = FrenetPose(s, d)
            px, py, tx, ty = path.frame_at(s)
            state.p[0] = px - d * ty
            state.p[1] = py + d * tx
            state.v[0] = vs * tx - vd * ty
            state.v[1] = vs * ty + vd * tx
            theta = math.atan2(ty, tx)
            if math.hypot(vs, vd) > MOVING_DIR_EPS:
                theta += math.atan2(vd, vs)
            state.theta = theta

        self.frame += 1
        self._rebuild_occupancy()
        return breakdowns

    def run(self, n_frames: int, log: TrajectoryLog | None = None, overrides: dict[str, float] | None = None):
        """Step n_frames; optionally append every frame to a log."""
        for _ in range(n_frames):
            breakdowns = self.step(overrides)
            if log is not None:
                t = self.time
                for vid, bd in breakdowns.items():
                    log.append(t, self.vehicles[vid], bd.total)

    # -- copies --------------------------------------------------------------

    def clone(self) -> "World":
        """Private copy for optimization: own vehicles and occupancy,
        shared immutable scene and paths."""
        other = World.__new__(World)
        other.net = self.net
        other.paths = self.paths
        other.grid = GridMap(
            resolution=self.grid.resolution,
            origin=self.grid.origin,
            cells=self.grid.cells,
        )
        other.dt = self.dt
        other.lane_width = self.lane_width
        other.v_max = self.v_max
        other.frame = self.frame
        other.vehicles = {vid: copy.deepcopy(v) for vid, v in self.vehicles.items()}
        other.rng = copy.deepcopy(self.rng)
        other._rebuild_occupancy()
        return other
