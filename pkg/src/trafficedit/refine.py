"""Coarse-to-fine keyframe optimization of per-frame desired speeds.

A keyframe asks one vehicle to be at a given position at a given time,
optionally at a given speed. The pipeline:

1. Map the vehicle's current state and every keyframe onto the
   state-time lattice of its reference path and A*-search a coarse
   trajectory per consecutive pair, with the other vehicles' predicted
   motion rasterized as static lattice obstacles.
2. Extract the coarse node speeds and pad them onto the simulation
   frame grid by linear interpolation. This schedule of desired
   longitudinal speeds is the decision variable.
3. Run gradient descent (Adam): simulate the full trajectory under the
   schedule, evaluate the tracking loss, and compute the exact gradient
   of the loss with respect to every per-frame desired speed in one
   backward pass over adjoint states.

The loss is

    Phi = 1/2 * sum_t ( w_track * |x_t - q_t|^2 [keyframe at t]
                        + w_reg * |v_des_t| * dt )

where x_t = (s_t, v_t) is the longitudinal state. The regularizer is
weighted by the frame duration so the objective measures the same
quantity at any simulation timestep.

The backward pass propagates a 2-vector multiplier lam_t = (lam_v,
lam_s), conjugate to (v, s), through the transposed transition
Jacobian. Only the self-motivated force is differentiated: collision
avoidance is piecewise and non-differentiable, and path keeping is
purely lateral. The gradient is therefore exact on a free road and an
approximation when neighbors interact with the vehicle.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from trafficedit.forces import W_KEEP, W_SELF, VehicleState
from trafficedit.frenet import FrenetPose, RefPath, cartesian_to_frenet, make_path
from trafficedit.lattice import (
    CoarseTrajectory,
    LatticeSpec,
    ObstacleMap,
    StateTimeNode,
    rasterize_obstacles,
    search,
)
from trafficedit.planner import PlanRequest, plan_grid_path, smooth_and_fit
from trafficedit.simulation import World

W_TRACK = 1.0
W_REG = 0.1

# |d| beyond half a lane width means the keyframe point is off the
# vehicle's current reference path and a new path must be planned.
OFFPATH_THRESHOLD_FACTOR = 0.5

KEYFRAME_TOLERANCE = 0.5  # meters, met/unmet decision


class RefineError(Exception):
    """Keyframe cannot be set up (bad time, beyond path, blocked start)."""


@dataclass
class Keyframe:
    """Spatio-temporal constraint: be at `point` (or `pose` on a path)
    at absolute simulation time t_goal, optionally at speed v_goal."""

    vehicle_id: str
    t_goal: float
    point: np.ndarray | None = None
    pose: FrenetPose | None = None
    v_goal: float | None = None

    def __post_init__(self):
        if self.point is not None:
            self.point = np.asarray(self.point, dtype=float)
        if self.point is None and self.pose is None:
            raise ValueError("keyframe needs either a point or a Frenet pose")
        if self.t_goal <= 0:
            raise ValueError("keyframe time must be positive")


@dataclass
class ControlSchedule:
    """Desired longitudinal speed per simulation frame."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)

    def clamp(self, v_max: float) -> None:
        np.clip(self.values, 0.0, v_max, out=self.values)

    def copy(self) -> "ControlSchedule":
        return ControlSchedule(self.values.copy())


@dataclass
class FineTrajectory:
    """Frame-by-frame result of simulating a schedule; arrays of length
    T + 1 (index 0 is the pre-control state)."""

    dt: float
    s: np.ndarray
    v: np.ndarray
    d: np.ndarray
    v_lat: np.ndarray
    path_id: str = ""

    @property
    def frames(self) -> int:
        return len(self.s) - 1

    def times(self) -> np.ndarray:
        return np.arange(len(self.s)) * self.dt


@dataclass(frozen=True)
class PathTarget:
    """A keyframe resolved onto the control horizon: fine frame index,
    arc length, optional speed, and the Cartesian point to hit."""

    frame: int
    s: float
    v: float | None
    point: np.ndarray


@dataclass
class OptimizeConfig:
    max_iters: int = 100
    learning_rate: float = 0.01
    beta0: float = 0.9
    beta1: float = 0.999
    patience: int = 10
    lattice_dt: float = 0.5
    w_track: float = W_TRACK
    w_reg: float = W_REG
    tolerance: float = KEYFRAME_TOLERANCE
    max_expansions: int = 5_000_000


# ---------------------------------------------------------------------------
# padding

DEFAULT_ACCEL_LON = 5.0


def _pad_speeds(knot_t: np.ndarray, knot_v: np.ndarray, horizon: float, dt: float) -> ControlSchedule:
    """Sample a piecewise-linear speed profile onto the frame grid.

    Value t is the profile at time (t + 1) * dt, so the last frame's
    desired speed equals the profile's final value; beyond the last
    knot the profile holds its last speed.
    """
    T = int(round(horizon / dt))
    times = (np.arange(T) + 1) * dt
    return ControlSchedule(np.interp(times, knot_t, knot_v))


def init_from_coarse(
    coarse: CoarseTrajectory,
    lattice_dt: float,
    dt: float,
    accel: float = DEFAULT_ACCEL_LON,
) -> ControlSchedule:
    """Linearly interpolate coarse node speeds onto the frame grid.

    The schedule has T = (#nodes - 1) * lattice_dt / dt values, so both
    representations span the same driving duration.
    """
    if len(coarse.nodes) < 2:
        raise ValueError("coarse trajectory needs at least 2 nodes")
    t0 = coarse.nodes[0].i_t
    knot_t = np.array([(n.i_t - t0) * lattice_dt for n in coarse.nodes])
    knot_v = np.array([n.i_v * accel * lattice_dt for n in coarse.nodes])
    horizon = (len(coarse.nodes) - 1) * lattice_dt
    return _pad_speeds(knot_t, knot_v, horizon, dt)


# ---------------------------------------------------------------------------
# loss and gradient

def loss(
    traj: FineTrajectory,
    schedule: ControlSchedule,
    targets: list[PathTarget],
    w_track: float = W_TRACK,
    w_reg: float = W_REG,
) -> float:
    """Tracking error at keyframe frames plus the speed regularizer."""
    total = 0.0
    T = traj.frames
    for tgt in targets:
        if tgt.frame > T:
            raise RefineError(f"keyframe frame {tgt.frame} beyond horizon {T}")
        err = (traj.s[tgt.frame] - tgt.s) ** 2
        if tgt.v is not None:
            err += (traj.v[tgt.frame] - tgt.v) ** 2
        total += w_track * err
    total += w_reg * float(np.sum(np.abs(schedule.values))) * traj.dt
    return 0.5 * total


def adjoint_gradient(
    traj: FineTrajectory,
    schedule: ControlSchedule,
    targets: list[PathTarget],
    dt: float,
    accel_lon: float = 5.0,
    w_track: float = W_TRACK,
    w_reg: float = W_REG,
    with_multipliers: bool = False,
):
    """Gradient of the loss with respect to every scheduled speed.

    One backward sweep: the multiplier lam_t = (lam_v, lam_s) absorbs
    the loss sensitivity to the state at frame t. With the longitudinal
    transition

        v' = v + a * tanh((v_des - v) / 2) * dt
        s' = s + v' * dt

    the Jacobian entries are A = 1 - k * dt (speed w.r.t. speed) and
    dt * A (position w.r.t. speed), where k = a/2 * sech^2((v_des-v)/2)
    is also the control sensitivity dv'/dv_des / dt. Position is
    insensitive to itself beyond identity, so lam_s only accumulates
    tracking terms.
    """
    T = len(schedule)
    if traj.frames != T:
        raise ValueError(f"trajectory has {traj.frames} frames, schedule {T}")

    dphi_v = np.zeros(T + 1)
    dphi_s = np.zeros(T + 1)
    for tgt in targets:
        dphi_s[tgt.frame] += w_track * (traj.s[tgt.frame] - tgt.s)
        if tgt.v is not None:
            dphi_v[tgt.frame] += w_track * (traj.v[tgt.frame] - tgt.v)

    grad = np.zeros(T)
    lam = np.zeros((T + 1, 2)) if with_multipliers else None
    lam_v = dphi_v[T]
    lam_s = dphi_s[T]
    if with_multipliers:
        lam[T] = (lam_v, lam_s)
    vals = schedule.values
    v_arr = traj.v
    half_a = 0.5 * W_SELF * accel_lon
    for t in range(T - 1, -1, -1):
        sech = 1.0 / math.cosh((vals[t] - v_arr[t]) * 0.5)
        k = half_a * sech * sech
        grad[t] = (lam_v + lam_s * dt) * k * dt + 0.5 * w_reg * np.sign(vals[t]) * dt
        a_jac = 1.0 - k * dt
        lam_v = (lam_v + lam_s * dt) * a_jac + dphi_v[t]
        lam_s = lam_s + dphi_s[t]
        if with_multipliers:
            lam[t] = (lam_v, lam_s)
    if with_multipliers:
        return grad, lam
    return grad


# ---------------------------------------------------------------------------
# forward simulation under a schedule

def rollout_free(
    state: VehicleState,
    path: RefPath,
    schedule: ControlSchedule,
    dt: float,
    lane_width: float,
) -> FineTrajectory:
    """Simulate a single vehicle with no neighbors, scalar fast path.

    Reproduces World.step for the neighbor-free case: the Cartesian
    pose never feeds back into the Frenet dynamics, so it is skipped
    per frame. Reaching the path end freezes the state, like a finished
    vehicle in the world.
    """
    T = len(schedule)
    s_arr = np.empty(T + 1)
    v_arr = np.empty(T + 1)
    d_arr = np.empty(T + 1)
    vd_arr = np.empty(T + 1)
    s = float(state.pose.s)
    v = float(state.v_frenet[0])
    d = float(state.pose.d)
    vd = float(state.v_frenet[1])
    s_arr[0], v_arr[0], d_arr[0], vd_arr[0] = s, v, d, vd

    a_lon = float(state.accel_max[0]) * W_SELF
    a_lat = float(state.accel_max[1]) * W_SELF
    m = state.mass
    vdes_lat = float(state.v_desired[1])
    threshold = 0.5 * (lane_width - state.width)
    length = path.length
    vals = schedule.values
    finished = False

    for t in range(T):
        if not finished:
            f_lat = a_lat * math.tanh((vdes_lat - vd) * 0.5)
            if abs(d) >= threshold:
                f_lat -= math.copysign(W_KEEP * abs(d), d) / m
            v = v + a_lon * math.tanh((vals[t] - v) * 0.5) * dt
            if v < 0.0:
                v = 0.0
            vd = vd + f_lat * dt
            s = s + v * dt
            d = d + vd * dt
            if s >= length:
                s = length
                finished = True
        s_arr[t + 1], v_arr[t + 1], d_arr[t + 1], vd_arr[t + 1] = s, v, d, vd
    return FineTrajectory(dt=dt, s=s_arr, v=v_arr, d=d_arr, v_lat=vd_arr, path_id=state.path_id)


def simulate_schedule(base: World, vehicle_id: str, schedule: ControlSchedule) -> FineTrajectory:
    """Simulate the whole world under the schedule, tracking one vehicle.

    The neighbors follow their own dynamics and react to the edited
    vehicle; only the edited vehicle's desired longitudinal speed is
    overridden frame by frame. With no other vehicles present this
    reduces to the scalar fast path.
    """
    ego = base.vehicles[vehicle_id]
    others = [v for v in base.vehicles.values() if v.id != vehicle_id and not v.finished]
    if not others:
        return rollout_free(ego, base.paths.get(ego.path_id), schedule, base.dt, base.lane_width)

    world = base.clone()
    ego = world.vehicles[vehicle_id]
    T = len(schedule)
    s_arr = np.empty(T + 1)
    v_arr = np.empty(T + 1)
    d_arr = np.empty(T + 1)
    vd_arr = np.empty(T + 1)
    s_arr[0], v_arr[0] = ego.pose.s, ego.v_frenet[0]
    d_arr[0], vd_arr[0] = ego.pose.d, ego.v_frenet[1]
    vals = schedule.values
    for t in range(T):
        world.step({vehicle_id: float(vals[t])})
        s_arr[t + 1], v_arr[t + 1] = ego.pose.s, ego.v_frenet[0]
        d_arr[t + 1], vd_arr[t + 1] = ego.pose.d, ego.v_frenet[1]
    return FineTrajectory(
        dt=base.dt, s=s_arr, v=v_arr, d=d_arr, v_lat=vd_arr, path_id=ego.path_id
    )


# ---------------------------------------------------------------------------
# Adam

class Adam:
    """Standard Adam state for one flat parameter vector."""

    def __init__(self, n: int, lr: float = 0.01, beta0: float = 0.9, beta1: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta0 = beta0
        self.beta1 = beta1
        self.eps = eps
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta0 * self.m + (1.0 - self.beta0) * grad
        self.v = self.beta1 * self.v + (1.0 - self.beta1) * grad * grad
        m_hat = self.m / (1.0 - self.beta0**self.t)
        v_hat = self.v / (1.0 - self.beta1**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


# ---------------------------------------------------------------------------
# keyframe resolution

def _project_velocity(path: RefPath, pose: FrenetPose, v_xy: np.ndarray) -> np.ndarray:
    t = path.tangent(pose.s)
    n = np.array([-t[1], t[0]])
    return np.array([float(v_xy @ t), float(v_xy @ n)])


def move_to_path(world: World, vehicle_id: str, path_id: str) -> None:
    """Re-route a vehicle: project its Cartesian state onto a new path."""
    vehicle = world.vehicles[vehicle_id]
    if vehicle.path_id == path_id:
        return
    path = world.paths.get(path_id)
    pose = cartesian_to_frenet(path, vehicle.p)
    vehicle.pose = pose
    vehicle.v_frenet = _project_velocity(path, pose, vehicle.v)
    vehicle.path_id = path_id


def _replan_reference(world: World, vehicle: VehicleState, point: np.ndarray) -> str:
    """Plan a new user path through an off-path keyframe point.

    Way-points: the vehicle's position, the keyframe point, and a
    look-ahead point further along the reference path nearest to the
    keyframe, so the vehicle has road to continue on. The two legs are
    planned and smoothed separately: smoothing fixes leg endpoints, so
    the combined spline passes through the keyframe point exactly. The
    vehicle's Frenet state is re-projected onto the new path.
    """
    best = None
    for pid in world.paths.ids():
        cand = world.paths.get(pid)
        pose = cartesian_to_frenet(cand, point)
        if best is None or abs(pose.d) < abs(best[2].d):
            best = (pid, cand, pose)
    _, nearest, proj = best
    ahead_s = min(proj.s + 30.0, nearest.length)
    if ahead_s <= proj.s + 1.0:
        ahead_s = nearest.length
    legs = [
        (vehicle.p.copy(), point.copy()),
        (point.copy(), nearest.point(ahead_s)),
    ]
    control_points = []
    for i, (a, b) in enumerate(legs):
        cells = plan_grid_path(world.grid, PlanRequest(waypoints=[a, b]))
        leg = smooth_and_fit(cells, world.grid)
        pts = leg.control_points if i == 0 else leg.control_points[1:]
        control_points.extend(pts)
    new_path = make_path(np.asarray(control_points), source="user")
    pid = world.paths.register(new_path)
    move_to_path(world, vehicle.id, pid)
    return pid


def resolve_keyframes(world: World, vehicle_id: str, keyframes: list[Keyframe]) -> RefPath:
    """Make every keyframe reachable on one reference path.

    If a Cartesian keyframe point lies more than half a lane width off
    the vehicle's current path, a new path is planned through it and
    the vehicle (in this world copy) is moved onto it. Returns the
    reference path all keyframes resolve on.
    """
    vehicle = world.vehicles[vehicle_id]
    path = world.paths.get(vehicle.path_id)
    for kf in keyframes:
        if kf.point is None:
            continue
        pose = cartesian_to_frenet(path, kf.point)
        if abs(pose.d) > OFFPATH_THRESHOLD_FACTOR * world.lane_width:
            _replan_reference(world, vehicle, kf.point)
            path = world.paths.get(vehicle.path_id)
            break
    return path


def _targets_on_path(
    path: RefPath, keyframes: list[Keyframe], t_start: float, dt: float
) -> list[PathTarget]:
    targets = []
    for kf in keyframes:
        rel_t = kf.t_goal - t_start
        if rel_t <= 0:
            raise RefineError(f"keyframe time {kf.t_goal} not in the future (now {t_start})")
        if kf.pose is not None:
            s_goal = kf.pose.s
            point = path.point(s_goal) + kf.pose.d * path.normal(s_goal)
        else:
            proj = cartesian_to_frenet(path, kf.point)
            s_goal = proj.s
            point = kf.point
        if s_goal > path.length + 1e-6:
            raise RefineError(f"keyframe arc length {s_goal:.1f} beyond path end {path.length:.1f}")
        targets.append(
            PathTarget(
                frame=max(int(round(rel_t / dt)), 1),
                s=float(s_goal),
                v=kf.v_goal,
                point=np.asarray(point),
            )
        )
    targets.sort(key=lambda t: t.frame)
    return targets


def predict_obstacles(
    base: World, vehicle_id: str, path: RefPath, spec: LatticeSpec
) -> ObstacleMap:
    """Rasterize the other vehicles' predicted motion onto the lattice.

    The world without the edited vehicle is simulated across the
    horizon; every lattice timestep, each other vehicle close enough to
    the reference path (|d| at most half a lane width) contributes an
    occupancy sample at its projected arc length.
    """
    ignored = base.vehicles[vehicle_id].ignores
    world = base.clone()
    world.remove_vehicle(vehicle_id)
    stride = max(int(round(spec.dt / world.dt)), 1)
    n_slices = int(math.floor(spec.t_max / spec.dt + 1e-9))
    samples: dict[str, list[tuple[float, float]]] = {v: [] for v in world.vehicles}

    for k in range(n_slices + 1):
        t = k * spec.dt
        for vid, veh in world.vehicles.items():
            if veh.finished or vid in ignored:
                continue
            proj = cartesian_to_frenet(path, veh.p)
            if abs(proj.d) <= 0.5 * base.lane_width:
                samples[vid].append((t, proj.s))
        if k < n_slices:
            for _ in range(stride):
                world.step()

    ego = base.vehicles[vehicle_id]
    tracks = []
    for rows in samples.values():
        if rows:
            arr = np.asarray(rows)
            tracks.append((arr[:, 0], arr[:, 1]))
    return rasterize_obstacles(tracks, spec, jam_headway=ego.jam_headway, vehicle_length=ego.length)


# ---------------------------------------------------------------------------
# the full pipeline

@dataclass
class OptimizeResult:
    trajectory: FineTrajectory
    schedule: ControlSchedule
    loss_history: list[float]
    segments: list[CoarseTrajectory]
    targets: list[PathTarget]
    path_id: str
    met: bool
    keyframe_errors: list[float]  # Cartesian miss distance per keyframe
    iterations: int
    search_seconds: float = 0.0
    refine_seconds: float = 0.0

    @property
    def coarse(self) -> CoarseTrajectory:
        nodes = list(self.segments[0].nodes)
        for seg in self.segments[1:]:
            nodes.extend(seg.nodes[1:] if seg.nodes[0] == nodes[-1] else seg.nodes)
        return CoarseTrajectory(
            nodes=nodes, reached_goal=all(s.reached_goal for s in self.segments)
        )

    def write_loss_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("iter,loss\n")
            for i, value in enumerate(self.loss_history):
                f.write(f"{i},{value:.9f}\n")


def _keyframe_errors(traj: FineTrajectory, path: RefPath, targets: list[PathTarget]) -> list[float]:
    errors = []
    for tgt in targets:
        k = min(tgt.frame, traj.frames)
        s_k = min(traj.s[k], path.length)
        p = path.point(s_k) + traj.d[k] * path.normal(s_k)
        errors.append(float(np.hypot(*(p - tgt.point))))
    return errors


def optimize(
    vehicle_id: str,
    keyframes: list[Keyframe],
    world: World,
    config: OptimizeConfig | None = None,
    initial_schedule: ControlSchedule | None = None,
) -> OptimizeResult:
    """Coarse-to-fine keyframe optimization (lattice search, then Adam).

    Works on a private copy of the world; the caller's world is never
    touched. The schedule is initialized from the lattice search unless
    initial_schedule is given (used for initialization comparisons).
    Iterations stop early after `patience` consecutive iterations
    without improving on the best loss.
    """
    cfg = config or OptimizeConfig()
    if vehicle_id not in world.vehicles:
        raise RefineError(f"unknown vehicle {vehicle_id}")
    base = world.clone()
    keyframes = sorted(keyframes, key=lambda kf: kf.t_goal)

    path = resolve_keyframes(base, vehicle_id, keyframes)
    vehicle = base.vehicles[vehicle_id]
    dt = base.dt
    targets = _targets_on_path(path, keyframes, base.time, dt)
    horizon = targets[-1].frame * dt

    spec = LatticeSpec(
        s_max=path.length,
        t_max=horizon,
        v_max=base.v_max,
        dt=cfg.lattice_dt,
        max_expansions=cfg.max_expansions,
    )

    t_search = time.perf_counter()
    obstacles = predict_obstacles(base, vehicle_id, path, spec)
    segments = []
    chain = [
        (0.0, float(vehicle.pose.s), float(vehicle.v_frenet[0]))
    ] + [
        (
            tgt.frame * dt,
            tgt.s,
            tgt.v if tgt.v is not None else float(vehicle.v_desired[0]),
        )
        for tgt in targets
    ]
    knot_t: list[float] = []
    knot_v: list[float] = []
    for (t0, s0, v0), (t1, s1, v1) in zip(chain[:-1], chain[1:]):
        seg_spec = LatticeSpec(
            s_max=path.length,
            t_max=t1,
            v_max=base.v_max,
            dt=cfg.lattice_dt,
            max_expansions=cfg.max_expansions,
        )
        start = seg_spec.node_at(s0, v0, t0)
        goal = seg_spec.node_at(s1, v1, t1)
        # lattice parity: every trajectory between two speed indices
        # covers an arc-index distance of fixed parity, so half the
        # rounded goals are exactly unreachable; shift the goal by one
        # semi-cell toward the true arc length to stay feasible (the
        # refinement stage tracks the un-rounded target anyway)
        if (goal.i_s - start.i_s + goal.i_v + start.i_v) % 2:
            bump = 1 if s1 / seg_spec.ds >= goal.i_s else -1
            goal = StateTimeNode(goal.i_s + bump, goal.i_v, goal.i_t)
        seg = search(start, goal, seg_spec, obstacles)
        segments.append(seg)
        for node in seg.nodes:
            t_node = node.i_t * cfg.lattice_dt
            v_node = node.i_v * spec.dv
            if knot_t and t_node <= knot_t[-1] + 1e-9:
                if abs(t_node - knot_t[-1]) < 1e-9:
                    knot_v[-1] = v_node
                continue
            knot_t.append(t_node)
            knot_v.append(v_node)
    search_seconds = time.perf_counter() - t_search

    if initial_schedule is not None:
        schedule = initial_schedule.copy()
    else:
        schedule = _pad_speeds(np.asarray(knot_t), np.asarray(knot_v), horizon, dt)
    schedule.clamp(base.v_max)

    accel_lon = float(vehicle.accel_max[0])
    adam = Adam(len(schedule), lr=cfg.learning_rate, beta0=cfg.beta0, beta1=cfg.beta1)
    best_loss = math.inf
    best: tuple[FineTrajectory, ControlSchedule] | None = None
    history: list[float] = []
    stale = 0
    iterations = 0

    t_refine = time.perf_counter()
    for _ in range(cfg.max_iters):
        iterations += 1
        traj = simulate_schedule(base, vehicle_id, schedule)
        value = loss(traj, schedule, targets, cfg.w_track, cfg.w_reg)
        history.append(value)
        if value < best_loss:
            best_loss = value
            best = (traj, schedule.copy())
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
        grad = adjoint_gradient(traj, schedule, targets, dt, accel_lon, cfg.w_track, cfg.w_reg)
        schedule = ControlSchedule(adam.step(schedule.values, grad))
        schedule.clamp(base.v_max)
    refine_seconds = time.perf_counter() - t_refine

    traj, sched = best
    errors = _keyframe_errors(traj, path, targets)
    return OptimizeResult(
        trajectory=traj,
        schedule=sched,
        loss_history=history,
        segments=segments,
        targets=targets,
        path_id=vehicle.path_id,
        met=bool(max(errors) < cfg.tolerance),
        keyframe_errors=errors,
        iterations=iterations,
        search_seconds=search_seconds,
        refine_seconds=refine_seconds,
    )
