"""Social-force terms driving each vehicle.

Three behaviors are modeled as forces. The self-motivated force pulls
the current Frenet velocity toward the desired velocity through a
saturating tanh profile; it is oriented so that the force always
restores the velocity toward the desired value and saturates at the
per-axis maximum acceleration. The path keeping force attracts the
vehicle back to its reference path once the lateral deviation exceeds
the slack left by the lane and vehicle widths. The collision avoidance
force is a point-to-point repulsion, computed in Cartesian coordinates,
whose strength follows headway reasoning: a neighbor matters more the
faster the vehicle moves and the faster it closes in.

Default weights: self 1.0, path keeping 0.5, collision 3.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from trafficedit.frenet import FrenetPose

W_SELF = 1.0
W_KEEP = 0.5
W_COLLISION = 3.0

DEFAULT_LANE_WIDTH = 3.5
VEHICLE_WIDTH = 1.8
VEHICLE_LENGTH = 4.5

# Moving direction falls back to heading below this speed.
MOVING_DIR_EPS = 0.1


@dataclass
class VehicleState:
    """Full per-vehicle state, kept in both coordinate systems.

    v_frenet, pose are authoritative; p, v, theta are derived from the
    reference path after every step. accel_max is the per-axis
    (longitudinal, lateral) acceleration bound in the Frenet frame.
    """

    id: str
    path_id: str
    pose: FrenetPose = field(default_factory=lambda: FrenetPose(0.0, 0.0))
    v_frenet: np.ndarray = field(default_factory=lambda: np.zeros(2))
    v_desired: np.ndarray = field(default_factory=lambda: np.zeros(2))
    p: np.ndarray = field(default_factory=lambda: np.zeros(2))
    v: np.ndarray = field(default_factory=lambda: np.zeros(2))
    theta: float = 0.0
    mass: float = 1.0
    accel_max: np.ndarray = field(default_factory=lambda: np.array([5.0, 1.0]))
    jam_headway: float = 4.0
    reaction_time: float = 1.0
    width: float = VEHICLE_WIDTH
    length: float = VEHICLE_LENGTH
    finished: bool = False
    phantom: bool = False  # static blocker (stop line while a light is red)
    # neighbor ids this vehicle does not react to (a vehicle told to run
    # a red light ignores the stop-line phantoms, not the other cars)
    ignores: set = field(default_factory=set)
    # an applied edit: per-frame desired longitudinal speeds starting at
    # an absolute frame index; beyond the schedule the vehicle reverts
    # to its own desired speed
    control_start: int = 0
    control_values: np.ndarray | None = None

    def set_control(self, start_frame: int, values) -> None:
        self.control_start = int(start_frame)
        self.control_values = np.asarray(values, dtype=float)

    def control_at(self, frame: int) -> float | None:
        if self.control_values is None:
            return None
        k = frame - self.control_start
        if 0 <= k < len(self.control_values):
            return float(self.control_values[k])
        return None

    def __post_init__(self):
        self.v_frenet = np.asarray(self.v_frenet, dtype=float).copy()
        self.v_desired = np.asarray(self.v_desired, dtype=float).copy()
        self.p = np.asarray(self.p, dtype=float).copy()
        self.v = np.asarray(self.v, dtype=float).copy()
        self.accel_max = np.asarray(self.accel_max, dtype=float).copy()
        if self.jam_headway <= 0 or self.reaction_time <= 0:
            raise ValueError("jam_headway and reaction_time must be positive")
        if np.any(self.accel_max <= 0):
            raise ValueError("accel_max components must be positive")

    def moving_direction(self) -> np.ndarray:
        speed = float(np.hypot(*self.v))
        if speed > MOVING_DIR_EPS:
            return self.v / speed
        return np.array([math.cos(self.theta), math.sin(self.theta)])


@dataclass
class ForceBreakdown:
    """Per-vehicle force components in the Frenet frame; total is the sum."""

    f_self: np.ndarray
    f_keep: np.ndarray
    f_collision: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.f_self + self.f_keep + self.f_collision


def self_motivated_force(state: VehicleState, v_desired_override: float | None = None) -> np.ndarray:
    """Saturating restoring force toward the desired Frenet velocity.

    Per component: w * m * tanh((v_des - v) / 2) * a_max, which vanishes
    at the desired velocity and saturates at w * m * a_max for large
    velocity gaps. The optional override replaces the longitudinal
    desired speed; it is the control channel of the trajectory
    optimizer.
    """
    v_des = state.v_desired
    if v_desired_override is not None:
        v_des = np.array([v_desired_override, v_des[1]])
    return W_SELF * state.mass * np.tanh((v_des - state.v_frenet) / 2.0) * state.accel_max


def path_keeping_force(state: VehicleState, lane_width: float = DEFAULT_LANE_WIDTH) -> np.ndarray:
    """Lateral attraction back to the reference path.

    Inactive while |d| stays under (lane_width - vehicle_width) / 2, so
    vehicles do not oscillate around the centerline; beyond that the
    force grows linearly with the deviation and points toward the path.
    """
    d = state.pose.d
    threshold = 0.5 * (lane_width - state.width)
    if abs(d) < threshold:
        return np.zeros(2)
    return np.array([0.0, -math.copysign(W_KEEP * abs(d), d)])


_COS_CONE = math.cos(math.pi / 4.0)


def collision_force_xy(
    px: float, py: float, vx: float, vy: float, mdx: float, mdy: float,
    qx: float, qy: float, qvx: float, qvy: float,
    jam_headway: float, reaction_time: float, accel_norm: float,
) -> tuple[float, float]:
    """Scalar core of the collision force; see collision_avoidance_force.

    (px, py, vx, vy) are the vehicle's position and velocity, (mdx, mdy)
    its unit moving direction, (q*, qv*) the neighbor's position and
    velocity. Returns the force on the vehicle.
    """
    ox = qx - px
    oy = qy - py
    dist = math.hypot(ox, oy)
    if dist < 1e-9:
        visual = 1.0
        ux, uy = -mdx, -mdy
    else:
        tx, ty = ox / dist, oy / dist
        cos_phi = mdx * tx + mdy * ty
        if cos_phi < _COS_CONE:
            return 0.0, 0.0
        visual = cos_phi
        ux, uy = -tx, -ty
    speed = math.hypot(vx, vy)
    closing = math.hypot(qvx - vx, qvy - vy)
    headway = jam_headway + speed * reaction_time + speed * closing / (2.0 * accel_norm)
    decay = 1.0 + dist / jam_headway
    mag = W_COLLISION * visual * headway / (decay * decay)
    return mag * ux, mag * uy


def collision_avoidance_force(state: VehicleState, neighbor: VehicleState) -> np.ndarray:
    """Repulsion from one neighbor, in Cartesian coordinates.

    Only neighbors within a 45 degree cone around the moving direction
    act (visual factor cos(phi), zero outside the cone). The strength
    scales with the desired headway: jam distance plus speed times
    reaction time plus a closing-speed term, and decays quadratically
    with the gap. Coincident positions are treated as a head-on blocker
    at zero distance, capping the magnitude.
    """
    moving = state.moving_direction()
    fx, fy = collision_force_xy(
        state.p[0], state.p[1], state.v[0], state.v[1], moving[0], moving[1],
        neighbor.p[0], neighbor.p[1], neighbor.v[0], neighbor.v[1],
        state.jam_headway, state.reaction_time, float(np.hypot(*state.accel_max)),
    )
    return np.array([fx, fy])
