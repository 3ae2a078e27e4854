"""Force-based microscopic traffic simulation with keyframe trajectory editing."""

from trafficedit.frenet import FrenetPose, RefPath, cartesian_to_frenet, frenet_to_cartesian, make_path
from trafficedit.scene import GridMap, Lane, LaneNetwork, ScenarioError, build_grid, load_scenario, topo_paths
from trafficedit.planner import PathRegistry, PlanRequest, PlanningError, plan_grid_path, smooth_and_fit
from trafficedit.forces import (
    ForceBreakdown,
    VehicleState,
    collision_avoidance_force,
    path_keeping_force,
    self_motivated_force,
)
from trafficedit.simulation import World
from trafficedit.lattice import CoarseTrajectory, LatticeSpec, ObstacleMap, StateTimeNode, search, successors
from trafficedit.refine import (
    ControlSchedule,
    FineTrajectory,
    Keyframe,
    OptimizeConfig,
    adjoint_gradient,
    init_from_coarse,
    loss,
    optimize,
)

__version__ = "0.1.0"
