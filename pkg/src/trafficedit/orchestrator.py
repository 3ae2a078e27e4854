"""Batch runs: scenario loading, simulation, keyframe edits, benchmarks.

A run configuration is a JSON file::

    {
      "scenario": "curvy_road",          # bundled name or a file path
      "duration": 12.0,                  # seconds of simulation
      "dt": 0.01, "lattice_dt": 0.5,
      "seed": 1, "v_max": 20.0,
      "vehicles": [
        {"id": "veh-0", "path": "topo-0", "s": 0.0,
         "speed": 10.0, "desired_speed": 10.0}
      ],
      "edits": [
        {"vehicle": "veh-0", "time": 10.0,
         "point": [x, y],                # or "s": arc length on its path
         "speed": 0.0}                   # optional goal speed
      ]
    }

run() writes, per edit, the original trajectory, the edited trajectory,
the loss history, and the coarse lattice dump, plus a metrics summary.
All timings wrap the operation only, never file I/O.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from trafficedit.frenet import FrenetPose, make_path
from trafficedit.lattice import LatticeSpec, search
from trafficedit.planner import PathRegistry, PlanRequest, plan_grid_path, smooth_and_fit
from trafficedit.refine import Keyframe, OptimizeConfig, move_to_path, optimize
from trafficedit.scene import LaneNetwork, build_grid, load_scenario, topo_paths
from trafficedit.simulation import TrajectoryLog, World

BUNDLED = ("curvy_road", "crosswalk", "intersection")

# Lattice timesteps at or below this need the explicit override flag;
# the node count grows fast enough to exhaust memory.
FINE_LATTICE_LIMIT = 0.1

BENCH_SEARCH_DTT = (0.5, 0.25)
BENCH_ADJOINT_DT = (0.5, 0.1, 0.05, 0.01, 0.005)


class BenchGuardError(Exception):
    """Refused lattice timestep without the override flag."""


def scenario_path(name_or_path) -> Path:
    """Resolve a bundled scenario name or pass a filesystem path through."""
    p = Path(name_or_path)
    if p.suffix == ".json" and p.exists():
        return p
    name = p.stem if p.suffix else str(name_or_path)
    if name in BUNDLED:
        return Path(str(resources.files("trafficedit") / "scenarios" / f"{name}.json"))
    if p.exists():
        return p
    raise FileNotFoundError(f"unknown scenario {name_or_path!r} (bundled: {', '.join(BUNDLED)})")


def build_world(
    scenario,
    dt: float = 0.01,
    seed: int = 0,
    v_max: float = 20.0,
) -> tuple[World, LaneNetwork]:
    """Load a scenario into a ready world: grid built, topology paths
    registered as topo-0, topo-1, ... in deterministic order."""
    net = load_scenario(scenario_path(scenario))
    grid = build_grid(net)
    registry = PathRegistry()
    for pts in topo_paths(net):
        registry.register(make_path(pts, source="topo"))
    lane_width = max((l.width for l in net.lanes.values()), default=3.5)
    world = World(net, grid, registry, dt=dt, lane_width=lane_width, v_max=v_max, seed=seed)
    return world, net


@dataclass
class EditSpec:
    vehicle: str
    time: float
    point: list | None = None
    s: float | None = None
    speed: float | None = None

    def keyframe(self, world: World) -> Keyframe:
        if self.point is not None:
            return Keyframe(vehicle_id=self.vehicle, t_goal=self.time, point=np.asarray(self.point, dtype=float), v_goal=self.speed)
        if self.s is None:
            raise ValueError(f"edit for {self.vehicle} needs a point or an arc length")
        return Keyframe(vehicle_id=self.vehicle, t_goal=self.time, pose=FrenetPose(self.s, 0.0), v_goal=self.speed)


@dataclass
class RunConfig:
    scenario: str
    duration: float
    dt: float = 0.01
    lattice_dt: float = 0.5
    seed: int = 0
    v_max: float = 20.0
    iters: int = 100
    # None means "populate a default vehicle per topology path";
    # an explicit empty list stays empty
    vehicles: list[dict] | None = None
    edits: list[EditSpec] = field(default_factory=list)

    def __post_init__(self):
        if self.dt > self.lattice_dt:
            raise ValueError("dt must not exceed lattice_dt")
        latest = max((e.time for e in self.edits), default=0.0)
        if self.duration < latest:
            raise ValueError("duration must cover the latest keyframe")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        edits = [EditSpec(**e) for e in raw.pop("edits", [])]
        known = {k: raw[k] for k in ("scenario", "duration", "dt", "lattice_dt", "seed", "v_max", "iters", "vehicles") if k in raw}
        return cls(edits=edits, **known)


def _spawn_all(world: World, config: RunConfig) -> None:
    vehicles = config.vehicles
    if vehicles is None:
        vehicles = [
            {"id": f"veh-{i}", "path": pid, "s": 5.0, "desired_speed": 10.0}
            for i, pid in enumerate(world.paths.ids("topo"))
        ]
    for spec in vehicles:
        world.spawn(
            spec["path"],
            s=spec.get("s", 0.0),
            d=spec.get("d", 0.0),
            speed=spec.get("speed"),
            desired_speed=spec.get("desired_speed", 10.0),
            vehicle_id=spec.get("id"),
        )


def _fresh_world(config: RunConfig) -> World:
    world, _ = build_world(config.scenario, dt=config.dt, seed=config.seed, v_max=config.v_max)
    _spawn_all(world, config)
    return world


def run(config: RunConfig, out_dir) -> dict:
    """Simulate, apply edits, write artifacts. Returns the metrics summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    frames = int(round(config.duration / config.dt))

    world = _fresh_world(config)
    log = TrajectoryLog()
    t0 = time.perf_counter()
    world.run(frames, log=log)
    sim_seconds = time.perf_counter() - t0
    log.write_csv(out / "original.csv")

    metrics = {
        "scenario": config.scenario,
        "duration": config.duration,
        "dt": config.dt,
        "seed": config.seed,
        "frames": frames,
        "sim_seconds": sim_seconds,
        "edits": [],
    }

    for edit in config.edits:
        base = _fresh_world(config)
        kf = edit.keyframe(base)
        cfg = OptimizeConfig(max_iters=config.iters, lattice_dt=config.lattice_dt)
        result = optimize(edit.vehicle, [kf], base, cfg)

        # replay the whole world under the optimized schedule, recording
        # every vehicle for comparison display; a re-planned reference
        # path was registered into this world's registry by optimize
        move_to_path(base, edit.vehicle, result.path_id)
        base.vehicles[edit.vehicle].set_control(base.frame, result.schedule.values)
        edit_log = TrajectoryLog()
        for _ in range(frames):
            breakdowns = base.step()
            for vid, bd in breakdowns.items():
                edit_log.append(base.time, base.vehicles[vid], bd.total)

        tag = edit.vehicle
        edit_log.write_csv(out / f"edited_{tag}.csv")
        result.write_loss_csv(out / f"loss_{tag}.csv")
        spec = LatticeSpec(s_max=1e9, t_max=1e9, v_max=config.v_max, dt=config.lattice_dt)
        result.coarse.write_csv(out / f"coarse_{tag}.csv", spec)
        metrics["edits"].append(
            {
                "vehicle": edit.vehicle,
                "time": edit.time,
                "met": result.met,
                "keyframe_errors_m": result.keyframe_errors,
                "iterations": result.iterations,
                "loss_final": result.loss_history[-1],
                "search_seconds": result.search_seconds,
                "refine_seconds": result.refine_seconds,
            }
        )

    with open(out / "metrics.json", "w", encoding="utf-8") as f:
        json.dump(metrics, f, indent=1)
    return metrics


def plan(scenario, waypoints, out_dir=None) -> dict:
    """Plan a user path through way-points; optionally write the polyline."""
    world, _ = build_world(scenario)
    cells = plan_grid_path(world.grid, PlanRequest(waypoints=[np.asarray(w, dtype=float) for w in waypoints]))
    path = smooth_and_fit(cells, world.grid)
    pid = world.paths.register(path)
    s = np.linspace(0.0, path.length, max(int(path.length / 0.5), 2))
    poly = path.point(s)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "planned_path.csv", "w", encoding="utf-8") as f:
            f.write("x,y\n")
            for x, y in poly:
                f.write(f"{x:.6f},{y:.6f}\n")
    return {"path_id": pid, "length": path.length, "polyline": poly.tolist()}


def bench(
    scenario,
    out_dir,
    search_dtt=BENCH_SEARCH_DTT,
    adjoint_dt=BENCH_ADJOINT_DT,
    iters: int = 100,
    allow_fine_lattice: bool = False,
    seed: int = 0,
) -> dict:
    """Wall-clock characterization of the two optimization stages.

    Search timings sweep the lattice timestep on the 100 m / 10 s
    instance; adjoint timings sweep the simulation timestep for `iters`
    gradient iterations on the same instance. Lattice timesteps at or
    below 0.1 s are refused unless allow_fine_lattice is set.
    """
    for dtt in search_dtt:
        if dtt <= FINE_LATTICE_LIMIT and not allow_fine_lattice:
            raise BenchGuardError(
                f"lattice timestep {dtt} s needs --allow-fine-lattice: the node "
                f"count at this resolution can exhaust memory"
            )

    world, _ = build_world(scenario, seed=seed)
    pid = world.paths.ids("topo")[0]
    path = world.paths.get(pid)
    goal_s = min(100.0, path.length - 1.0)

    results = {"scenario": str(scenario), "search": [], "adjoint": []}
    for dtt in sorted(search_dtt, reverse=True):
        spec = LatticeSpec(s_max=path.length, t_max=10.0, v_max=world.v_max, dt=dtt)
        start = spec.node_at(0.0, 0.0, 0.0)
        goal = spec.node_at(goal_s, 0.0, 10.0)
        t0 = time.perf_counter()
        traj = search(start, goal, spec)
        elapsed = time.perf_counter() - t0
        results["search"].append(
            {"lattice_dt": dtt, "seconds": elapsed, "reached_goal": traj.reached_goal, "expansions": traj.expansions}
        )

    for dt in sorted(adjoint_dt, reverse=True):
        world, _ = build_world(scenario, dt=dt, seed=seed)
        world.spawn(pid, s=0.0, speed=0.0, desired_speed=10.0, vehicle_id="bench", sample_params=False)
        kf = Keyframe(vehicle_id="bench", t_goal=10.0, pose=FrenetPose(goal_s, 0.0), v_goal=0.0)
        cfg = OptimizeConfig(max_iters=iters, patience=10**9)  # no early stop: fixed work
        result = optimize("bench", [kf], world, cfg)
        results["adjoint"].append(
            {"dt": dt, "seconds": result.refine_seconds, "iterations": result.iterations, "met": result.met}
        )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "bench.json", "w", encoding="utf-8") as f:
        json.dump(results, f, indent=1)
    return results
