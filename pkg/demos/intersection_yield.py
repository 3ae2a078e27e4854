"""Yielding at the intersection.

A vehicle on the left eastbound lane turns right across the right lane,
where two through vehicles are driving on. Unforced, it enters the
junction between them, cutting the second one off. The edit needs only
a position and an arrival time on its unchanged reference path: be at
the junction entry two and a half seconds later. The turner decelerates,
both through vehicles clear the conflict point, and only then does it
turn.

Writes demos/out/intersection/original.csv and yielding.csv.
"""

from pathlib import Path

import numpy as np

from trafficedit.frenet import FrenetPose, cartesian_to_frenet
from trafficedit.orchestrator import build_world
from trafficedit.refine import Keyframe, OptimizeConfig, optimize
from trafficedit.simulation import TrajectoryLog

OUT = Path(__file__).parent / "out" / "intersection"
OUT.mkdir(parents=True, exist_ok=True)

TURN_PATH = "topo-1"     # east-left lane, then the right-turn arc southbound
THROUGH_PATH = "topo-2"  # east-right lane straight through

world, net = build_world("intersection", seed=5)
turn_path = world.paths.get(TURN_PATH)
through_path = world.paths.get(THROUGH_PATH)

# conflict point: where the turn arc crosses the right through lane
conflict = np.array([-5.4, -5.25])
conflict_turn_s = cartesian_to_frenet(turn_path, conflict).s
conflict_through_s = cartesian_to_frenet(through_path, conflict).s

world.spawn(TURN_PATH, s=30.0, speed=10.0, desired_speed=10.0, vehicle_id="turner", sample_params=False)
world.spawn(THROUGH_PATH, s=25.0, speed=12.0, desired_speed=12.0, vehicle_id="through-0", sample_params=False)
world.spawn(THROUGH_PATH, s=10.0, speed=12.0, desired_speed=12.0, vehicle_id="through-1", sample_params=False)


def crossing_times(world, frames=1200):
    """First time each vehicle passes the conflict point along its path."""
    world = world.clone()
    crossed = {}
    targets = {"turner": conflict_turn_s, "through-0": conflict_through_s, "through-1": conflict_through_s}
    log = TrajectoryLog()
    for _ in range(frames):
        breakdowns = world.step()
        for vid, bd in breakdowns.items():
            log.append(world.time, world.vehicles[vid], bd.total)
        for vid, s_conflict in targets.items():
            if vid not in crossed and world.vehicles[vid].pose.s >= s_conflict:
                crossed[vid] = world.time
    return crossed, log


original_times, log = crossing_times(world)
log.write_csv(OUT / "original.csv")
print("original crossing times:", {k: round(v, 2) for k, v in sorted(original_times.items())})
assert original_times["turner"] < original_times["through-1"], \
    "unforced, the turner cuts in before the second through vehicle"

# the edit: same reference path, just a position and a later arrival time
entry_s = cartesian_to_frenet(turn_path, np.array([-12.0, -1.75])).s
kf = Keyframe(vehicle_id="turner", t_goal=6.5, pose=FrenetPose(entry_s, 0.0))
result = optimize("turner", [kf], world, OptimizeConfig())
k = result.targets[0].frame
s_err = result.trajectory.s[k] - result.targets[0].s
print(f"keyframe at junction entry (s = {entry_s:.1f} m, t = 6.5 s): "
      f"arrival error along the path {s_err:+.3f} m, lateral lean-away from "
      f"the crossing traffic {result.trajectory.d[k]:+.2f} m")
assert abs(s_err) < 0.3, "the turner must reach the entry on time along its path"
assert result.path_id == TURN_PATH, "the reference path must not change"

world.vehicles["turner"].set_control(world.frame, result.schedule.values)
edited_times, log = crossing_times(world)
log.write_csv(OUT / "yielding.csv")
print("edited crossing times:  ", {k: round(v, 2) for k, v in sorted(edited_times.items())})
assert edited_times["turner"] > edited_times["through-0"]
assert edited_times["turner"] > edited_times["through-1"]
print("the turner now yields: both through vehicles clear the junction first")
