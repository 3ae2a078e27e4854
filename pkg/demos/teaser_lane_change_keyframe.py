"""Lane-change keyframe on the curvy road.

A vehicle cruises along the rightmost lane. We drop a keyframe in the
center lane 9 seconds ahead: the engine plans a new reference path
through the keyframe point, searches a coarse speed profile on the
state-time lattice, and refines it with adjoint gradient descent until
the vehicle arrives at the marked spot on time.

Writes demos/out/teaser/: original vs edited trajectories, the loss
history, and (if matplotlib is importable) an overview plot.
"""

from pathlib import Path

import numpy as np

from trafficedit.orchestrator import RunConfig, run

OUT = Path(__file__).parent / "out" / "teaser"

config = RunConfig.from_dict(
    {
        "scenario": "curvy_road",
        "duration": 12.0,
        "seed": 1,
        "vehicles": [
            {"id": "edited", "path": "topo-0", "s": 5.0, "speed": 10.0, "desired_speed": 10.0},
            {"id": "other", "path": "topo-2", "s": 60.0, "speed": 12.0, "desired_speed": 12.0},
        ],
        "edits": [
            # keyframe: be at this center-lane point at t = 9 s, at rest
            {"vehicle": "edited", "time": 9.0, "point": [93.23, 15.78], "speed": 0.0}
        ],
    }
)

metrics = run(config, OUT)
edit = metrics["edits"][0]
status = "met" if edit["met"] else "unmet"
print(f"keyframe {status}: error {max(edit['keyframe_errors_m']):.3f} m "
      f"after {edit['iterations']} iterations "
      f"(search {edit['search_seconds']:.3f} s, refine {edit['refine_seconds']:.3f} s)")
assert edit["met"], "teaser keyframe should be met on a free center lane"

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not available; skipping plot")
else:
    def read_traj(name, vehicle):
        rows = np.genfromtxt(OUT / name, delimiter=",", names=True, dtype=None, encoding="utf-8")
        mask = rows["id"] == vehicle
        return rows["x"][mask], rows["y"][mask]

    fig, ax = plt.subplots(figsize=(10, 4))
    from trafficedit.orchestrator import build_world

    world, net = build_world("curvy_road")
    for lane in net.lanes.values():
        cl = lane.centerline
        ax.plot(cl[:, 0], cl[:, 1], color="0.8", lw=8, zorder=0)
        ax.plot(cl[:, 0], cl[:, 1], color="0.5", lw=0.8, ls="--", zorder=1)
    x, y = read_traj("original.csv", "edited")
    ax.plot(x, y, "C0--", label="original")
    x, y = read_traj("edited_edited.csv", "edited")
    ax.plot(x, y, "C1-", label="edited")
    ax.plot(93.23, 15.78, "y*", ms=16, label="keyframe")
    ax.set_aspect("equal")
    ax.legend()
    ax.set_title("keyframe-controlled lane change")
    fig.savefig(OUT / "teaser.png", dpi=120, bbox_inches="tight")
    print(f"plot -> {OUT / 'teaser.png'}")
