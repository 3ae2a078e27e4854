import json

import numpy as np
import pytest

from trafficedit.frenet import make_path
from trafficedit.planner import PathRegistry
from trafficedit.scene import GridMap, build_grid, load_scenario
from trafficedit.simulation import World


def write_scenario(path, lanes, name="test", resolution=0.5):
    payload = {
        "meta": {"name": name, "grid_resolution": resolution},
        "lanes": lanes,
    }
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def straight_lanes(n=3, length=60.0, width=3.5):
    return [
        {
            "id": f"L{i}",
            "width": width,
            "centerline": [[0.0, i * width], [length, i * width]],
            "successors": [],
        }
        for i in range(n)
    ]


@pytest.fixture
def straight_net(tmp_path):
    f = write_scenario(tmp_path / "straight.json", straight_lanes())
    return load_scenario(f)


@pytest.fixture
def straight_grid(straight_net):
    return build_grid(straight_net, 0.5)


def open_grid(rows=20, cols=420, resolution=0.5, origin=(-5.0, -5.0)):
    """All-drivable grid for free-road dynamics tests."""
    return GridMap(resolution=resolution, origin=origin, cells=np.ones((rows, cols), dtype=np.uint8))


def free_world(path_points=((0, 0), (100, 0), (200, 0)), dt=0.01, seed=1, v_max=20.0):
    """World with one long reference path and no lane structure."""
    path = make_path(path_points, source="topo")
    registry = PathRegistry()
    pid = registry.register(path)
    world = World(None, open_grid(), registry, dt=dt, seed=seed, v_max=v_max)
    return world, pid
