import math

import numpy as np
import pytest

from trafficedit.frenet import FrenetPose, make_path
from trafficedit.forces import VehicleState
from trafficedit.lattice import CoarseTrajectory, LatticeSpec, StateTimeNode
from trafficedit.refine import (
    ControlSchedule,
    Keyframe,
    OptimizeConfig,
    PathTarget,
    RefineError,
    adjoint_gradient,
    init_from_coarse,
    loss,
    optimize,
    rollout_free,
)

from conftest import free_world


def nodes_from_iv(iv_list):
    nodes = [StateTimeNode(0, iv_list[0], 0)]
    for iv in iv_list[1:]:
        prev = nodes[-1]
        nodes.append(StateTimeNode(prev.i_s + prev.i_v + iv, iv, prev.i_t + 1))
    return nodes


def straight_state(s=0.0, v=0.0, v_des=10.0):
    return VehicleState(
        id="e",
        path_id="p",
        pose=FrenetPose(s, 0.0),
        v_frenet=np.array([v, 0.0]),
        v_desired=np.array([v_des, 0.0]),
    )


LONG_PATH = make_path([(0, 0), (300, 0), (600, 0)], source="topo")


class TestInitFromCoarse:
    def test_single_step_ramp(self):
        coarse = CoarseTrajectory(nodes=[StateTimeNode(0, 0, 0), StateTimeNode(1, 1, 1)], reached_goal=True)
        sched = init_from_coarse(coarse, 0.5, 0.01)
        assert len(sched) == 50
        # linear ramp 0 -> 2.5 sampled at the end of each frame
        assert sched.values[0] == pytest.approx(0.05)
        assert sched.values[-1] == pytest.approx(2.5)
        assert np.allclose(np.diff(sched.values), 0.05)

    def test_constant_profile_constant_schedule(self):
        coarse = CoarseTrajectory(nodes=nodes_from_iv([2, 2, 2, 2]), reached_goal=True)
        sched = init_from_coarse(coarse, 0.5, 0.01)
        assert len(sched) == 150
        assert np.allclose(sched.values, 5.0)

    def test_horizon_frame_count(self):
        coarse = CoarseTrajectory(nodes=nodes_from_iv([0] + [1] * 20), reached_goal=True)
        assert len(coarse.nodes) == 21
        sched = init_from_coarse(coarse, 0.5, 0.01)
        assert len(sched) == 1000  # 10 s of frames

    def test_requires_two_nodes(self):
        with pytest.raises(ValueError):
            init_from_coarse(CoarseTrajectory(nodes=[StateTimeNode(0, 0, 0)], reached_goal=True), 0.5, 0.01)


class TestLoss:
    def test_exact_hit_zero_schedule(self):
        traj = rollout_free(straight_state(v=10.0), LONG_PATH, ControlSchedule(np.zeros(0)), 0.01, 3.5)
        # no frames: loss must be zero with no targets
        assert loss(traj, ControlSchedule(np.zeros(0)), []) == 0.0
        T = 100
        sched = ControlSchedule(np.zeros(T))
        traj = rollout_free(straight_state(v=0.0), LONG_PATH, sched, 0.01, 3.5)
        target = PathTarget(frame=T, s=float(traj.s[T]), v=float(traj.v[T]), point=np.zeros(2))
        assert loss(traj, sched, [target]) == pytest.approx(0.0, abs=1e-15)

    def test_two_metre_error(self):
        T = 10
        sched = ControlSchedule(np.zeros(T))
        traj = rollout_free(straight_state(v=0.0, v_des=0.0), LONG_PATH, sched, 0.01, 3.5)
        target = PathTarget(frame=T, s=float(traj.s[T]) + 2.0, v=None, point=np.zeros(2))
        assert loss(traj, sched, [target]) == pytest.approx(2.0, abs=1e-12)

    def test_regularizer_only(self):
        # constant 10 m/s schedule over 1000 frames at 10 ms:
        # 0.5 * 0.1 * sum(|v|) * dt = 0.5 * 0.1 * 10 * 1000 * 0.01 = 5.0
        T = 1000
        sched = ControlSchedule(np.full(T, 10.0))
        traj = rollout_free(straight_state(v=10.0, v_des=10.0), LONG_PATH, sched, 0.01, 3.5)
        assert loss(traj, sched, []) == pytest.approx(5.0, abs=1e-9)

    def test_target_beyond_horizon_raises(self):
        sched = ControlSchedule(np.zeros(10))
        traj = rollout_free(straight_state(), LONG_PATH, sched, 0.01, 3.5)
        with pytest.raises(RefineError):
            loss(traj, sched, [PathTarget(frame=11, s=0.0, v=None, point=np.zeros(2))])


class TestAdjointGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(17)
        T, dt = 200, 0.01
        state = straight_state(v=10.0)
        sched = ControlSchedule(rng.uniform(5.0, 15.0, T))
        targets = [PathTarget(frame=T, s=18.0, v=8.0, point=np.zeros(2))]
        traj = rollout_free(state, LONG_PATH, sched, dt, 3.5)
        grad = adjoint_gradient(traj, sched, targets, dt)

        h = 1e-4
        fd = np.zeros(T)
        for i in range(T):
            up = ControlSchedule(sched.values.copy())
            up.values[i] += h
            down = ControlSchedule(sched.values.copy())
            down.values[i] -= h
            fd[i] = (
                loss(rollout_free(state, LONG_PATH, up, dt, 3.5), up, targets)
                - loss(rollout_free(state, LONG_PATH, down, dt, 3.5), down, targets)
            ) / (2 * h)
        assert np.linalg.norm(grad - fd) / np.linalg.norm(fd) < 1e-4

    def test_zero_loss_zero_tracking_gradient(self):
        T, dt = 50, 0.01
        state = straight_state(v=10.0, v_des=10.0)
        sched = ControlSchedule(np.full(T, 10.0))
        traj = rollout_free(state, LONG_PATH, sched, dt, 3.5)
        target = PathTarget(frame=T, s=float(traj.s[T]), v=float(traj.v[T]), point=np.zeros(2))
        grad = adjoint_gradient(traj, sched, [target], dt, w_reg=0.0)
        assert np.allclose(grad, 0.0, atol=1e-12)

    def test_multiplier_recursion_identity_jacobian(self):
        # with |v_des - v| huge the force plateau makes the transition
        # Jacobian the shear [[1, 0], [dt, 1]]; three frames by hand:
        #   lam_3 = (ev, es)
        #   lam_2 = (ev + es dt, es)
        #   lam_1 = (ev + 2 es dt, es)
        #   lam_0 = (ev + 3 es dt, es)
        T, dt = 3, 0.01
        state = straight_state(v=0.0, v_des=0.0)
        sched = ControlSchedule(np.full(T, 40.0))
        traj = rollout_free(state, LONG_PATH, sched, dt, 3.5)
        es = 1.0 * (traj.s[T] - (traj.s[T] - 2.0))  # force error of +2 m
        ev = 1.0 * (traj.v[T] - (traj.v[T] - 0.5))  # and +0.5 m/s
        targets = [PathTarget(frame=T, s=float(traj.s[T]) - 2.0, v=float(traj.v[T]) - 0.5, point=np.zeros(2))]
        _, lam = adjoint_gradient(traj, sched, targets, dt, with_multipliers=True)
        for k in range(4):
            expected = (ev + k * es * dt, es)
            assert lam[T - k][0] == pytest.approx(expected[0], rel=1e-9)
            assert lam[T - k][1] == pytest.approx(expected[1], rel=1e-12)

    def test_length_mismatch_raises(self):
        sched = ControlSchedule(np.zeros(5))
        traj = rollout_free(straight_state(), LONG_PATH, ControlSchedule(np.zeros(6)), 0.01, 3.5)
        with pytest.raises(ValueError):
            adjoint_gradient(traj, sched, [], 0.01)


def benchmark_world():
    world, pid = free_world()
    world.spawn(pid, s=0.0, speed=0.0, desired_speed=10.0, vehicle_id="ego", sample_params=False)
    return world


BENCH_KF = Keyframe(vehicle_id="ego", t_goal=10.0, pose=FrenetPose(100.0, 0.0), v_goal=0.0)


class TestOptimize:
    def test_benchmark_meets_keyframe(self):
        res = optimize("ego", [BENCH_KF], benchmark_world())
        k = res.targets[0].frame
        assert k == 1000
        assert abs(res.trajectory.s[k] - 100.0) < 0.5
        assert res.met
        # arrival frame: the closest approach to the goal is within one
        # frame of the requested time
        closest = int(np.argmin(np.abs(res.trajectory.s - 100.0)))
        assert abs(closest - k) <= 1

    def test_benchmark_speed_profile_smooth(self):
        res = optimize("ego", [BENCH_KF], benchmark_world())
        dv = np.abs(np.diff(res.trajectory.v))
        assert dv.max() < 5.0 * 0.01 * 1.5
        # the lattice profile, by contrast, jumps by exactly 2.5 m/s
        coarse_v = res.coarse.speeds(LatticeSpec(s_max=200.0, t_max=10.0, v_max=20.0, dt=0.5))
        jumps = np.abs(np.diff(coarse_v))
        assert set(np.round(jumps, 9)) <= {0.0, 2.5}
        assert 2.5 in np.round(jumps, 9)

    def test_already_satisfied_keyframe(self):
        world, pid = free_world()
        world.spawn(pid, s=0.0, speed=10.0, desired_speed=10.0, vehicle_id="ego", sample_params=False)
        kf = Keyframe(vehicle_id="ego", t_goal=5.0, pose=FrenetPose(50.0, 0.0), v_goal=10.0)
        res = optimize("ego", [kf], world)
        assert res.met
        assert abs(res.trajectory.s[res.targets[0].frame] - 50.0) < 0.1
        assert np.allclose(res.schedule.values, 10.0, atol=0.5)

    def test_best_loss_monotone(self):
        res = optimize("ego", [BENCH_KF], benchmark_world())
        best = np.minimum.accumulate(res.loss_history)
        kept = [res.loss_history[0]]
        for v in res.loss_history[1:]:
            kept.append(min(kept[-1], v))
        assert np.allclose(best, kept)
        assert best[-1] <= best[0]

    def test_coarse_init_beats_average_speed_init_at_iteration_15(self):
        res_coarse = optimize("ego", [BENCH_KF], benchmark_world())
        avg = ControlSchedule(np.full(1000, 10.0))  # 100 m / 10 s
        res_avg = optimize("ego", [BENCH_KF], benchmark_world(), initial_schedule=avg)
        assert res_coarse.loss_history[15] < res_avg.loss_history[15]

    def test_horizon_conservation(self):
        res = optimize("ego", [BENCH_KF], benchmark_world())
        total_steps = sum(len(seg.nodes) - 1 for seg in res.segments)
        assert res.trajectory.frames * 0.01 == pytest.approx(total_steps * 0.5)

    def test_keyframe_pair_chaining(self):
        world, pid = free_world()
        world.spawn(pid, s=0.0, speed=10.0, desired_speed=10.0, vehicle_id="ego", sample_params=False)
        kfs = [
            Keyframe(vehicle_id="ego", t_goal=5.0, pose=FrenetPose(50.0, 0.0), v_goal=10.0),
            Keyframe(vehicle_id="ego", t_goal=10.0, pose=FrenetPose(100.0, 0.0), v_goal=10.0),
        ]
        res = optimize("ego", kfs, world)
        spec = LatticeSpec(s_max=200.0, t_max=10.0, v_max=20.0, dt=0.5)
        assert len(res.segments) == 2
        assert res.segments[0].nodes[0] == spec.node_at(0.0, 10.0, 0.0)
        assert res.segments[1].nodes[0] == spec.node_at(50.0, 10.0, 5.0)
        assert res.segments[1].nodes[-1] == spec.node_at(100.0, 10.0, 10.0)
        assert res.met

    def test_deterministic_loss_history(self):
        a = optimize("ego", [BENCH_KF], benchmark_world())
        b = optimize("ego", [BENCH_KF], benchmark_world())
        assert a.loss_history == b.loss_history

    def test_unknown_vehicle_raises(self):
        with pytest.raises(RefineError):
            optimize("nobody", [BENCH_KF], benchmark_world())

    def test_keyframe_beyond_path_raises(self):
        world, pid = free_world(path_points=((0, 0), (50, 0)))
        world.spawn(pid, s=0.0, speed=10.0, desired_speed=10.0, vehicle_id="ego", sample_params=False)
        kf = Keyframe(vehicle_id="ego", t_goal=10.0, pose=FrenetPose(100.0, 0.0))
        with pytest.raises(RefineError, match="beyond"):
            optimize("ego", [kf], world)

    def test_keyframe_time_not_in_future_raises(self):
        world, pid = free_world()
        world.spawn(pid, s=0.0, speed=10.0, desired_speed=10.0, vehicle_id="ego", sample_params=False)
        world.run(200)  # 2 s
        kf = Keyframe(vehicle_id="ego", t_goal=1.0, pose=FrenetPose(50.0, 0.0))
        with pytest.raises(RefineError, match="future"):
            optimize("ego", [kf], world)

    def test_world_untouched_by_optimize(self):
        world = benchmark_world()
        before = world.vehicles["ego"].pose.s
        optimize("ego", [BENCH_KF], world)
        assert world.vehicles["ego"].pose.s == before
        assert world.frame == 0

    def test_loss_csv_export(self, tmp_path):
        res = optimize("ego", [BENCH_KF], benchmark_world(), OptimizeConfig(max_iters=5))
        out = tmp_path / "loss.csv"
        res.write_loss_csv(out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "iter,loss"
        assert len(lines) == len(res.loss_history) + 1
        assert lines[1].startswith("0,")


class TestObstaclesInOptimize:
    def test_congestion_wall_reports_unmet(self):
        world, pid = free_world()
        world.spawn(pid, s=0.0, speed=10.0, desired_speed=10.0, vehicle_id="ego", sample_params=False)
        # parked wall well ahead; keyframe beyond it
        world.spawn(pid, s=60.0, speed=0.0, desired_speed=0.0, vehicle_id="wall", sample_params=False)
        kf = Keyframe(vehicle_id="ego", t_goal=8.0, pose=FrenetPose(120.0, 0.0))
        res = optimize("ego", [kf], world, OptimizeConfig(max_iters=30))
        assert not res.segments[0].reached_goal
        assert not res.met
        assert res.keyframe_errors[0] > 0.5
        # the vehicle must not drive through the parked wall
        assert res.trajectory.s.max() < 60.0
