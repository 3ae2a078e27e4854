"""HTTP + WebSocket session server for the browser editor.

Endpoints:
    POST /sessions                      {scenario, dt?, seed?} -> {session_id, scene}
    GET  /sessions/{id}/state           current frame snapshot + scene
    POST /sessions/{id}/advance         {frames: n} -> snapshots applied, streamed
    POST /sessions/{id}/paths           {waypoints: [[x,y],...]} -> {path_id, polyline}
    POST /sessions/{id}/keyframes       {vehicle, time, point|s, speed?, iters?} -> {job_id}
    GET  /jobs/{id}                     job status / result
    WS   /sessions/{id}/stream          frame batches as they are produced

All geometry is in meters, times in seconds, frame indices integral.
Frames are streamed in batches (default 5 frames per message) so a
100 Hz simulation does not emit 100 messages per second per client.

Each session's world is mutated only under its lock; keyframe
optimization runs on a worker thread over a private world copy and the
session timeline is swapped in atomically on completion. The original
(unforced) trajectory of an edited session is kept for comparison.
"""

from __future__ import annotations

import itertools
import queue
import threading
import uuid
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from trafficedit.orchestrator import build_world
from trafficedit.planner import PlanningError, PlanRequest, plan_grid_path, smooth_and_fit
from trafficedit.refine import (
    Keyframe,
    OptimizeConfig,
    RefineError,
    move_to_path,
    optimize,
)
from trafficedit.frenet import FrenetPose
from trafficedit.simulation import World

STREAM_BATCH_FRAMES = 5


def _snapshot(world: World) -> dict:
    return {
        "frame": world.frame,
        "time": round(world.time, 6),
        "vehicles": [
            {
                "id": v.id,
                "x": float(v.p[0]),
                "y": float(v.p[1]),
                "theta": float(v.theta),
                "s": float(v.pose.s),
                "d": float(v.pose.d),
                "vs": float(v.v_frenet[0]),
                "vd": float(v.v_frenet[1]),
                "path_id": v.path_id,
                "width": v.width,
                "length": v.length,
                "finished": v.finished,
                "phantom": v.phantom,
            }
            for v in world.vehicles.values()
        ],
    }


def _scene_payload(world: World) -> dict:
    lanes = []
    if world.net is not None:
        for lane in world.net.lanes.values():
            lanes.append(
                {
                    "id": lane.id,
                    "width": lane.width,
                    "centerline": lane.centerline.tolist(),
                }
            )
        bounds = world.net.bounds
    else:
        bounds = (0.0, 0.0, 100.0, 100.0)
    return {
        "bounds": list(bounds),
        "lanes": lanes,
        "grid_resolution": world.grid.resolution,
        "dt": world.dt,
        "paths": {
            pid: world.paths.get(pid).control_points.tolist() for pid in world.paths.ids()
        },
    }


@dataclass
class Session:
    id: str
    world: World
    lock: threading.Lock = field(default_factory=threading.Lock)
    # trajectory previews of the latest edit, for comparison overlays
    original: list[dict] = field(default_factory=list)
    edited: list[dict] = field(default_factory=list)
    edit_log: list[dict] = field(default_factory=list)
    busy_jobs: set = field(default_factory=set)
    streams: list[queue.Queue] = field(default_factory=list)

    def push_frames(self, frames: list[dict]) -> None:
        for q in list(self.streams):
            q.put(frames)

    def push_event(self, event: dict) -> None:
        for q in list(self.streams):
            q.put(event)

    def advance(self, n: int) -> list[dict]:
        """Step n frames. Applied edits live on the vehicles as control
        schedules, so stepping reproduces the optimized timeline."""
        out = []
        with self.lock:
            for _ in range(n):
                self.world.step()
                out.append(_snapshot(self.world))
        for i in range(0, len(out), STREAM_BATCH_FRAMES):
            self.push_frames(out[i : i + STREAM_BATCH_FRAMES])
        return out


@dataclass
class Job:
    id: str
    session_id: str
    vehicle: str
    status: str = "running"  # running | met | unmet | failed
    error: str | None = None
    result: dict | None = None


class EditService:
    def __init__(self):
        self.sessions: dict[str, Session] = {}
        self.jobs: dict[str, Job] = {}
        self._counter = itertools.count()

    # -- sessions ---------------------------------------------------------

    def create_session(self, scenario: str, dt: float = 0.01, seed: int = 0, vehicles=None) -> Session:
        try:
            world, _ = build_world(scenario, dt=dt, seed=seed)
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
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
        session = Session(id=f"s-{next(self._counter)}-{uuid.uuid4().hex[:6]}", world=world)
        self.sessions[session.id] = session
        return session

    def session(self, session_id: str) -> Session:
        if session_id not in self.sessions:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return self.sessions[session_id]

    # -- keyframe jobs ------------------------------------------------------

    def submit_keyframe(self, session: Session, payload: dict) -> Job:
        vehicle = payload.get("vehicle")
        if vehicle not in session.world.vehicles:
            raise HTTPException(status_code=404, detail=f"unknown vehicle {vehicle}")
        if vehicle in session.busy_jobs:
            raise HTTPException(status_code=409, detail=f"vehicle {vehicle} already optimizing")
        t_goal = float(payload.get("time", 0.0))
        if t_goal <= session.world.time:
            raise HTTPException(status_code=400, detail="keyframe time must be in the future")

        if payload.get("point") is not None:
            kf = Keyframe(
                vehicle_id=vehicle, t_goal=t_goal,
                point=np.asarray(payload["point"], dtype=float),
                v_goal=payload.get("speed"),
            )
        elif payload.get("s") is not None:
            kf = Keyframe(
                vehicle_id=vehicle, t_goal=t_goal,
                pose=FrenetPose(float(payload["s"]), 0.0),
                v_goal=payload.get("speed"),
            )
        else:
            raise HTTPException(status_code=400, detail="keyframe needs point or s")

        job = Job(id=f"j-{next(self._counter)}-{uuid.uuid4().hex[:6]}", session_id=session.id, vehicle=vehicle)
        self.jobs[job.id] = job
        session.busy_jobs.add(vehicle)
        cfg = OptimizeConfig(max_iters=int(payload.get("iters", 100)))
        thread = threading.Thread(target=self._run_job, args=(session, job, kf, cfg), daemon=True)
        thread.start()
        return job

    def _run_job(self, session: Session, job: Job, kf: Keyframe, cfg: OptimizeConfig) -> None:
        try:
            with session.lock:
                base = session.world.clone()
            result = optimize(kf.vehicle_id, [kf], base, cfg)
            horizon = result.trajectory.frames
            start_frame = base.frame

            # original continuation: unforced world from the current frame
            original_world = base.clone()
            original = []
            for _ in range(horizon):
                original_world.step()
                original.append(_snapshot(original_world))

            # edited continuation: the whole world with the schedule applied
            edited_world = base.clone()
            move_to_path(edited_world, kf.vehicle_id, result.path_id)
            edited_world.vehicles[kf.vehicle_id].set_control(start_frame, result.schedule.values)
            edited = []
            for _ in range(horizon):
                edited_world.step()
                edited.append(_snapshot(edited_world))

            # atomic timeline swap: from this frame on, stepping the live
            # world reproduces the edited preview
            with session.lock:
                move_to_path(session.world, kf.vehicle_id, result.path_id)
                session.world.vehicles[kf.vehicle_id].set_control(start_frame, result.schedule.values)
                session.original = original
                session.edited = edited
                session.edit_log.append({"vehicle": kf.vehicle_id, "time": kf.t_goal, "job": job.id})
            job.result = {
                "met": result.met,
                "keyframe_errors_m": result.keyframe_errors,
                "closest_approach_m": min(result.keyframe_errors),
                "iterations": result.iterations,
                "loss_history": result.loss_history,
                "path_id": result.path_id,
                "horizon_frames": horizon,
                "target": {
                    "frame": result.targets[-1].frame,
                    "s": result.targets[-1].s,
                    "point": result.targets[-1].point.tolist(),
                },
                "original": original,
                "edited": edited,
            }
            job.status = "met" if result.met else "unmet"
        except (RefineError, PlanningError, ValueError) as exc:
            job.status = "failed"
            job.error = str(exc)
        finally:
            session.busy_jobs.discard(job.vehicle)
            session.push_event({"job_done": job.id, "status": job.status})

    # -- paths ---------------------------------------------------------------

    def plan_user_path(self, session: Session, waypoints) -> dict:
        try:
            cells = plan_grid_path(
                session.world.grid,
                PlanRequest(waypoints=[np.asarray(w, dtype=float) for w in waypoints]),
            )
            path = smooth_and_fit(cells, session.world.grid)
        except PlanningError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with session.lock:
            pid = session.world.paths.register(path)
        s = np.linspace(0.0, path.length, max(int(path.length / 0.5), 2))
        return {"path_id": pid, "length": path.length, "polyline": path.point(s).tolist()}


def create_app(service: EditService | None = None) -> FastAPI:
    service = service or EditService()
    app = FastAPI(title="trafficedit session server")
    app.state.service = service

    @app.post("/sessions")
    def create_session(payload: dict):
        session = service.create_session(
            payload.get("scenario", "curvy_road"),
            dt=float(payload.get("dt", 0.01)),
            seed=int(payload.get("seed", 0)),
            vehicles=payload.get("vehicles"),
        )
        return {
            "session_id": session.id,
            "scene": _scene_payload(session.world),
            "state": _snapshot(session.world),
        }

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        session = service.session(session_id)
        with session.lock:
            return {
                "state": _snapshot(session.world),
                "scene": _scene_payload(session.world),
                "has_edit": bool(session.edited),
            }

    @app.post("/sessions/{session_id}/advance")
    def advance(session_id: str, payload: dict):
        session = service.session(session_id)
        if session.busy_jobs:
            raise HTTPException(status_code=409, detail="optimization in progress")
        n = int(payload.get("frames", 0))
        if n < 0:
            raise HTTPException(status_code=400, detail="frames must be non-negative")
        frames = session.advance(n)
        return {"frames": frames, "frame": session.world.frame}

    @app.post("/sessions/{session_id}/paths")
    def plan_path(session_id: str, payload: dict):
        session = service.session(session_id)
        waypoints = payload.get("waypoints", [])
        if len(waypoints) < 2:
            raise HTTPException(status_code=400, detail="need at least 2 waypoints")
        return service.plan_user_path(session, waypoints)

    @app.post("/sessions/{session_id}/keyframes")
    def add_keyframe(session_id: str, payload: dict):
        session = service.session(session_id)
        job = service.submit_keyframe(session, payload)
        return {"job_id": job.id, "status": job.status}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        job = service.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
        out: dict[str, Any] = {"job_id": job.id, "status": job.status, "vehicle": job.vehicle}
        if job.error:
            out["error"] = job.error
        if job.result is not None:
            out["result"] = job.result
        return out

    @app.get("/sessions/{session_id}/trajectories")
    def trajectories(session_id: str):
        session = service.session(session_id)
        return {"original": session.original, "edited": session.edited}

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        if session_id not in service.sessions:
            await ws.close(code=4404)
            return
        session = service.sessions[session_id]
        q: queue.Queue = queue.Queue()
        session.streams.append(q)
        await ws.accept()
        import asyncio

        try:
            while True:
                try:
                    batch = q.get_nowait()
                except queue.Empty:
                    await asyncio.sleep(0.005)
                    continue
                await ws.send_json({"frames": batch} if isinstance(batch, list) else batch)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            if q in session.streams:
                session.streams.remove(q)

    return app


app = create_app()


def main():
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="trafficedit session server")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8008)
    args = parser.parse_args()
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
