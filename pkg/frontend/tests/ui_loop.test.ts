// Scripted end-to-end editor loop against a live session server:
// load the curvy-road scenario, watch frames stream in, place the
// teaser-style keyframe, and check that the met result renders both
// overlays with the edited trajectory passing the keyframe marker.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { Api } from "../src/api.js";
import { connectStream } from "../src/stream.js";
import { fitBounds, worldToScreen } from "../src/transform.js";
import { renderScene, type Canvas2D } from "../src/render.js";
import type { Point, Snapshot } from "../src/types.js";
import {
  applyFrames,
  applySession,
  initialViewModel,
  jobFinished,
  jobSubmitted,
  placeKeyframeDraft,
  selectVehicle,
  type ViewModel,
} from "../src/viewmodel.js";

const PORT = 8031;
const BASE = `http://127.0.0.1:${PORT}`;
const WS_BASE = `ws://127.0.0.1:${PORT}`;
const KEYFRAME_POINT: Point = [93.23, 15.78]; // center lane of the curvy road
const KEYFRAME_TIME = 9.0;

let server: ChildProcess;

async function waitForServer(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/jobs/probe`);
      if (res.status === 404) return; // server answers
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("session server did not come up");
    await new Promise((r) => setTimeout(r, 250));
  }
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "trafficedit.service", "--port", String(PORT)], {
    cwd: new URL("../..", import.meta.url).pathname,
    stdio: "ignore",
  });
  await waitForServer();
}, 60000);

afterAll(() => {
  server?.kill();
});

class CountingContext implements Canvas2D {
  strokes = 0;
  dashes: number[][] = [];
  fillStyle: unknown = "";
  strokeStyle: unknown = "";
  lineWidth = 1;
  globalAlpha = 1;
  beginPath() {}
  moveTo() {}
  lineTo() {}
  arc() {}
  rect() {}
  fill() {}
  stroke() { this.strokes += 1; }
  fillRect() {}
  clearRect() {}
  setLineDash(segments: number[]) { this.dashes.push(segments); }
  save() {}
  restore() {}
  translate() {}
  rotate() {}
}

describe("editor loop against the live service", () => {
  it("teaser keyframe: met result with both overlays near the marker", async () => {
    const api = new Api(BASE);
    const created = await api.createSession("curvy_road", {
      seed: 1,
      vehicles: [
        { id: "edited", path: "topo-0", s: 5.0, speed: 10.0, desired_speed: 10.0 },
        { id: "other", path: "topo-2", s: 60.0, speed: 12.0, desired_speed: 12.0 },
      ],
    });
    let vm: ViewModel = applySession(initialViewModel(), created.session_id, created.scene, created.state);
    expect(created.scene.lanes.length).toBe(3);

    // live frames over the stream while advancing
    const received: Snapshot[] = [];
    let raw: WebSocket | null = null;
    const socket = connectStream(
      WS_BASE,
      created.session_id,
      { onFrames: (frames) => received.push(...frames) },
      (url) => {
        raw = new WebSocket(url);
        return raw as unknown as ReturnType<typeof Object>;
      },
    );
    await new Promise((resolve) => raw!.once("open", resolve));
    await api.advance(created.session_id, 10);
    const streamDeadline = Date.now() + 10000;
    while (received.length < 10 && Date.now() < streamDeadline) {
      await new Promise((r) => setTimeout(r, 50));
    }
    socket.close();
    expect(received.length).toBeGreaterThanOrEqual(10);
    vm = applyFrames(vm, received);

    // user interaction: select the vehicle, stage the keyframe, submit
    vm = selectVehicle(vm, "edited");
    vm = placeKeyframeDraft(vm, KEYFRAME_POINT, KEYFRAME_TIME, 0.5, 0.0);
    expect(vm.draft).not.toBeNull();
    const submitted = await api.submitKeyframe(
      created.session_id,
      vm.draft!.vehicle,
      vm.draft!.time,
      vm.draft!.point,
      vm.draft!.speed,
    );
    vm = jobSubmitted(vm, submitted.job_id);

    const status = await api.waitForJob(submitted.job_id, 120000);
    expect(status.status).toBe("met");
    vm = jobFinished(vm, status);
    expect(vm.overlay).not.toBeNull();
    expect(vm.jobStatus).toBe("met");

    // the edited trajectory passes within 0.5 m of the keyframe marker
    const distances = vm.overlay!.edited.map((p) =>
      Math.hypot(p[0] - KEYFRAME_POINT[0], p[1] - KEYFRAME_POINT[1]),
    );
    expect(Math.min(...distances)).toBeLessThan(0.5);

    // both overlays render: dashed for original, solid for edited
    const ctx = new CountingContext();
    const t = fitBounds(created.scene.bounds, 960, 480);
    renderScene(ctx, t, vm, 960, 480);
    expect(ctx.strokes).toBeGreaterThan(0);
    expect(ctx.dashes.some((d) => d.length === 2 && d[0] === 8)).toBe(true);
    expect(ctx.dashes.some((d) => d.length === 0)).toBe(true);

    // overlay geometry is drawable under the transform
    const marker = worldToScreen(t, KEYFRAME_POINT);
    expect(marker[0]).toBeGreaterThan(0);
    expect(marker[1]).toBeGreaterThan(0);
  }, 180000);

  it("way-point drawing returns a lane-change shaped overlay", async () => {
    const api = new Api(BASE);
    const created = await api.createSession("curvy_road", { seed: 2 });
    const lane0 = created.scene.lanes[0].centerline;
    const lane2 = created.scene.lanes[2].centerline;
    const planned = await api.planPath(created.session_id, [lane0[1], lane2[20]]);
    expect(planned.polyline.length).toBeGreaterThan(5);
    // the overlay spans from the first lane to the third
    const ys = planned.polyline.map((p) => p[1]);
    const first = planned.polyline[0];
    const last = planned.polyline[planned.polyline.length - 1];
    expect(Math.abs(first[1] - lane0[1][1])).toBeLessThan(1.0);
    expect(Math.abs(last[1] - lane2[20][1])).toBeLessThan(1.0);
    expect(Math.max(...ys) - Math.min(...ys)).toBeGreaterThan(2.0);
  }, 60000);

  it("rejects a way-point in the undrivable area", async () => {
    const api = new Api(BASE);
    const created = await api.createSession("curvy_road", { seed: 3 });
    await expect(
      api.planPath(created.session_id, [[0, 0], [0, 500]]),
    ).rejects.toThrowError(/drivable/);
  }, 60000);
});
