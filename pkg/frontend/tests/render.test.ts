import { describe, expect, it } from "vitest";

import { Canvas2D, renderScene, renderVehicle } from "../src/render.js";
import { fitBounds, screenToWorld, worldToScreen } from "../src/transform.js";
import { clickToTime, tickTimes } from "../src/timeline.js";
import { applyFrames, applySession, initialViewModel } from "../src/viewmodel.js";
import type { Scene, Snapshot, VehiclePayload } from "../src/types.js";

type Call = { op: string; args: unknown[] };

class RecordingContext implements Canvas2D {
  calls: Call[] = [];
  fillStyle: unknown = "";
  strokeStyle: unknown = "";
  lineWidth = 1;
  globalAlpha = 1;
  private log(op: string, ...args: unknown[]) {
    this.calls.push({ op, args });
  }
  beginPath() { this.log("beginPath"); }
  moveTo(x: number, y: number) { this.log("moveTo", x, y); }
  lineTo(x: number, y: number) { this.log("lineTo", x, y); }
  arc(x: number, y: number, r: number) { this.log("arc", x, y, r); }
  rect(x: number, y: number, w: number, h: number) { this.log("rect", x, y, w, h); }
  fill() { this.log("fill"); }
  stroke() { this.log("stroke"); }
  fillRect(x: number, y: number, w: number, h: number) { this.log("fillRect", x, y, w, h); }
  clearRect(x: number, y: number, w: number, h: number) { this.log("clearRect", x, y, w, h); }
  setLineDash(segments: number[]) { this.log("setLineDash", segments); }
  save() { this.log("save"); }
  restore() { this.log("restore"); }
  translate(x: number, y: number) { this.log("translate", x, y); }
  rotate(angle: number) { this.log("rotate", angle); }
  ops(op: string): Call[] { return this.calls.filter((c) => c.op === op); }
}

const scene: Scene = {
  bounds: [0, 0, 100, 20],
  lanes: [{ id: "L0", width: 3.5, centerline: [[0, 10], [100, 10]] }],
  grid_resolution: 0.5,
  dt: 0.01,
  paths: {},
};

function vehicle(id: string, x: number, y: number, theta = 0): VehiclePayload {
  return {
    id, x, y, theta, s: x, d: 0, vs: 10, vd: 0,
    path_id: "topo-0", width: 1.8, length: 4.5, finished: false, phantom: false,
  };
}

function snap(frame: number, vehicles: VehiclePayload[]): Snapshot {
  return { frame, time: frame * 0.01, vehicles };
}

describe("transform", () => {
  it("fits bounds with margin and uniform scale", () => {
    const t = fitBounds([0, 0, 100, 20], 960, 480);
    expect(t.scale).toBeCloseTo(960 / 110); // x-constrained with 5% margin
    const [sx, sy] = worldToScreen(t, [0, 20]);
    expect(sx).toBeGreaterThan(0);
    expect(sy).toBeGreaterThan(0);
  });

  it("y axis flips: larger world y means smaller screen y", () => {
    const t = fitBounds([0, 0, 100, 20], 960, 480);
    const low = worldToScreen(t, [50, 0]);
    const high = worldToScreen(t, [50, 20]);
    expect(high[1]).toBeLessThan(low[1]);
  });

  it("round-trips screen and world", () => {
    const t = fitBounds([3, -7, 120, 44], 800, 600);
    const p: [number, number] = [37.5, 12.25];
    const back = screenToWorld(t, worldToScreen(t, p));
    expect(back[0]).toBeCloseTo(p[0], 9);
    expect(back[1]).toBeCloseTo(p[1], 9);
  });
});

describe("timeline", () => {
  it("snaps clicks to lattice ticks", () => {
    const spec = { dt: 0.01, latticeDt: 0.5 };
    expect(clickToTime(spec, 0.41, 20)).toBeCloseTo(8.0);
    expect(clickToTime(spec, 1.2, 20)).toBeCloseTo(20.0); // clamped
  });

  it("enumerates ticks", () => {
    expect(tickTimes({ dt: 0.01, latticeDt: 0.5 }, 2.0)).toEqual([0, 0.5, 1, 1.5, 2]);
  });
});

describe("rendering", () => {
  it("empty scene clears the canvas and draws the lane band", () => {
    const vm = applySession(initialViewModel(), "s", scene, snap(0, []));
    const ctx = new RecordingContext();
    const t = fitBounds(scene.bounds, 960, 480);
    renderScene(ctx, t, vm, 960, 480);
    expect(ctx.ops("clearRect").length).toBe(1);
    // lane band stroked with the lane width in pixels
    expect(ctx.ops("stroke").length).toBeGreaterThanOrEqual(2);
  });

  it("vehicle renders as an oriented rectangle", () => {
    const ctx = new RecordingContext();
    const t = fitBounds(scene.bounds, 960, 480);
    renderVehicle(ctx, t, vehicle("a", 50, 10, Math.PI / 2), false);
    const [translate] = ctx.ops("translate");
    const expected = worldToScreen(t, [50, 10]);
    expect(translate.args[0]).toBeCloseTo(expected[0]);
    expect(translate.args[1]).toBeCloseTo(expected[1]);
    const [rotate] = ctx.ops("rotate");
    expect(rotate.args[0]).toBeCloseTo(-Math.PI / 2); // y-down screen
    const [rect] = ctx.ops("fillRect");
    expect(rect.args[2]).toBeCloseTo(4.5 * t.scale); // length
    expect(rect.args[3]).toBeCloseTo(1.8 * t.scale); // width
  });

  it("keyframe draft renders a ghost marker at its point", () => {
    let vm = applySession(initialViewModel(), "s", scene, snap(0, [vehicle("a", 5, 10)]));
    vm = { ...vm, selectedVehicle: "a", draft: { vehicle: "a", point: [60, 10], time: 8, speed: 0 } };
    const ctx = new RecordingContext();
    const t = fitBounds(scene.bounds, 960, 480);
    renderScene(ctx, t, vm, 960, 480);
    const marker = worldToScreen(t, [60, 10]);
    const ghost = ctx.ops("translate").find(
      (c) => Math.abs((c.args[0] as number) - marker[0]) < 1e-6
        && Math.abs((c.args[1] as number) - marker[1]) < 1e-6,
    );
    expect(ghost).toBeDefined();
  });

  it("original overlay is dashed, edited overlay is solid", () => {
    let vm = applySession(initialViewModel(), "s", scene, snap(0, [vehicle("a", 5, 10)]));
    vm = {
      ...vm,
      overlay: {
        vehicle: "a",
        original: [[5, 10], [20, 10]],
        edited: [[5, 10], [22, 11]],
        targetPoint: [22, 11],
        met: true,
      },
    };
    const ctx = new RecordingContext();
    const t = fitBounds(scene.bounds, 960, 480);
    renderScene(ctx, t, vm, 960, 480);
    const dashCalls = ctx.ops("setLineDash").map((c) => c.args[0] as number[]);
    expect(dashCalls.some((d) => d.length === 2 && d[0] === 8)).toBe(true); // dashed original
    expect(dashCalls.some((d) => d.length === 0)).toBe(true);              // solid edited
  });

  it("scrubbed frame renders historical positions", () => {
    let vm = applySession(initialViewModel(), "s", scene, snap(0, [vehicle("a", 5, 10)]));
    vm = applyFrames(vm, [snap(1, [vehicle("a", 6, 10)]), snap(2, [vehicle("a", 7, 10)])]);
    vm = { ...vm, cursor: 0 };
    const ctx = new RecordingContext();
    const t = fitBounds(scene.bounds, 960, 480);
    renderScene(ctx, t, vm, 960, 480);
    const expected = worldToScreen(t, [5, 10]);
    const match = ctx.ops("translate").find(
      (c) => Math.abs((c.args[0] as number) - expected[0]) < 1e-6,
    );
    expect(match).toBeDefined();
  });
});
