// Canvas drawing. Everything takes a minimal 2D-context interface so
// tests can record the calls; the browser's CanvasRenderingContext2D
// satisfies it structurally.

import { Transform, worldToScreen } from "./transform.js";
import type { Point, Snapshot, VehiclePayload } from "./types.js";
import { ViewModel, currentFrame } from "./viewmodel.js";

export interface Canvas2D {
  canvas?: { width: number; height: number };
  fillStyle: string | unknown;
  strokeStyle: string | unknown;
  lineWidth: number;
  globalAlpha: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  setLineDash(segments: number[]): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(angle: number): void;
}

const LANE_FILL = "#d8dce1";
const CENTER_DASH = "#9aa1a9";
const VEHICLE_FILL = "#3572b0";
const SELECTED_FILL = "#e8833a";
const PHANTOM_FILL = "#b84a4a";
const KEYFRAME_FILL = "#e8c93a";
const ORIGINAL_STROKE = "#7a8088";
const EDITED_STROKE = "#2b8a3e";
const WAYPOINT_FILL = "#7048b6";

function polyline(ctx: Canvas2D, t: Transform, points: Point[]): void {
  ctx.beginPath();
  points.forEach((p, i) => {
    const [x, y] = worldToScreen(t, p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
}

export function renderLanes(ctx: Canvas2D, t: Transform, vm: ViewModel): void {
  if (!vm.scene) return;
  for (const lane of vm.scene.lanes) {
    ctx.strokeStyle = LANE_FILL;
    ctx.lineWidth = lane.width * t.scale;
    ctx.setLineDash([]);
    polyline(ctx, t, lane.centerline);
    ctx.stroke();
  }
  for (const lane of vm.scene.lanes) {
    ctx.strokeStyle = CENTER_DASH;
    ctx.lineWidth = 1;
    ctx.setLineDash([6, 6]);
    polyline(ctx, t, lane.centerline);
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

export function renderVehicle(
  ctx: Canvas2D,
  t: Transform,
  v: VehiclePayload,
  selected: boolean,
): void {
  const [sx, sy] = worldToScreen(t, [v.x, v.y]);
  ctx.save();
  ctx.translate(sx, sy);
  // screen y points down, so positive world headings rotate clockwise
  ctx.rotate(-v.theta);
  const L = v.length * t.scale;
  const W = v.width * t.scale;
  ctx.fillStyle = v.phantom ? PHANTOM_FILL : selected ? SELECTED_FILL : VEHICLE_FILL;
  ctx.globalAlpha = v.phantom ? 0.45 : 1.0;
  ctx.fillRect(-L / 2, -W / 2, L, W);
  ctx.globalAlpha = 1.0;
  ctx.restore();
}

export function renderOverlays(ctx: Canvas2D, t: Transform, vm: ViewModel): void {
  if (!vm.overlay) return;
  if (vm.showOriginal && vm.overlay.original.length > 1) {
    ctx.strokeStyle = ORIGINAL_STROKE;
    ctx.lineWidth = 2;
    ctx.setLineDash([8, 6]); // original is dashed
    polyline(ctx, t, vm.overlay.original);
    ctx.stroke();
  }
  if (vm.showEdited && vm.overlay.edited.length > 1) {
    ctx.strokeStyle = EDITED_STROKE;
    ctx.lineWidth = 2;
    ctx.setLineDash([]); // edited is solid
    polyline(ctx, t, vm.overlay.edited);
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

export function renderKeyframeMarker(ctx: Canvas2D, t: Transform, vm: ViewModel): void {
  const marks: Point[] = [];
  if (vm.draft) marks.push(vm.draft.point);
  if (vm.overlay) marks.push(vm.overlay.targetPoint);
  for (const p of marks) {
    const [x, y] = worldToScreen(t, p);
    ctx.save();
    ctx.translate(x, y);
    ctx.fillStyle = KEYFRAME_FILL;
    ctx.globalAlpha = 0.85;
    // ghost vehicle footprint at the keyframe position
    ctx.fillRect((-4.5 / 2) * t.scale, (-1.8 / 2) * t.scale, 4.5 * t.scale, 1.8 * t.scale);
    ctx.globalAlpha = 1.0;
    ctx.restore();
  }
}

export function renderWaypoints(ctx: Canvas2D, t: Transform, vm: ViewModel): void {
  ctx.fillStyle = WAYPOINT_FILL;
  for (const p of vm.waypoints) {
    const [x, y] = worldToScreen(t, p);
    ctx.beginPath();
    ctx.arc(x, y, 4, 0, Math.PI * 2);
    ctx.fill();
  }
  if (vm.plannedPath && vm.plannedPath.length > 1) {
    ctx.strokeStyle = WAYPOINT_FILL;
    ctx.lineWidth = 2;
    ctx.setLineDash([3, 3]);
    polyline(ctx, t, vm.plannedPath);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

export function renderScene(ctx: Canvas2D, t: Transform, vm: ViewModel, width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  renderLanes(ctx, t, vm);
  renderWaypoints(ctx, t, vm);
  renderOverlays(ctx, t, vm);
  const frame = currentFrame(vm);
  if (frame) {
    for (const v of frame.vehicles) {
      if (v.finished) continue;
      renderVehicle(ctx, t, v, v.id === vm.selectedVehicle);
    }
  }
  renderKeyframeMarker(ctx, t, vm);
}

/** Tiny loss sparkline in the given screen rectangle (log scale). */
export function renderLossCurve(
  ctx: Canvas2D,
  history: number[],
  x: number,
  y: number,
  w: number,
  h: number,
): void {
  if (history.length < 2) return;
  const logs = history.map((v) => Math.log10(Math.max(v, 1e-9)));
  const lo = Math.min(...logs);
  const hi = Math.max(...logs);
  const span = Math.max(hi - lo, 1e-9);
  ctx.strokeStyle = EDITED_STROKE;
  ctx.lineWidth = 1.5;
  ctx.setLineDash([]);
  ctx.beginPath();
  logs.forEach((v, i) => {
    const px = x + (i / (logs.length - 1)) * w;
    const py = y + h - ((v - lo) / span) * h;
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}
