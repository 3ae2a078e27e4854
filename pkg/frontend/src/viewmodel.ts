// The editor's state and its pure transitions. Rendering is a function
// of this state alone; replaying the same message log reproduces the
// same geometry. Nothing here touches the network or the canvas.

import type {
  JobStatus,
  KeyframeDraft,
  Point,
  Scene,
  Snapshot,
} from "./types.js";

export const HISTORY_LIMIT = 5000;

export interface TrajectoryOverlay {
  vehicle: string;
  original: Point[]; // rendered dashed
  edited: Point[];   // rendered solid
  targetPoint: Point;
  met: boolean;
}

export interface ViewModel {
  sessionId: string | null;
  scene: Scene | null;
  frames: Snapshot[];
  cursor: number | null; // scrub position; null = follow live
  playing: boolean;
  selectedVehicle: string | null;
  draft: KeyframeDraft | null;
  waypoints: Point[];
  plannedPath: Point[] | null;
  plannedPathId: string | null;
  overlay: TrajectoryOverlay | null;
  showOriginal: boolean;
  showEdited: boolean;
  lossHistory: number[] | null;
  jobId: string | null;
  jobStatus: string | null;
  warning: string | null;
}

export function initialViewModel(): ViewModel {
  return {
    sessionId: null,
    scene: null,
    frames: [],
    cursor: null,
    playing: false,
    selectedVehicle: null,
    draft: null,
    waypoints: [],
    plannedPath: null,
    plannedPathId: null,
    overlay: null,
    showOriginal: true,
    showEdited: true,
    lossHistory: null,
    jobId: null,
    jobStatus: null,
    warning: null,
  };
}

export function applySession(vm: ViewModel, sessionId: string, scene: Scene, state: Snapshot): ViewModel {
  return { ...initialViewModel(), sessionId, scene, frames: [state] };
}

export function applyFrames(vm: ViewModel, frames: Snapshot[]): ViewModel {
  if (frames.length === 0) return vm;
  const merged = vm.frames.concat(frames);
  return { ...vm, frames: merged.slice(Math.max(0, merged.length - HISTORY_LIMIT)) };
}

/** Frame actually rendered: never beyond the latest received snapshot. */
export function currentFrame(vm: ViewModel): Snapshot | null {
  if (vm.frames.length === 0) return null;
  if (vm.cursor === null) return vm.frames[vm.frames.length - 1];
  return vm.frames[clampCursor(vm, vm.cursor)];
}

export function clampCursor(vm: ViewModel, index: number): number {
  return Math.max(0, Math.min(index, vm.frames.length - 1));
}

export function scrub(vm: ViewModel, index: number): ViewModel {
  if (vm.frames.length === 0) return vm;
  return { ...vm, cursor: clampCursor(vm, index), playing: false };
}

export function resumeLive(vm: ViewModel): ViewModel {
  return { ...vm, cursor: null, playing: true };
}

export function selectVehicle(vm: ViewModel, vehicleId: string | null): ViewModel {
  return { ...vm, selectedVehicle: vehicleId };
}

/** Nearest vehicle to a world point within a pick radius, or null. */
export function pickVehicle(vm: ViewModel, p: Point, radius = 3.0): string | null {
  const frame = currentFrame(vm);
  if (!frame) return null;
  let best: string | null = null;
  let bestDist = radius;
  for (const v of frame.vehicles) {
    if (v.phantom) continue;
    const dist = Math.hypot(v.x - p[0], v.y - p[1]);
    if (dist < bestDist) {
      best = v.id;
      bestDist = dist;
    }
  }
  return best;
}

export function snapToTicks(time: number, latticeDt: number): number {
  return Math.max(latticeDt, Math.round(time / latticeDt) * latticeDt);
}

/**
 * Stage a keyframe draft. The time snaps to the lattice tick grid and
 * must lie in the future of the rendered frame; otherwise the state is
 * unchanged apart from a warning.
 */
export function placeKeyframeDraft(
  vm: ViewModel,
  point: Point,
  time: number,
  latticeDt: number,
  speed?: number,
): ViewModel {
  if (!vm.selectedVehicle) {
    return { ...vm, warning: "select a vehicle before placing a keyframe" };
  }
  const frame = currentFrame(vm);
  const now = frame ? frame.time : 0;
  const snapped = snapToTicks(time, latticeDt);
  if (snapped <= now) {
    return { ...vm, warning: `keyframe time ${snapped.toFixed(1)} s is not in the future` };
  }
  return {
    ...vm,
    warning: null,
    draft: { vehicle: vm.selectedVehicle, point, time: snapped, speed },
  };
}

export function addWaypoint(vm: ViewModel, p: Point): ViewModel {
  return { ...vm, waypoints: vm.waypoints.concat([p]), plannedPath: null, plannedPathId: null };
}

export function clearWaypoints(vm: ViewModel): ViewModel {
  return { ...vm, waypoints: [], plannedPath: null, plannedPathId: null };
}

export function applyPlannedPath(vm: ViewModel, pathId: string, polyline: Point[]): ViewModel {
  return { ...vm, plannedPath: polyline, plannedPathId: pathId };
}

export function jobSubmitted(vm: ViewModel, jobId: string): ViewModel {
  return { ...vm, jobId, jobStatus: "running", warning: null };
}

/**
 * Fold a finished job into the state. Results for superseded jobs are
 * discarded. An unmet result keeps the draft editable and surfaces the
 * closest-approach warning; a met result consumes the draft.
 */
export function jobFinished(vm: ViewModel, status: JobStatus): ViewModel {
  if (vm.jobId !== status.job_id) return vm; // stale result
  if (status.status === "failed" || !status.result) {
    return { ...vm, jobStatus: "failed", warning: status.error ?? "optimization failed" };
  }
  const r = status.result;
  const pick = (snaps: Snapshot[], vehicle: string): Point[] =>
    snaps.map((s) => {
      const v = s.vehicles.find((q) => q.id === vehicle);
      return v ? ([v.x, v.y] as Point) : ([NaN, NaN] as Point);
    });
  const overlay: TrajectoryOverlay = {
    vehicle: status.vehicle,
    original: pick(r.original, status.vehicle),
    edited: pick(r.edited, status.vehicle),
    targetPoint: r.target.point,
    met: r.met,
  };
  const base = {
    ...vm,
    jobStatus: status.status,
    overlay,
    lossHistory: r.loss_history,
  };
  if (status.status === "unmet") {
    return {
      ...base,
      warning: `keyframe unmet: closest approach ${r.closest_approach_m.toFixed(2)} m`,
    };
  }
  return { ...base, draft: null, warning: null };
}
