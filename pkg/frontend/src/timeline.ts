// Timeline math: frame <-> time, tick snapping, scrub clamping.

export interface TimelineSpec {
  dt: number;        // simulation frame duration (s)
  latticeDt: number; // keyframe tick spacing (s)
}

export function frameToTime(spec: TimelineSpec, frame: number): number {
  return frame * spec.dt;
}

export function timeToFrame(spec: TimelineSpec, time: number): number {
  return Math.round(time / spec.dt);
}

/** Tick positions for a timeline spanning [0, horizon] seconds. */
export function tickTimes(spec: TimelineSpec, horizon: number): number[] {
  const out: number[] = [];
  for (let t = 0; t <= horizon + 1e-9; t += spec.latticeDt) {
    out.push(Number(t.toFixed(6)));
  }
  return out;
}

/** Map a click fraction (0..1) of the timeline to a snapped time. */
export function clickToTime(spec: TimelineSpec, fraction: number, horizon: number): number {
  const raw = Math.max(0, Math.min(1, fraction)) * horizon;
  return Math.round(raw / spec.latticeDt) * spec.latticeDt;
}
