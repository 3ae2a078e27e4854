// Payload schemas of the session server. Geometry in meters, times in
// seconds, frame indices integral.

export type Point = [number, number];

export interface LanePayload {
  id: string;
  width: number;
  centerline: Point[];
}

export interface Scene {
  bounds: [number, number, number, number]; // xmin, ymin, xmax, ymax
  lanes: LanePayload[];
  grid_resolution: number;
  dt: number;
  paths: Record<string, Point[]>;
}

export interface VehiclePayload {
  id: string;
  x: number;
  y: number;
  theta: number;
  s: number;
  d: number;
  vs: number;
  vd: number;
  path_id: string;
  width: number;
  length: number;
  finished: boolean;
  phantom: boolean;
}

export interface Snapshot {
  frame: number;
  time: number;
  vehicles: VehiclePayload[];
}

export interface KeyframeTarget {
  frame: number;
  s: number;
  point: Point;
}

export interface JobResult {
  met: boolean;
  keyframe_errors_m: number[];
  closest_approach_m: number;
  iterations: number;
  loss_history: number[];
  path_id: string;
  horizon_frames: number;
  target: KeyframeTarget;
  original: Snapshot[];
  edited: Snapshot[];
}

export interface JobStatus {
  job_id: string;
  status: "running" | "met" | "unmet" | "failed";
  vehicle: string;
  error?: string;
  result?: JobResult;
}

export interface PlannedPath {
  path_id: string;
  length: number;
  polyline: Point[];
}

export interface KeyframeDraft {
  vehicle: string;
  point: Point;
  time: number;
  speed?: number;
}
