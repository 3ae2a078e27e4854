// Browser entry point: wires the canvas, the toolbar, the timeline and
// the session stream to the pure view-model and render modules.

import { Api } from "./api.js";
import { Canvas2D, renderLossCurve, renderScene } from "./render.js";
import { connectStream } from "./stream.js";
import { Transform, fitBounds, screenToWorld } from "./transform.js";
import { clickToTime } from "./timeline.js";
import type { Point } from "./types.js";
import {
  ViewModel,
  addWaypoint,
  applyFrames,
  applyPlannedPath,
  applySession,
  clearWaypoints,
  currentFrame,
  initialViewModel,
  jobFinished,
  jobSubmitted,
  pickVehicle,
  placeKeyframeDraft,
  resumeLive,
  scrub,
  selectVehicle,
} from "./viewmodel.js";

const LATTICE_DT = 0.5;
const FRAMES_PER_TICK = 5;

type Mode = "select" | "keyframe" | "waypoints";

class EditorApp {
  vm: ViewModel = initialViewModel();
  transform: Transform | null = null;
  mode: Mode = "select";
  draftTime = 8.0;
  horizon = 20.0;
  playTimer: number | null = null;

  constructor(
    private api: Api,
    private wsBase: string,
    private canvas: HTMLCanvasElement,
    private status: HTMLElement,
    private timeline: HTMLInputElement,
  ) {}

  async load(scenario: string): Promise<void> {
    const created = await this.api.createSession(scenario);
    this.vm = applySession(this.vm, created.session_id, created.scene, created.state);
    this.transform = fitBounds(created.scene.bounds, this.canvas.width, this.canvas.height);
    connectStream(this.wsBase, created.session_id, {
      onFrames: (frames) => {
        this.vm = applyFrames(this.vm, frames);
        this.draw();
      },
      onJobDone: (jobId) => void this.finishJob(jobId),
    });
    this.draw();
  }

  async finishJob(jobId: string): Promise<void> {
    const result = await this.api.getJob(jobId);
    this.vm = jobFinished(this.vm, result);
    this.draw();
  }

  play(): void {
    if (this.playTimer !== null || !this.vm.sessionId) return;
    this.vm = resumeLive(this.vm);
    const tick = async () => {
      if (!this.vm.playing || !this.vm.sessionId) return;
      try {
        await this.api.advance(this.vm.sessionId, FRAMES_PER_TICK);
      } catch {
        // a running optimization blocks advancing; pause and retry later
      }
      this.playTimer = window.setTimeout(tick, 1000 * FRAMES_PER_TICK * (this.vm.scene?.dt ?? 0.01));
    };
    void tick();
  }

  pause(): void {
    this.vm = { ...this.vm, playing: false };
    if (this.playTimer !== null) {
      clearTimeout(this.playTimer);
      this.playTimer = null;
    }
  }

  onCanvasClick(x: number, y: number): void {
    if (!this.transform) return;
    const world = screenToWorld(this.transform, [x, y]);
    if (this.mode === "select") {
      this.vm = selectVehicle(this.vm, pickVehicle(this.vm, world));
    } else if (this.mode === "keyframe") {
      this.vm = placeKeyframeDraft(this.vm, world, this.draftTime, LATTICE_DT);
    } else {
      this.vm = addWaypoint(this.vm, world);
    }
    this.draw();
  }

  onTimelineInput(fraction: number): void {
    const frames = this.vm.frames.length;
    if (frames > 0) {
      this.vm = scrub(this.vm, Math.round(fraction * (frames - 1)));
      this.draw();
    }
  }

  timelineClickTime(fraction: number): number {
    this.draftTime = clickToTime({ dt: this.vm.scene?.dt ?? 0.01, latticeDt: LATTICE_DT }, fraction, this.horizon);
    return this.draftTime;
  }

  async submitKeyframe(): Promise<void> {
    const draft = this.vm.draft;
    if (!draft || !this.vm.sessionId) return;
    try {
      const out = await this.api.submitKeyframe(
        this.vm.sessionId, draft.vehicle, draft.time, draft.point, draft.speed,
      );
      this.vm = jobSubmitted(this.vm, out.job_id);
    } catch (err) {
      this.vm = { ...this.vm, warning: String(err) };
    }
    this.draw();
  }

  async planWaypoints(): Promise<void> {
    if (this.vm.waypoints.length < 2 || !this.vm.sessionId) return;
    try {
      const planned = await this.api.planPath(this.vm.sessionId, this.vm.waypoints);
      this.vm = applyPlannedPath(this.vm, planned.path_id, planned.polyline as Point[]);
    } catch (err) {
      this.vm = { ...this.vm, warning: String(err) };
    }
    this.draw();
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d") as unknown as Canvas2D | null;
    if (!ctx || !this.transform) return;
    renderScene(ctx, this.transform, this.vm, this.canvas.width, this.canvas.height);
    if (this.vm.lossHistory) {
      renderLossCurve(ctx, this.vm.lossHistory, this.canvas.width - 160, 10, 150, 60);
    }
    const frame = currentFrame(this.vm);
    const bits = [
      this.vm.sessionId ? `session ${this.vm.sessionId}` : "no session",
      frame ? `t = ${frame.time.toFixed(2)} s (frame ${frame.frame})` : "",
      this.vm.selectedVehicle ? `selected ${this.vm.selectedVehicle}` : "",
      this.vm.jobStatus ? `job: ${this.vm.jobStatus}` : "",
      this.vm.warning ? `! ${this.vm.warning}` : "",
    ].filter(Boolean);
    this.status.textContent = bits.join("  |  ");
    if (this.vm.frames.length > 1) {
      const cursor = this.vm.cursor ?? this.vm.frames.length - 1;
      this.timeline.value = String(cursor / (this.vm.frames.length - 1));
    }
  }
}

export function boot(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const status = document.getElementById("status") as HTMLElement;
  const timeline = document.getElementById("timeline") as HTMLInputElement;
  const base = `${location.protocol}//${location.hostname}:8008`;
  const wsBase = `ws://${location.hostname}:8008`;
  const app = new EditorApp(new Api(base), wsBase, canvas, status, timeline);

  canvas.addEventListener("click", (ev) => {
    const rect = canvas.getBoundingClientRect();
    app.onCanvasClick(ev.clientX - rect.left, ev.clientY - rect.top);
  });
  timeline.addEventListener("input", () => app.onTimelineInput(Number(timeline.value)));
  (document.getElementById("mode-select") as HTMLButtonElement).onclick = () => (app.mode = "select");
  (document.getElementById("mode-keyframe") as HTMLButtonElement).onclick = () => (app.mode = "keyframe");
  (document.getElementById("mode-waypoints") as HTMLButtonElement).onclick = () => (app.mode = "waypoints");
  (document.getElementById("play") as HTMLButtonElement).onclick = () => app.play();
  (document.getElementById("pause") as HTMLButtonElement).onclick = () => app.pause();
  (document.getElementById("optimize") as HTMLButtonElement).onclick = () => void app.submitKeyframe();
  (document.getElementById("plan") as HTMLButtonElement).onclick = () => void app.planWaypoints();
  (document.getElementById("clear") as HTMLButtonElement).onclick = () => {
    app.vm = clearWaypoints(app.vm);
    app.draw();
  };
  const timeBox = document.getElementById("kf-time") as HTMLInputElement;
  timeBox.addEventListener("change", () => (app.draftTime = Number(timeBox.value)));
  const scenarioBox = document.getElementById("scenario") as HTMLSelectElement;
  (document.getElementById("load") as HTMLButtonElement).onclick = () => void app.load(scenarioBox.value);
}

if (typeof document !== "undefined" && document.getElementById("scene")) {
  boot();
}
