// REST client for the session server.

import type { JobStatus, PlannedPath, Point, Scene, Snapshot } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      detail = body.detail ?? detail;
    } catch {
      // leave statusText
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export interface SessionCreated {
  session_id: string;
  scene: Scene;
  state: Snapshot;
}

export class Api {
  constructor(public baseUrl: string) {}

  createSession(scenario: string, options: Record<string, unknown> = {}): Promise<SessionCreated> {
    return request(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: JSON.stringify({ scenario, ...options }),
    });
  }

  getState(sessionId: string): Promise<{ state: Snapshot; scene: Scene; has_edit: boolean }> {
    return request(`${this.baseUrl}/sessions/${sessionId}/state`);
  }

  advance(sessionId: string, frames: number): Promise<{ frames: Snapshot[]; frame: number }> {
    return request(`${this.baseUrl}/sessions/${sessionId}/advance`, {
      method: "POST",
      body: JSON.stringify({ frames }),
    });
  }

  planPath(sessionId: string, waypoints: Point[]): Promise<PlannedPath> {
    return request(`${this.baseUrl}/sessions/${sessionId}/paths`, {
      method: "POST",
      body: JSON.stringify({ waypoints }),
    });
  }

  submitKeyframe(
    sessionId: string,
    vehicle: string,
    time: number,
    point: Point,
    speed?: number,
    iters?: number,
  ): Promise<{ job_id: string; status: string }> {
    return request(`${this.baseUrl}/sessions/${sessionId}/keyframes`, {
      method: "POST",
      body: JSON.stringify({ vehicle, time, point, speed, iters }),
    });
  }

  getJob(jobId: string): Promise<JobStatus> {
    return request(`${this.baseUrl}/jobs/${jobId}`);
  }

  async waitForJob(jobId: string, timeoutMs = 120000, pollMs = 200): Promise<JobStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const status = await this.getJob(jobId);
      if (status.status !== "running") return status;
      if (Date.now() > deadline) throw new Error(`job ${jobId} timed out`);
      await new Promise((r) => setTimeout(r, pollMs));
    }
  }
}
