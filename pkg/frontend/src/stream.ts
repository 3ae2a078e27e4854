// Frame stream over a WebSocket. The socket constructor is injectable
// so tests can run outside a browser.

import type { Snapshot } from "./types.js";

export interface SocketLike {
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamHandlers {
  onFrames: (frames: Snapshot[]) => void;
  onJobDone?: (jobId: string, status: string) => void;
  onClose?: () => void;
}

export function connectStream(
  baseWsUrl: string,
  sessionId: string,
  handlers: StreamHandlers,
  factory?: SocketFactory,
): SocketLike {
  const make: SocketFactory =
    factory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
  const socket = make(`${baseWsUrl}/sessions/${sessionId}/stream`);
  socket.onmessage = (ev) => {
    let payload: unknown = ev.data;
    // node ws clients can deliver text frames as byte buffers
    if (payload && typeof payload === "object" && !("frames" in payload) && !("job_done" in payload)) {
      payload = String(payload);
    }
    if (typeof payload === "string") {
      try {
        payload = JSON.parse(payload);
      } catch {
        return;
      }
    }
    const msg = payload as { frames?: Snapshot[]; job_done?: string; status?: string };
    if (Array.isArray(msg.frames)) handlers.onFrames(msg.frames);
    else if (msg.job_done && handlers.onJobDone) handlers.onJobDone(msg.job_done, msg.status ?? "");
  };
  socket.onclose = () => handlers.onClose?.();
  return socket;
}
