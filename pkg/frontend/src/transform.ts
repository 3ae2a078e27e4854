// World-to-screen mapping: uniform scale, y-up world to y-down screen,
// fit to the scene bounds with a 5% margin.

import type { Point } from "./types.js";

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
  // world-space y of the screen-space origin row (for the flip)
  worldTop: number;
}

export const FIT_MARGIN = 0.05;

export function fitBounds(
  bounds: [number, number, number, number],
  canvasWidth: number,
  canvasHeight: number,
): Transform {
  const [xmin, ymin, xmax, ymax] = bounds;
  const spanX = Math.max(xmax - xmin, 1e-9);
  const spanY = Math.max(ymax - ymin, 1e-9);
  const scale = Math.min(
    canvasWidth / (spanX * (1 + 2 * FIT_MARGIN)),
    canvasHeight / (spanY * (1 + 2 * FIT_MARGIN)),
  );
  // center the scene
  const offsetX = (canvasWidth - spanX * scale) / 2 - xmin * scale;
  const offsetY = (canvasHeight - spanY * scale) / 2;
  return { scale, offsetX, offsetY, worldTop: ymax };
}

export function worldToScreen(t: Transform, p: Point): Point {
  return [p[0] * t.scale + t.offsetX, (t.worldTop - p[1]) * t.scale + t.offsetY];
}

export function screenToWorld(t: Transform, p: Point): Point {
  return [(p[0] - t.offsetX) / t.scale, t.worldTop - (p[1] - t.offsetY) / t.scale];
}
