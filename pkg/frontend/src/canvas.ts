// Top-down rendering of the surface: dose heatmap as opacity, the
// semi-transparent region quad with draggable corner handles, and the
// planned sweep path as a blue line strip.

import type { ConsoleState, Point } from "./state";

export interface Viewport {
  canvasWidth: number;
  canvasHeight: number;
  surfaceWidth: number;
  surfaceLength: number;
  margin: number;
}

export function makeViewport(
  canvasWidth: number,
  canvasHeight: number,
  surfaceWidth: number,
  surfaceLength: number,
  margin = 30,
): Viewport {
  return { canvasWidth, canvasHeight, surfaceWidth, surfaceLength, margin };
}

function scale(view: Viewport): number {
  return Math.min(
    (view.canvasWidth - 2 * view.margin) / view.surfaceWidth,
    (view.canvasHeight - 2 * view.margin) / view.surfaceLength,
  );
}

/** Surface (m) -> canvas (px); y grows downward on screen. */
export function toCanvas(view: Viewport, point: Point): Point {
  const s = scale(view);
  return {
    x: view.margin + point.x * s,
    y: view.margin + point.y * s,
  };
}

/** Canvas (px) -> surface (m), clamped to the surface rectangle. */
export function toSurface(view: Viewport, point: Point): Point {
  const s = scale(view);
  const x = (point.x - view.margin) / s;
  const y = (point.y - view.margin) / s;
  return {
    x: Math.min(Math.max(x, 0), view.surfaceWidth),
    y: Math.min(Math.max(y, 0), view.surfaceLength),
  };
}

export function hitVertex(
  view: Viewport,
  vertices: Point[],
  canvasPoint: Point,
  radiusPx = 10,
): number {
  for (let i = 0; i < vertices.length; i++) {
    const p = toCanvas(view, vertices[i]);
    const dx = p.x - canvasPoint.x;
    const dy = p.y - canvasPoint.y;
    if (dx * dx + dy * dy <= radiusPx * radiusPx) return i;
  }
  return -1;
}

export function render(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  state: ConsoleState,
): void {
  ctx.clearRect(0, 0, view.canvasWidth, view.canvasHeight);

  // Surface outline.
  const origin = toCanvas(view, { x: 0, y: 0 });
  const corner = toCanvas(view, { x: view.surfaceWidth, y: view.surfaceLength });
  ctx.fillStyle = "#1c1f26";
  ctx.fillRect(origin.x, origin.y, corner.x - origin.x, corner.y - origin.y);
  ctx.strokeStyle = "#4b5263";
  ctx.strokeRect(origin.x, origin.y, corner.x - origin.x, corner.y - origin.y);

  // Accumulated dose as increasing opacity.
  if (state.heatmap) {
    const { width, height, resolution_m, origin_m, normalized } = state.heatmap;
    const cell = toCanvas(view, { x: origin_m[0] + resolution_m, y: origin_m[1] + resolution_m });
    const base = toCanvas(view, { x: origin_m[0], y: origin_m[1] });
    const cw = cell.x - base.x;
    const ch = cell.y - base.y;
    for (let row = 0; row < height; row++) {
      for (let col = 0; col < width; col++) {
        const value = normalized[row * width + col];
        if (value <= 0) continue;
        ctx.fillStyle = `rgba(130, 90, 255, ${0.85 * value})`;
        const p = toCanvas(view, {
          x: origin_m[0] + col * resolution_m,
          y: origin_m[1] + row * resolution_m,
        });
        ctx.fillRect(p.x, p.y, cw + 0.5, ch + 0.5);
      }
    }
  }

  // Designated region: semi-transparent quad plus draggable corners.
  if (state.vertices.length >= 2) {
    ctx.beginPath();
    state.vertices.forEach((v, i) => {
      const p = toCanvas(view, v);
      if (i === 0) ctx.moveTo(p.x, p.y);
      else ctx.lineTo(p.x, p.y);
    });
    ctx.closePath();
    ctx.fillStyle = "rgba(90, 200, 120, 0.18)";
    ctx.fill();
    ctx.strokeStyle = "rgba(90, 200, 120, 0.9)";
    ctx.stroke();
  }
  for (const vertex of state.vertices) {
    const p = toCanvas(view, vertex);
    ctx.beginPath();
    ctx.arc(p.x, p.y, 5, 0, 2 * Math.PI);
    ctx.fillStyle = "#5ac878";
    ctx.fill();
  }

  // Planned sweep: the blue line strip the beam center will follow.
  if (state.plan) {
    ctx.beginPath();
    state.plan.waypoints.forEach(([x, y], i) => {
      const p = toCanvas(view, { x, y });
      if (i === 0) ctx.moveTo(p.x, p.y);
      else ctx.lineTo(p.x, p.y);
    });
    ctx.strokeStyle = "#4da3ff";
    ctx.lineWidth = 2;
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}
