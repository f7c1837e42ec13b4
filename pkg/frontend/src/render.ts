/** Canvas rendering: metric-grid map with drone markers, trails and blob
 * marker, plus the confidence time series against the T line. Pure functions
 * of (context, model, viewport); no state of their own. */

import { ConsoleModel, Point } from "./model";

export interface Viewport {
  /** World coordinates of the canvas center. */
  centerX: number;
  centerY: number;
  /** Pixels per meter. */
  scale: number;
  width: number;
  height: number;
}

export function worldToCanvas(v: Viewport, p: Point): Point {
  return {
    x: v.width / 2 + (p.x - v.centerX) * v.scale,
    y: v.height / 2 - (p.y - v.centerY) * v.scale, // y up in world, down on canvas
  };
}

export function canvasToWorld(v: Viewport, p: Point): Point {
  return {
    x: v.centerX + (p.x - v.width / 2) / v.scale,
    y: v.centerY - (p.y - v.height / 2) / v.scale,
  };
}

type Ctx = CanvasRenderingContext2D;

function drawTrail(ctx: Ctx, v: Viewport, trail: Point[], style: string): void {
  if (trail.length < 2) return;
  ctx.strokeStyle = style;
  ctx.lineWidth = 1;
  ctx.beginPath();
  const first = worldToCanvas(v, trail[0]);
  ctx.moveTo(first.x, first.y);
  for (const p of trail.slice(1)) {
    const q = worldToCanvas(v, p);
    ctx.lineTo(q.x, q.y);
  }
  ctx.stroke();
}

function drawGrid(ctx: Ctx, v: Viewport, stepMeters = 10): void {
  ctx.strokeStyle = "#223";
  ctx.lineWidth = 0.5;
  const left = canvasToWorld(v, { x: 0, y: 0 }).x;
  const right = canvasToWorld(v, { x: v.width, y: 0 }).x;
  const top = canvasToWorld(v, { x: 0, y: 0 }).y;
  const bottom = canvasToWorld(v, { x: 0, y: v.height }).y;
  for (let x = Math.ceil(left / stepMeters) * stepMeters; x <= right; x += stepMeters) {
    const a = worldToCanvas(v, { x, y: top });
    ctx.beginPath();
    ctx.moveTo(a.x, 0);
    ctx.lineTo(a.x, v.height);
    ctx.stroke();
  }
  for (let y = Math.ceil(bottom / stepMeters) * stepMeters; y <= top; y += stepMeters) {
    const a = worldToCanvas(v, { x: left, y });
    ctx.beginPath();
    ctx.moveTo(0, a.y);
    ctx.lineTo(v.width, a.y);
    ctx.stroke();
  }
}

export function drawMap(ctx: Ctx, model: ConsoleModel, v: Viewport): void {
  ctx.fillStyle = "#0b0e14";
  ctx.fillRect(0, 0, v.width, v.height);
  drawGrid(ctx, v);
  drawTrail(ctx, v, model.centroidTrail, "#3a6ea5");
  for (const trail of model.droneTrails.values()) {
    drawTrail(ctx, v, trail, "#2d4a33");
  }
  drawTrail(ctx, v, model.estimateTrail, "#a53a3a");

  const update = model.latest;
  if (!update) return;
  for (const d of update.drones) {
    const p = worldToCanvas(v, { x: d.x, y: d.y });
    ctx.fillStyle = "#7fd17f";
    ctx.beginPath();
    ctx.arc(p.x, p.y, 4, 0, 2 * Math.PI);
    ctx.fill();
    // heading glyph: short line in the flight direction (clockwise from north)
    const rad = (d.heading * Math.PI) / 180;
    ctx.strokeStyle = "#7fd17f";
    ctx.beginPath();
    ctx.moveTo(p.x, p.y);
    ctx.lineTo(p.x + 10 * Math.sin(rad), p.y - 10 * Math.cos(rad));
    ctx.stroke();
  }
  if (update.blob && (update.verdict === "correct" || update.verdict === "wrong")) {
    const p = worldToCanvas(v, { x: update.blob.x, y: update.blob.y });
    ctx.strokeStyle = update.verdict === "correct" ? "#ffd166" : "#ef476f";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(p.x - 6, p.y - 6);
    ctx.lineTo(p.x + 6, p.y + 6);
    ctx.moveTo(p.x - 6, p.y + 6);
    ctx.lineTo(p.x + 6, p.y - 6);
    ctx.stroke();
  }
  if (update.gt) {
    const p = worldToCanvas(v, { x: update.gt[0], y: update.gt[1] });
    ctx.strokeStyle = "#888";
    ctx.strokeRect(p.x - 5, p.y - 5, 10, 10);
  }
}

export function drawConfidenceChart(
  ctx: Ctx,
  model: ConsoleModel,
  width: number,
  height: number,
  windowSize = 200,
): void {
  ctx.fillStyle = "#0b0e14";
  ctx.fillRect(0, 0, width, height);
  const series = model.confidenceSeries.slice(-windowSize);
  if (series.length === 0) return;
  const t = series[series.length - 1].T;
  const maxC = Math.max(t * 2, ...series.map((p) => p.confidence));
  const toY = (c: number) => height - (c / maxC) * (height - 10) - 5;
  const toX = (i: number) => (i / Math.max(series.length - 1, 1)) * (width - 10) + 5;

  // threshold line
  ctx.strokeStyle = "#ef476f";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(0, toY(t));
  ctx.lineTo(width, toY(t));
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.strokeStyle = "#7fd17f";
  ctx.beginPath();
  ctx.moveTo(toX(0), toY(series[0].confidence));
  series.forEach((p, i) => ctx.lineTo(toX(i), toY(p.confidence)));
  ctx.stroke();
}

/** Decode a base64 binary graymap payload into ImageData for the panels. */
export function thumbnailToImageData(
  data: string,
  width: number,
  height: number,
): ImageData {
  const bytes = atob(data);
  // header: "P5\n<w> <h>\n<max>\n" then raw pixels
  let cursor = 0;
  let newlines = 0;
  while (newlines < 3 && cursor < bytes.length) {
    if (bytes[cursor] === "\n") newlines += 1;
    cursor += 1;
  }
  const image = new ImageData(width, height);
  for (let i = 0; i < width * height; i += 1) {
    const value = bytes.charCodeAt(cursor + i);
    image.data[4 * i] = value;
    image.data[4 * i + 1] = value;
    image.data[4 * i + 2] = value;
    image.data[4 * i + 3] = 255;
  }
  return image;
}
