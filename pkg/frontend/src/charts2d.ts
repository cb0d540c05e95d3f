/** 2D chart payloads -> drawable primitives (rects, polylines, labels).
 *
 * Pure layout math; the canvas glue rasterizes the primitives.  Numbers
 * shown come straight from the service payloads.
 */

import type { BarPayload, DensityPayload, HistogramPayload } from "./types.js";

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface TickLabel {
  x: number;
  y: number;
  text: string;
}

export interface ChartLayout {
  rects: Rect[];
  polyline: Array<[number, number]>;
  ticks: TickLabel[];
  yMax: number;
}

export interface Margins {
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const DEFAULT_MARGINS: Margins = { left: 36, right: 8, top: 8, bottom: 22 };

function plotArea(width: number, height: number, m: Margins): Rect {
  return {
    x: m.left,
    y: m.top,
    w: Math.max(1, width - m.left - m.right),
    h: Math.max(1, height - m.top - m.bottom),
  };
}

function formatTick(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1000 || abs < 0.01) return v.toExponential(1);
  return Number(v.toPrecision(3)).toString();
}

export function layoutHistogram(
  payload: HistogramPayload,
  width: number,
  height: number,
  margins: Margins = DEFAULT_MARGINS,
): ChartLayout {
  const area = plotArea(width, height, margins);
  const yMax = Math.max(1, ...payload.counts);
  const n = payload.counts.length;
  const rects: Rect[] = payload.counts.map((count, i) => {
    const h = (count / yMax) * area.h;
    return {
      x: area.x + (i / n) * area.w,
      y: area.y + area.h - h,
      w: area.w / n,
      h,
    };
  });
  const ticks: TickLabel[] = [
    { x: area.x, y: height - 6, text: formatTick(payload.edges[0]) },
    { x: area.x + area.w, y: height - 6, text: formatTick(payload.edges[n]) },
    { x: 4, y: area.y + 10, text: formatTick(yMax) },
  ];
  return { rects, polyline: [], ticks, yMax };
}

export function layoutBar(
  payload: BarPayload,
  width: number,
  height: number,
  margins: Margins = DEFAULT_MARGINS,
): ChartLayout {
  const area = plotArea(width, height, margins);
  const values = payload.values.map((v) => v ?? 0);
  const yMax = Math.max(1e-12, ...values);
  const n = values.length;
  const gap = area.w / n / 6;
  const rects: Rect[] = values.map((v, i) => {
    const h = (v / yMax) * area.h;
    return {
      x: area.x + (i / n) * area.w + gap,
      y: area.y + area.h - h,
      w: area.w / n - 2 * gap,
      h,
    };
  });
  const ticks: TickLabel[] = payload.labels.map((text, i) => ({
    x: area.x + ((i + 0.5) / n) * area.w,
    y: height - 6,
    text,
  }));
  ticks.push({ x: 4, y: area.y + 10, text: formatTick(yMax) });
  return { rects, polyline: [], ticks, yMax };
}

export function layoutDensity(
  payload: DensityPayload,
  width: number,
  height: number,
  margins: Margins = DEFAULT_MARGINS,
): ChartLayout {
  const area = plotArea(width, height, margins);
  const yMax = Math.max(1e-12, ...payload.density);
  const xLo = payload.x[0];
  const xHi = payload.x[payload.x.length - 1];
  const span = xHi - xLo || 1;
  const polyline: Array<[number, number]> = payload.x.map((x, i) => [
    area.x + ((x - xLo) / span) * area.w,
    area.y + area.h - (payload.density[i] / yMax) * area.h,
  ]);
  const ticks: TickLabel[] = [
    { x: area.x, y: height - 6, text: formatTick(xLo) },
    { x: area.x + area.w, y: height - 6, text: formatTick(xHi) },
    { x: 4, y: area.y + 10, text: formatTick(yMax) },
  ];
  return { rects: [], polyline, ticks, yMax };
}
