// Canvas renderer: two stacked panels on a shared x axis, intensity on
// top and the mirror displacement field below, with beam markers and a
// steady-state indicator.  Pixel transforms are exported so the click
// handler and the tests can invert them.

import { ViewState } from "./state.js";

export const MARGIN_LEFT = 52;
export const MARGIN_RIGHT = 14;
export const MARGIN_TOP = 12;
export const MARGIN_BOTTOM = 26;
const PANEL_GAP = 18;
const INTENSITY_SHARE = 0.55;

const COLOR_INTENSITY = "#2b6cb0";
const COLOR_Z = "#c05621";
const COLOR_WRITE = "#2f855a";
const COLOR_ERASE = "#c53030";
const COLOR_PENDING = "#a0aec0";
const COLOR_PLATEAU = "rgba(120, 144, 180, 0.12)";
const COLOR_AXIS = "#4a5568";

export function xToPx(
  x: number,
  xmin: number,
  xmax: number,
  width: number,
): number {
  const span = xmax - xmin || 1;
  return MARGIN_LEFT + ((x - xmin) / span) * (width - MARGIN_LEFT - MARGIN_RIGHT);
}

export function pxToX(
  px: number,
  xmin: number,
  xmax: number,
  width: number,
): number {
  const span = width - MARGIN_LEFT - MARGIN_RIGHT || 1;
  return xmin + ((px - MARGIN_LEFT) / span) * (xmax - xmin);
}

interface Panel {
  top: number;
  height: number;
  lo: number;
  hi: number;
}

function yToPx(v: number, panel: Panel): number {
  const span = panel.hi - panel.lo || 1;
  return panel.top + (1 - (v - panel.lo) / span) * panel.height;
}

function panels(height: number, state: ViewState): { top: Panel; bottom: Panel } {
  const usable = height - MARGIN_TOP - MARGIN_BOTTOM - PANEL_GAP;
  const hTop = usable * INTENSITY_SHARE;
  const pad = 0.05;
  const iMax = state.ranges.intensityMax * (1 + pad);
  const zSpan = state.ranges.zMax - state.ranges.zMin;
  return {
    top: { top: MARGIN_TOP, height: hTop, lo: 0, hi: iMax },
    bottom: {
      top: MARGIN_TOP + hTop + PANEL_GAP,
      height: usable - hTop,
      lo: state.ranges.zMin - pad * zSpan,
      hi: state.ranges.zMax + pad * zSpan,
    },
  };
}

function polyline(
  ctx: CanvasRenderingContext2D,
  xbar: Float32Array,
  values: Float32Array,
  panel: Panel,
  width: number,
  color: string,
): void {
  const xmin = xbar[0];
  const xmax = xbar[xbar.length - 1];
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  ctx.moveTo(xToPx(xbar[0], xmin, xmax, width), yToPx(values[0], panel));
  for (let i = 1; i < values.length; i++) {
    ctx.lineTo(xToPx(xbar[i], xmin, xmax, width), yToPx(values[i], panel));
  }
  ctx.stroke();
}

function axisLabels(
  ctx: CanvasRenderingContext2D,
  panel: Panel,
  label: string,
): void {
  ctx.fillStyle = COLOR_AXIS;
  ctx.font = "11px sans-serif";
  ctx.textAlign = "right";
  ctx.fillText(panel.hi.toFixed(2), MARGIN_LEFT - 6, panel.top + 10);
  ctx.fillText(panel.lo.toFixed(2), MARGIN_LEFT - 6, panel.top + panel.height);
  ctx.textAlign = "left";
  ctx.fillText(label, MARGIN_LEFT + 4, panel.top + 12);
}

function beamMarker(
  ctx: CanvasRenderingContext2D,
  px: number,
  topPanel: Panel,
  bottomPanel: Panel,
  color: string,
  dashed: boolean,
): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.2;
  ctx.setLineDash(dashed ? [4, 4] : []);
  ctx.beginPath();
  ctx.moveTo(px, topPanel.top);
  ctx.lineTo(px, bottomPanel.top + bottomPanel.height);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.moveTo(px - 5, topPanel.top);
  ctx.lineTo(px + 5, topPanel.top);
  ctx.lineTo(px, topPanel.top + 8);
  ctx.fill();
}

export function renderFrame(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  state: ViewState,
): void {
  ctx.clearRect(0, 0, width, height);
  const frame = state.frame;
  const xbar = state.xbar;
  if (frame === null || xbar === null) {
    ctx.fillStyle = COLOR_AXIS;
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("waiting for frames", width / 2, height / 2);
    return;
  }
  const { top, bottom } = panels(height, state);
  const xmin = xbar[0];
  const xmax = xbar[xbar.length - 1];

  if (state.sigmaX !== null) {
    const left = xToPx(Math.max(-state.sigmaX, xmin), xmin, xmax, width);
    const right = xToPx(Math.min(state.sigmaX, xmax), xmin, xmax, width);
    ctx.fillStyle = COLOR_PLATEAU;
    ctx.fillRect(left, top.top, right - left, top.height);
    ctx.fillRect(left, bottom.top, right - left, bottom.height);
  }

  // zero line of the displacement panel
  ctx.strokeStyle = "#cbd5e0";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(MARGIN_LEFT, yToPx(0, bottom));
  ctx.lineTo(width - MARGIN_RIGHT, yToPx(0, bottom));
  ctx.stroke();

  polyline(ctx, xbar, frame.intensity, top, width, COLOR_INTENSITY);
  polyline(ctx, xbar, frame.Z, bottom, width, COLOR_Z);
  axisLabels(ctx, top, "|F|²");
  axisLabels(ctx, bottom, "Z");

  ctx.fillStyle = COLOR_AXIS;
  ctx.font = "11px sans-serif";
  ctx.textAlign = "center";
  const y = height - MARGIN_BOTTOM + 14;
  ctx.fillText(xmin.toFixed(0), xToPx(xmin, xmin, xmax, width), y);
  ctx.fillText("0", xToPx(0, xmin, xmax, width), y);
  ctx.fillText(xmax.toFixed(0), xToPx(xmax, xmin, xmax, width), y);

  for (const b of frame.beams) {
    const color = Math.abs(b.phase) < Math.PI / 2 ? COLOR_WRITE : COLOR_ERASE;
    beamMarker(ctx, xToPx(b.x0, xmin, xmax, width), top, bottom, color, false);
  }
  for (const p of state.pending) {
    const color = p.acked
      ? Math.abs(p.phase) < Math.PI / 2 ? COLOR_WRITE : COLOR_ERASE
      : COLOR_PENDING;
    beamMarker(ctx, xToPx(p.x0, xmin, xmax, width), top, bottom, color, true);
  }

  ctx.textAlign = "left";
  ctx.fillStyle = COLOR_AXIS;
  ctx.font = "12px sans-serif";
  ctx.fillText(`τ = ${frame.tau.toFixed(1)}`, MARGIN_LEFT + 4, height - 8);

  ctx.beginPath();
  ctx.arc(width - 70, 16, 5, 0, 2 * Math.PI);
  ctx.fillStyle = frame.steady ? "#38a169" : "#cbd5e0";
  ctx.fill();
  ctx.fillStyle = COLOR_AXIS;
  ctx.fillText(frame.steady ? "steady" : "evolving", width - 60, 20);
}
