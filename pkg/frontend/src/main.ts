// Bootstrap: owns the socket, the DOM controls, and the single render
// loop.  Incoming messages land in one ordered queue that the loop drains
// each animation frame, so only the newest frame is ever drawn.

import { SessionCmd } from "./protocol.js";
import {
  Mode,
  clickToBeam,
  flushOutbox,
  handleClose,
  handleMessage,
  handleOpen,
  initialState,
  noteSent,
  queueCommand,
  sampleAt,
} from "./state.js";
import { pxToX, renderFrame } from "./render.js";

const canvas = document.getElementById("plot") as HTMLCanvasElement;
const ctx = canvas.getContext("2d") as CanvasRenderingContext2D;
const statusEl = document.getElementById("status") as HTMLSpanElement;
const messageEl = document.getElementById("message") as HTMLSpanElement;
const readoutEl = document.getElementById("readout") as HTMLSpanElement;
const serverEl = document.getElementById("server") as HTMLInputElement;
const presetEl = document.getElementById("preset") as HTMLSelectElement;
const rateEl = document.getElementById("rate") as HTMLInputElement;
const ampEl = document.getElementById("amp") as HTMLInputElement;
const widthEl = document.getElementById("width") as HTMLInputElement;
const pumpEl = document.getElementById("pump") as HTMLInputElement;

const state = initialState();
const inbox: string[] = [];
let ws: WebSocket | null = null;
let warningUntil = 0;

function serverUrl(): string {
  if (serverEl.value.trim() !== "") {
    return serverEl.value.trim();
  }
  if (location.protocol.startsWith("http")) {
    return `ws://${location.host}/`;
  }
  return "ws://127.0.0.1:8765/";
}

function send(cmd: SessionCmd): void {
  if (ws !== null && ws.readyState === WebSocket.OPEN) {
    ws.send(JSON.stringify(cmd));
    noteSent(state, cmd);
  } else {
    queueCommand(state, cmd, Date.now());
    flashWarning("not connected, command queued");
  }
}

function connect(): void {
  state.status = "connecting";
  ws = new WebSocket(serverUrl());
  ws.addEventListener("open", () => {
    handleOpen(state);
    if (state.configured !== null) {
      // a new connection is a fresh server session, so restore it
      const conf = state.configured;
      send({
        type: "configure",
        ...(conf.preset !== undefined
          ? { preset: conf.preset }
          : { config: conf.config }),
        tau_rate: conf.tauRate,
      });
      send({ type: "start" });
    }
    for (const cmd of flushOutbox(state, Date.now())) {
      send(cmd);
    }
  });
  ws.addEventListener("message", (ev) => inbox.push(String(ev.data)));
  ws.addEventListener("close", () => {
    handleClose(state);
    ws = null;
    window.setTimeout(connect, 1000);
  });
}

function flashWarning(text: string): void {
  messageEl.textContent = text;
  messageEl.className = "warn";
  warningUntil = Date.now() + 4000;
}

function updateStatus(): void {
  statusEl.textContent = state.status + (state.proto !== null ? " (proto " + state.proto + ")" : "");
  statusEl.className = state.status;
  if (state.fatal !== null) {
    messageEl.textContent = "simulation diverged: " + state.fatal;
    messageEl.className = "error";
  } else if (Date.now() < warningUntil) {
    // keep the flashed warning on screen
  } else if (state.lastError !== null) {
    messageEl.textContent = state.lastError;
    messageEl.className = "error";
  } else {
    messageEl.textContent = "";
    messageEl.className = "";
  }
  if (state.lastSnapshotTau !== null) {
    readoutEl.textContent = `snapshot at τ = ${state.lastSnapshotTau.toFixed(2)}`;
    state.lastSnapshotTau = null;
  }
}

function loop(): void {
  const batch = inbox.splice(0);
  for (const raw of batch) {
    handleMessage(state, raw);
  }
  renderFrame(ctx, canvas.width, canvas.height, state);
  updateStatus();
  requestAnimationFrame(loop);
}

function setMode(mode: Mode): void {
  state.mode = mode;
  document.querySelectorAll<HTMLButtonElement>("button.mode").forEach((btn) => {
    btn.classList.toggle("active", btn.dataset.mode === mode);
  });
}

canvas.addEventListener("click", (ev) => {
  if (state.xbar === null) {
    return;
  }
  const rect = canvas.getBoundingClientRect();
  const px = (ev.clientX - rect.left) * (canvas.width / rect.width);
  const xmin = state.xbar[0];
  const xmax = state.xbar[state.xbar.length - 1];
  const x = Math.min(xmax, Math.max(xmin, pxToX(px, xmin, xmax, canvas.width)));
  if (state.mode === "inspect") {
    const s = sampleAt(state, x);
    if (s !== null) {
      readoutEl.textContent =
        `x = ${s.x.toFixed(2)}   |F|² = ${s.intensity.toFixed(4)}   Z = ${s.Z.toFixed(4)}`;
    }
    return;
  }
  state.palette.amplitude = parseFloat(ampEl.value) || state.palette.amplitude;
  state.palette.sigmaB = parseFloat(widthEl.value) || state.palette.sigmaB;
  const { commands, warning } = clickToBeam(state, x);
  for (const cmd of commands) {
    send(cmd);
  }
  if (warning !== null) {
    flashWarning(warning);
  }
});

(document.getElementById("configure") as HTMLButtonElement).addEventListener(
  "click",
  () => {
    const rate = parseFloat(rateEl.value) || 25;
    send({ type: "configure", preset: presetEl.value, tau_rate: rate });
    send({ type: "start" });
  },
);
(document.getElementById("pause") as HTMLButtonElement).addEventListener(
  "click", () => send({ type: "pause" }));
(document.getElementById("resume") as HTMLButtonElement).addEventListener(
  "click", () => send({ type: "resume" }));
(document.getElementById("snapshot") as HTMLButtonElement).addEventListener(
  "click", () => send({ type: "snapshot_request" }));
(document.getElementById("setpump") as HTMLButtonElement).addEventListener(
  "click", () => {
    const power = parseFloat(pumpEl.value);
    if (!(power >= 0)) {
      flashWarning("pump power must be a non-negative number");
      return;
    }
    send({ type: "set_pump", E0: Math.sqrt(power) });
  });
document.querySelectorAll<HTMLButtonElement>("button.mode").forEach((btn) => {
  btn.addEventListener("click", () => setMode(btn.dataset.mode as Mode));
});

setMode("write");
connect();
requestAnimationFrame(loop);
