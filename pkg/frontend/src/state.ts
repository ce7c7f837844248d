// View state and the handlers that mutate it.  Everything here is plain
// data plus pure-ish functions so the behaviour is testable without a DOM:
// the bootstrap module owns the socket and the render loop and calls in.

import {
  AddBeamCmd,
  BeamInfo,
  ConfigureCmd,
  FrameMsg,
  PROTO,
  SessionCmd,
  decodeF32,
  parseServerMsg,
} from "./protocol.js";

export type Mode = "write" | "erase" | "inspect";
export type ConnStatus = "connecting" | "open" | "closed";

/** Defaults follow the write/erase recipe: amplitude comparable to the
 * holding pump, width a few healing lengths, and the address beam held
 * on, because at the fig3 pump power an unheld structure decays.  All of
 * these are operator controls rather than constants. */
export interface BeamPalette {
  amplitude: number;
  sigmaB: number;
  holdTau: number;
  erasePulseTau: number;
}

export interface DecodedFrame {
  tau: number;
  decimation: number;
  intensity: Float32Array;
  Z: Float32Array;
  steady: boolean;
  beams: BeamInfo[];
}

/** Optimistic marker for a beam we sent but the server has not listed. */
export interface PendingBeam {
  id: string;
  x0: number;
  phase: number;
  sigmaB: number;
  acked: boolean;
}

interface Inflight {
  cmd: string;
  beamId?: string;
}

export interface QueuedCmd {
  command: SessionCmd;
  deadline: number;
}

export interface PlotRanges {
  intensityMax: number;
  zMin: number;
  zMax: number;
}

export interface ViewState {
  status: ConnStatus;
  proto: number | null;
  frame: DecodedFrame | null;
  xbar: Float32Array | null;
  mode: Mode;
  palette: BeamPalette;
  ranges: PlotRanges;
  sigmaX: number | null;
  pending: PendingBeam[];
  inflight: Inflight[];
  outbox: QueuedCmd[];
  lastError: string | null;
  fatal: string | null;
  lastSnapshotTau: number | null;
  configured: { preset?: string; config?: string; tauRate: number } | null;
  droppedFrames: number;
  beamSerial: number;
}

export const QUEUE_TIMEOUT_MS = 5000;

const PRESET_SIGMA_X: Record<string, number> = {
  "fig2-soliton": 40.0,
  "fig2-pattern": 40.0,
  "fig3-write-erase": 23.0,
};

function freshRanges(): PlotRanges {
  return { intensityMax: 1.0, zMin: -0.5, zMax: 0.5 };
}

export function initialState(): ViewState {
  return {
    status: "connecting",
    proto: null,
    frame: null,
    xbar: null,
    mode: "write",
    palette: {
      amplitude: 1.2,
      sigmaB: 4.0,
      holdTau: 1e6,
      erasePulseTau: 30.0,
    },
    ranges: freshRanges(),
    sigmaX: null,
    pending: [],
    inflight: [],
    outbox: [],
    lastError: null,
    fatal: null,
    lastSnapshotTau: null,
    configured: null,
    droppedFrames: 0,
    beamSerial: 0,
  };
}

export function handleOpen(state: ViewState): void {
  state.status = "open";
  state.lastError = null;
}

export function handleClose(state: ViewState): void {
  state.status = "closed";
  // replies to anything still in flight will never arrive, and a new
  // connection means a new server-side session
  state.inflight = [];
  state.pending = [];
}

/** Apply one raw text frame from the server to the state. */
export function handleMessage(state: ViewState, raw: string): void {
  const msg = parseServerMsg(raw);
  if (msg === null) {
    state.lastError = "unreadable message from server";
    return;
  }
  switch (msg.type) {
    case "hello":
      state.proto = msg.proto;
      if (msg.proto !== PROTO) {
        state.lastError =
          `server speaks protocol ${msg.proto}, this client expects ${PROTO}`;
      }
      break;
    case "ok": {
      const entry = state.inflight.shift();
      if (entry !== undefined && entry.beamId !== undefined) {
        const marker = state.pending.find((b) => b.id === entry.beamId);
        if (marker !== undefined) {
          marker.acked = true;
        }
      }
      break;
    }
    case "error": {
      const entry = state.inflight.shift();
      if (entry !== undefined && entry.beamId !== undefined) {
        state.pending = state.pending.filter((b) => b.id !== entry.beamId);
      }
      state.lastError = msg.message;
      break;
    }
    case "fatal":
      state.fatal = msg.message;
      break;
    case "snapshot":
      state.lastSnapshotTau = msg.tau;
      break;
    case "frame":
      acceptFrame(state, msg);
      break;
  }
}

function acceptFrame(state: ViewState, msg: FrameMsg): void {
  const intensity = decodeF32(msg.intensity);
  const zgrid = decodeF32(msg.Z);
  if (intensity.length === 0 || intensity.length !== zgrid.length) {
    state.droppedFrames += 1;
    return;
  }
  if (state.frame !== null && msg.tau < state.frame.tau) {
    state.droppedFrames += 1;
    return;
  }
  if (msg.xbar !== undefined) {
    state.xbar = decodeF32(msg.xbar);
  }
  if (state.xbar === null || state.xbar.length !== intensity.length) {
    // without a grid the samples cannot be placed, so this frame is not
    // renderable as a complete picture
    state.droppedFrames += 1;
    return;
  }
  state.frame = {
    tau: msg.tau,
    decimation: msg.decimation,
    intensity,
    Z: zgrid,
    steady: msg.steady,
    beams: msg.beams ?? [],
  };
  const listed = new Set(state.frame.beams.map((b) => b.id));
  state.pending = state.pending.filter((b) => !listed.has(b.id));
  expandRanges(state.ranges, intensity, zgrid);
}

function expandRanges(
  ranges: PlotRanges,
  intensity: Float32Array,
  zgrid: Float32Array,
): void {
  for (let i = 0; i < intensity.length; i++) {
    if (intensity[i] > ranges.intensityMax) {
      ranges.intensityMax = intensity[i];
    }
    if (zgrid[i] < ranges.zMin) {
      ranges.zMin = zgrid[i];
    }
    if (zgrid[i] > ranges.zMax) {
      ranges.zMax = zgrid[i];
    }
  }
}

function noteConfigure(state: ViewState, cmd: ConfigureCmd): void {
  state.configured = {
    preset: cmd.preset,
    config: cmd.config,
    tauRate: cmd.tau_rate ?? 25,
  };
  state.frame = null;
  state.xbar = null;
  state.pending = [];
  state.ranges = freshRanges();
  state.fatal = null;
  state.lastSnapshotTau = null;
  if (cmd.preset !== undefined) {
    state.sigmaX = PRESET_SIGMA_X[cmd.preset] ?? null;
  } else if (cmd.config !== undefined) {
    const m = /^\s*sigma_x\s*=\s*([0-9.eE+-]+)/m.exec(cmd.config);
    state.sigmaX = m !== null ? parseFloat(m[1]) : null;
  } else {
    state.sigmaX = null;
  }
}

/** Record a command that was actually written to the socket, so the next
 * ok or error reply can be matched to it in order.  A sent add_beam also
 * gets an optimistic marker, and a sent configure resets the session view
 * because the server starts from scratch. */
export function noteSent(state: ViewState, cmd: SessionCmd): void {
  const entry: Inflight = { cmd: cmd.type };
  if (cmd.type === "add_beam") {
    entry.beamId = cmd.id;
    state.pending.push({
      id: cmd.id,
      x0: cmd.x0,
      phase: cmd.phase,
      sigmaB: cmd.sigma_b,
      acked: false,
    });
  }
  if (cmd.type === "configure") {
    noteConfigure(state, cmd);
  }
  state.inflight.push(entry);
}

export interface ClickResult {
  commands: SessionCmd[];
  warning: string | null;
}

/** Map a click on the x axis to session commands for the current mode.
 *
 * Write clicks inject a phase-0 beam with the palette defaults.  Erase
 * clicks inject the counter-phase pulse, and also withdraw a held beam
 * near the click if there is one, because a structure below the fold is
 * kept alive by its address beam and would outlast a pulse alone.
 * Inspect clicks never produce commands. */
export function clickToBeam(state: ViewState, x: number): ClickResult {
  if (state.mode === "inspect") {
    return { commands: [], warning: null };
  }
  const commands: SessionCmd[] = [];
  if (state.mode === "erase") {
    const held = nearestHeldBeam(state, x);
    if (held !== null) {
      commands.push({ type: "remove_beam", id: held });
    }
  }
  state.beamSerial += 1;
  const beam: AddBeamCmd = {
    type: "add_beam",
    id: `ui-${state.beamSerial}`,
    x0: x,
    amplitude: state.palette.amplitude,
    phase: state.mode === "erase" ? Math.PI : 0.0,
    sigma_b: state.palette.sigmaB,
    duration:
      state.mode === "erase" ? state.palette.erasePulseTau : state.palette.holdTau,
  };
  commands.push(beam);
  const warning =
    state.sigmaX !== null && Math.abs(x) > state.sigmaX
      ? `x = ${x.toFixed(1)} is outside the pump plateau (half-width ${state.sigmaX})`
      : null;
  return { commands, warning };
}

function nearestHeldBeam(state: ViewState, x: number): string | null {
  let best: string | null = null;
  let bestDist = Infinity;
  const consider = (id: string, x0: number, phase: number, sigma: number) => {
    if (Math.abs(phase) >= Math.PI / 2) {
      return; // an erase pulse is not a hold
    }
    const d = Math.abs(x0 - x);
    if (d <= Math.max(sigma, 1.0) && d < bestDist) {
      best = id;
      bestDist = d;
    }
  };
  for (const b of state.frame?.beams ?? []) {
    consider(b.id, b.x0, b.phase, b.sigma_b);
  }
  for (const p of state.pending) {
    if (p.acked) {
      consider(p.id, p.x0, p.phase, p.sigmaB);
    }
  }
  return best;
}

export function queueCommand(
  state: ViewState,
  cmd: SessionCmd,
  now: number,
): void {
  state.outbox.push({ command: cmd, deadline: now + QUEUE_TIMEOUT_MS });
}

/** Commands queued while disconnected: expired entries are discarded,
 * the rest are handed back for sending and removed from the queue. */
export function flushOutbox(state: ViewState, now: number): SessionCmd[] {
  const live = state.outbox.filter((q) => q.deadline > now);
  state.outbox = [];
  return live.map((q) => q.command);
}

export interface SamplePoint {
  x: number;
  intensity: number;
  Z: number;
}

/** Nearest sample of the latest frame, for inspect-mode readout. */
export function sampleAt(state: ViewState, x: number): SamplePoint | null {
  if (state.frame === null || state.xbar === null) {
    return null;
  }
  let best = 0;
  let bestDist = Infinity;
  for (let i = 0; i < state.xbar.length; i++) {
    const d = Math.abs(state.xbar[i] - x);
    if (d < bestDist) {
      bestDist = d;
      best = i;
    }
  }
  return {
    x: state.xbar[best],
    intensity: state.frame.intensity[best],
    Z: state.frame.Z[best],
  };
}
