// Wire protocol for the steering server, version 1.  Every message is a
// JSON object with a `type` discriminator; float arrays travel as base64
// strings of little-endian f32.  The outgoing command set mirrors the
// server's session commands one to one, and nothing else in this client
// is allowed to touch simulation state.

export const PROTO = 1;

export interface BeamInfo {
  id: string;
  x0: number;
  amplitude: number;
  phase: number;
  sigma_b: number;
  tau_off: number;
}

export interface HelloMsg {
  type: "hello";
  proto: number;
}

export interface OkMsg {
  type: "ok";
  cmd: string;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export interface FatalMsg {
  type: "fatal";
  message: string;
}

export interface FrameMsg {
  type: "frame";
  tau: number;
  decimation: number;
  intensity: string;
  Z: string;
  steady: boolean;
  beams: BeamInfo[];
  xbar?: string;
}

export interface SnapshotMsg {
  type: "snapshot";
  tau: number;
  n_mirrors: number;
  points_per_mirror: number;
  xbar: string;
  intensity: string;
  Z: string;
  z: string;
  v: string;
}

export type ServerMsg =
  | HelloMsg
  | OkMsg
  | ErrorMsg
  | FatalMsg
  | FrameMsg
  | SnapshotMsg;

export interface ConfigureCmd {
  type: "configure";
  preset?: string;
  config?: string;
  tau_rate?: number;
}

export interface StartCmd {
  type: "start";
}

export interface PauseCmd {
  type: "pause";
}

export interface ResumeCmd {
  type: "resume";
}

export interface SetPumpCmd {
  type: "set_pump";
  E0: number;
  sigma_x?: number;
}

export interface AddBeamCmd {
  type: "add_beam";
  id: string;
  x0: number;
  amplitude: number;
  phase: number;
  sigma_b: number;
  duration: number;
}

export interface RemoveBeamCmd {
  type: "remove_beam";
  id: string;
}

export interface SnapshotRequestCmd {
  type: "snapshot_request";
}

export interface ShutdownCmd {
  type: "shutdown";
}

export type SessionCmd =
  | ConfigureCmd
  | StartCmd
  | PauseCmd
  | ResumeCmd
  | SetPumpCmd
  | AddBeamCmd
  | RemoveBeamCmd
  | SnapshotRequestCmd
  | ShutdownCmd;

const SERVER_TYPES = new Set([
  "hello", "ok", "error", "fatal", "frame", "snapshot",
]);

/** Parse one incoming text frame; anything malformed becomes null. */
export function parseServerMsg(raw: string): ServerMsg | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    return null;
  }
  const head = data as { type?: unknown };
  if (typeof head.type !== "string" || !SERVER_TYPES.has(head.type)) {
    return null;
  }
  return data as ServerMsg;
}

/** Decode base64 little-endian f32 into a Float32Array. */
export function decodeF32(b64: string): Float32Array {
  const raw = atob(b64);
  const bytes = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) {
    bytes[i] = raw.charCodeAt(i);
  }
  const view = new DataView(bytes.buffer);
  const out = new Float32Array(Math.floor(bytes.length / 4));
  for (let i = 0; i < out.length; i++) {
    out[i] = view.getFloat32(4 * i, true);
  }
  return out;
}
