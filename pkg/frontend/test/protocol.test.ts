import { describe, expect, it } from "vitest";

import { decodeF32, parseServerMsg } from "../src/protocol.js";
import { encodeF32 } from "./helpers.js";

describe("decodeF32", () => {
  it("decodes a known little-endian word", () => {
    // f32 1.0 is the bytes 00 00 80 3f
    expect(Array.from(decodeF32("AACAPw=="))).toEqual([1]);
  });

  it("round-trips through the encoder", () => {
    const values = [0, 1.5, -2.25, 1e-3, 3.25e7];
    const out = Array.from(decodeF32(encodeF32(values)));
    expect(out).toEqual(values.map(Math.fround));
  });

  it("returns an empty array for an empty payload", () => {
    expect(decodeF32("").length).toBe(0);
  });
});

describe("parseServerMsg", () => {
  it("accepts every server message type", () => {
    for (const t of ["hello", "ok", "error", "fatal", "frame", "snapshot"]) {
      expect(parseServerMsg(JSON.stringify({ type: t }))?.type).toBe(t);
    }
  });

  it("rejects unknown types", () => {
    expect(parseServerMsg('{"type":"telemetry"}')).toBeNull();
  });

  it("rejects non-objects and broken JSON", () => {
    expect(parseServerMsg("[1,2,3]")).toBeNull();
    expect(parseServerMsg('"frame"')).toBeNull();
    expect(parseServerMsg("{not json")).toBeNull();
  });
});
