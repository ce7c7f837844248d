export function encodeF32(values: number[]): string {
  const buf = new ArrayBuffer(values.length * 4);
  const view = new DataView(buf);
  values.forEach((v, i) => view.setFloat32(4 * i, v, true));
  return btoa(String.fromCharCode(...new Uint8Array(buf)));
}

export function frameRaw(
  tau: number,
  intensity: number[],
  z: number[],
  extra: Record<string, unknown> = {},
): string {
  return JSON.stringify({
    type: "frame",
    tau,
    decimation: 1,
    intensity: encodeF32(intensity),
    Z: encodeF32(z),
    steady: false,
    beams: [],
    ...extra,
  });
}
