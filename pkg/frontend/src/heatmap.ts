/**
 * Field rendering: fixed perceptual colormap ramp, kPa -> RGBA pixels.
 *
 * The renderer is a pure function over the decoded field so it can run (and
 * be benchmarked) headlessly; the canvas layer just blits its output.
 */

import { FieldMessage, decodeFieldValues } from "./protocol.js";

/** Anchor points of a perceptually ordered dark-to-bright ramp. */
const RAMP: [number, number, number][] = [
  [0, 0, 4],        // near black
  [40, 11, 84],
  [101, 21, 110],
  [159, 42, 99],
  [212, 72, 66],
  [245, 125, 21],
  [250, 193, 39],
  [252, 255, 164],  // bright
];

/** Sample the ramp at t in [0, 1]. */
export function rampColor(t: number): [number, number, number] {
  const clamped = Math.min(Math.max(t, 0), 1);
  const scaled = clamped * (RAMP.length - 1);
  const idx = Math.min(Math.floor(scaled), RAMP.length - 2);
  const frac = scaled - idx;
  const a = RAMP[idx];
  const b = RAMP[idx + 1];
  return [
    Math.round(a[0] + (b[0] - a[0]) * frac),
    Math.round(a[1] + (b[1] - a[1]) * frac),
    Math.round(a[2] + (b[2] - a[2]) * frac),
  ];
}

export interface RenderOptions {
  /** Manual colormap ceiling; when null the field's own max is used. */
  vmax: number | null;
}

export interface RenderedField {
  width: number;
  height: number;
  /** RGBA, row 0 at the bottom of the mat (y up). */
  pixels: Uint8ClampedArray<ArrayBuffer>;
  vmax: number;
}

export function renderField(field: FieldMessage, options: RenderOptions = { vmax: null }): RenderedField {
  const values = decodeFieldValues(field.values_b64);
  const [rows, cols] = field.shape;
  if (values.length !== rows * cols) {
    throw new Error(`field payload has ${values.length} values, expected ${rows * cols}`);
  }
  let vmax = options.vmax ?? 0;
  if (options.vmax === null) {
    for (let i = 0; i < values.length; i++) {
      if (values[i] > vmax) vmax = values[i];
    }
  }
  const pixels = new Uint8ClampedArray(rows * cols * 4);
  const scale = vmax > 0 ? 1 / vmax : 0;
  for (let r = 0; r < rows; r++) {
    // Flip vertically so the mat's y axis points up on screen.
    const src = (rows - 1 - r) * cols;
    let dst = r * cols * 4;
    for (let c = 0; c < cols; c++, dst += 4) {
      const [red, green, blue] = rampColor(values[src + c] * scale);
      pixels[dst] = red;
      pixels[dst + 1] = green;
      pixels[dst + 2] = blue;
      pixels[dst + 3] = 255;
    }
  }
  return { width: cols, height: rows, pixels, vmax };
}

/** Count 4-connected hot components (value > fraction * vmax); used by the
 * rendering tests to assert "two distinct foot-shaped hot regions". */
export function hotComponents(field: FieldMessage, fraction = 0.5): { size: number; minCol: number; maxCol: number }[] {
  const values = decodeFieldValues(field.values_b64);
  const [rows, cols] = field.shape;
  let vmax = 0;
  for (const v of values) if (v > vmax) vmax = v;
  const threshold = vmax * fraction;
  const seen = new Uint8Array(rows * cols);
  const components: { size: number; minCol: number; maxCol: number }[] = [];
  for (let start = 0; start < values.length; start++) {
    if (seen[start] || values[start] <= threshold) continue;
    let size = 0;
    let minCol = cols;
    let maxCol = -1;
    const stack = [start];
    seen[start] = 1;
    while (stack.length) {
      const cell = stack.pop()!;
      size += 1;
      const r = Math.floor(cell / cols);
      const c = cell % cols;
      if (c < minCol) minCol = c;
      if (c > maxCol) maxCol = c;
      for (const [dr, dc] of [[-1, 0], [1, 0], [0, -1], [0, 1]] as const) {
        const rr = r + dr;
        const cc = c + dc;
        if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
        const next = rr * cols + cc;
        if (!seen[next] && values[next] > threshold) {
          seen[next] = 1;
          stack.push(next);
        }
      }
    }
    components.push({ size, minCol, maxCol });
  }
  return components.sort((a, b) => b.size - a.size);
}
