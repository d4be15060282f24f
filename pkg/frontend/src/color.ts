/**
 * Face coloring is a pure function of the labels array from the API:
 * labeled faces red, the rest neutral gray. No scores enter here.
 */

export const SEGMENT_COLOR: [number, number, number] = [255, 0, 0];
export const NEUTRAL_COLOR: [number, number, number] = [128, 128, 128];

/** One RGB byte triple per face. */
export function faceColors(labels: boolean[]): Uint8Array {
  const out = new Uint8Array(labels.length * 3);
  for (let f = 0; f < labels.length; f++) {
    const [r, g, b] = labels[f] ? SEGMENT_COLOR : NEUTRAL_COLOR;
    out[3 * f] = r;
    out[3 * f + 1] = g;
    out[3 * f + 2] = b;
  }
  return out;
}

/**
 * Normalized per-vertex colors for non-indexed triangle soup (three
 * vertices per face, each carrying the face's color).
 */
export function vertexColors(labels: boolean[]): Float32Array {
  const faces = faceColors(labels);
  const out = new Float32Array(labels.length * 9);
  for (let f = 0; f < labels.length; f++) {
    for (let corner = 0; corner < 3; corner++) {
      out[9 * f + 3 * corner] = faces[3 * f] / 255;
      out[9 * f + 3 * corner + 1] = faces[3 * f + 1] / 255;
      out[9 * f + 3 * corner + 2] = faces[3 * f + 2] / 255;
    }
  }
  return out;
}
