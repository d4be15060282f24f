/** Candidate mask compositing over view thumbnails at fixed alpha. */

export const OVERLAY_ALPHA = 0.5;
export const OVERLAY_TINT: [number, number, number] = [255, 64, 64];

export function blendChannel(base: number, tint: number, alpha: number): number {
  return Math.round(base * (1 - alpha) + tint * alpha);
}

/**
 * Blend the tint into every foreground pixel of the mask.
 *
 * `base` is RGBA pixel data, `mask` one byte per pixel where >= 128 means
 * foreground (the mask PNGs decode to that convention). Returns new RGBA
 * data; alpha channel is left untouched.
 */
export function compositeMask(
  base: Uint8ClampedArray,
  mask: Uint8ClampedArray,
  tint: [number, number, number] = OVERLAY_TINT,
  alpha: number = OVERLAY_ALPHA,
): Uint8ClampedArray {
  if (base.length !== mask.length * 4) {
    throw new Error(
      `mask has ${mask.length} pixels, image has ${base.length / 4}`,
    );
  }
  const out = new Uint8ClampedArray(base);
  for (let p = 0; p < mask.length; p++) {
    if (mask[p] >= 128) {
      out[4 * p] = blendChannel(base[4 * p], tint[0], alpha);
      out[4 * p + 1] = blendChannel(base[4 * p + 1], tint[1], alpha);
      out[4 * p + 2] = blendChannel(base[4 * p + 2], tint[2], alpha);
    }
  }
  return out;
}

/** Grayscale bytes from decoded RGBA mask data (red channel carries it). */
export function maskBytesFromRgba(rgba: Uint8ClampedArray): Uint8ClampedArray {
  const out = new Uint8ClampedArray(rgba.length / 4);
  for (let p = 0; p < out.length; p++) {
    out[p] = rgba[4 * p];
  }
  return out;
}
