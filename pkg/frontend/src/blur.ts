/** Presentation-only chart blur.
 *
 * Three stacked box blurs approximate a Gaussian closely enough for the
 * "unreadable until revealed" effect and run fast enough to redraw at
 * resize time. The analysis-side Gaussian is authoritative; nothing here
 * feeds the data pipeline.
 */

/** Box-blur radius so that `passes` stacked boxes approximate sigma. */
export function boxRadiusForSigma(sigma: number, passes = 3): number {
  // a box of width 2r+1 has variance ((2r+1)^2 - 1) / 12 per pass
  const ideal = Math.sqrt((12 * sigma * sigma) / passes + 1);
  return Math.max(1, Math.round((ideal - 1) / 2));
}

function boxBlurH(src: Float32Array, dst: Float32Array, w: number, h: number, r: number) {
  const norm = 1 / (2 * r + 1);
  for (let y = 0; y < h; y++) {
    const row = y * w;
    let acc = 0;
    // edge-replicated initial window around x = 0
    for (let i = -r; i <= r; i++) {
      acc += src[row + Math.min(w - 1, Math.max(0, i))];
    }
    for (let x = 0; x < w; x++) {
      dst[row + x] = acc * norm;
      const add = Math.min(w - 1, x + r + 1);
      const sub = Math.max(0, x - r);
      acc += src[row + add] - src[row + sub];
    }
  }
}

function boxBlurV(src: Float32Array, dst: Float32Array, w: number, h: number, r: number) {
  const norm = 1 / (2 * r + 1);
  for (let x = 0; x < w; x++) {
    let acc = 0;
    for (let i = -r; i <= r; i++) {
      acc += src[Math.min(h - 1, Math.max(0, i)) * w + x];
    }
    for (let y = 0; y < h; y++) {
      dst[y * w + x] = acc * norm;
      const add = Math.min(h - 1, y + r + 1);
      const sub = Math.max(0, y - r);
      acc += src[add * w + x] - src[sub * w + x];
    }
  }
}

/** Blur one channel in place (float working copy of the pixel values). */
export function stackedBoxBlur(
  channel: Float32Array,
  w: number,
  h: number,
  radius: number,
  passes = 3,
): Float32Array {
  let a = channel;
  let b = new Float32Array(channel.length);
  for (let p = 0; p < passes; p++) {
    boxBlurH(a, b, w, h, radius);
    boxBlurV(b, a, w, h, radius);
  }
  return a;
}

/** Blur RGBA ImageData-style bytes; alpha is left untouched. */
export function blurImageBytes(
  bytes: Uint8ClampedArray,
  w: number,
  h: number,
  sigma: number,
): Uint8ClampedArray {
  const radius = boxRadiusForSigma(sigma);
  const out = new Uint8ClampedArray(bytes);
  const channel = new Float32Array(w * h);
  for (let c = 0; c < 3; c++) {
    for (let i = 0; i < w * h; i++) channel[i] = bytes[i * 4 + c];
    const blurred = stackedBoxBlur(channel, w, h, radius);
    for (let i = 0; i < w * h; i++) out[i * 4 + c] = blurred[i];
  }
  return out;
}
