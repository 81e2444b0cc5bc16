/** Display-space to intrinsic image-space coordinate mapping.
 *
 * The chart is drawn scaled (and possibly offset) on the canvas; the server
 * only ever sees intrinsic image pixels, so every click goes through the
 * inverse transform before it is buffered.
 */

export interface DisplayTransform {
  /** display pixels per image pixel */
  scale: number;
  /** top-left corner of the drawn image on the canvas, display px */
  offsetX: number;
  offsetY: number;
}

export function displayToImage(
  displayX: number,
  displayY: number,
  t: DisplayTransform,
): { x: number; y: number } {
  return {
    x: Math.floor((displayX - t.offsetX) / t.scale),
    y: Math.floor((displayY - t.offsetY) / t.scale),
  };
}

export function imageToDisplay(
  imageX: number,
  imageY: number,
  t: DisplayTransform,
): { x: number; y: number } {
  return {
    x: imageX * t.scale + t.offsetX,
    y: imageY * t.scale + t.offsetY,
  };
}

/** On-screen bubble radius: config radius in image px times the display scale. */
export function bubbleDisplayRadius(imageRadius: number, t: DisplayTransform): number {
  return imageRadius * t.scale;
}

export function inImageBounds(x: number, y: number, w: number, h: number): boolean {
  return x >= 0 && x < w && y >= 0 && y < h;
}
