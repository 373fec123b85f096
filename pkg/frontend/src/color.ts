/**
 * Score-to-visual mappings.
 *
 * Valence drives a double-ended saturation scale: orange-red below
 * zero, blue-green above, gray exactly at zero, with saturation
 * proportional to |valence|. The two hues stay distinguishable under
 * the common red-green color vision deficiencies. Arousal drives bar
 * height linearly.
 */

export const NEGATIVE_HUE = 20;
export const POSITIVE_HUE = 160;
export const RAMP_LIGHTNESS = 0.45;

export const MIN_BAR_PX = 3;
export const MAX_BAR_PX = 48;

function assertUnit(value: number, low: number, high: number, what: string): void {
  if (!Number.isFinite(value) || value < low || value > high) {
    throw new RangeError(`${what} must be a finite number in [${low}, ${high}], got ${value}`);
  }
}

function hslToRgb(hue: number, sat: number, light: number): [number, number, number] {
  const c = (1 - Math.abs(2 * light - 1)) * sat;
  const x = c * (1 - Math.abs(((hue / 60) % 2) - 1));
  const m = light - c / 2;
  let rgb: [number, number, number];
  if (hue < 60) rgb = [c, x, 0];
  else if (hue < 120) rgb = [x, c, 0];
  else if (hue < 180) rgb = [0, c, x];
  else if (hue < 240) rgb = [0, x, c];
  else if (hue < 300) rgb = [x, 0, c];
  else rgb = [c, 0, x];
  return [
    Math.round((rgb[0] + m) * 255),
    Math.round((rgb[1] + m) * 255),
    Math.round((rgb[2] + m) * 255),
  ];
}

/** Map valence in [-1, 1] to a CSS color; pure and deterministic. */
export function valenceColor(valence: number): string {
  assertUnit(valence, -1, 1, "valence");
  const saturation = Math.abs(valence);
  const hue = valence < 0 ? NEGATIVE_HUE : POSITIVE_HUE;
  const [r, g, b] = hslToRgb(hue, saturation, RAMP_LIGHTNESS);
  return `rgb(${r}, ${g}, ${b})`;
}

/** Map arousal in [0, 1] linearly to a bar height in pixels. */
export function arousalHeight(arousal: number): number {
  assertUnit(arousal, 0, 1, "arousal");
  return MIN_BAR_PX + arousal * (MAX_BAR_PX - MIN_BAR_PX);
}

/** Two-decimal score display shared by every hover panel. */
export function formatScore(value: number): string {
  return value.toFixed(2);
}
