import { describe, expect, it } from "vitest";

import {
  arousalHeight,
  formatScore,
  MAX_BAR_PX,
  MIN_BAR_PX,
  valenceColor,
} from "../src/color.js";
import { chroma, parseRgb } from "./helpers.js";

describe("valenceColor", () => {
  it("renders neutral valence as pure gray", () => {
    const [r, g, b] = parseRgb(valenceColor(0));
    expect(r).toBe(g);
    expect(g).toBe(b);
  });

  it("reaches maximum saturation at both endpoints", () => {
    const endpoints = [chroma(valenceColor(-1)), chroma(valenceColor(1))];
    for (const v of [-0.9, -0.5, -0.1, 0, 0.1, 0.5, 0.9]) {
      expect(chroma(valenceColor(v))).toBeLessThan(Math.min(...endpoints));
    }
  });

  it("is monotone in |valence| along each ramp", () => {
    const magnitudes = [0, 0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1];
    for (const sign of [-1, 1]) {
      const chromas = magnitudes.map((m) => chroma(valenceColor(sign * m)));
      for (let i = 1; i < chromas.length; i++) {
        expect(chromas[i]!).toBeGreaterThan(chromas[i - 1]!);
      }
    }
  });

  it("is symmetric about zero in saturation", () => {
    for (const v of [0.05, 0.2, 0.33, 0.5, 0.71, 0.9, 1]) {
      expect(chroma(valenceColor(v))).toBe(chroma(valenceColor(-v)));
    }
  });

  it("uses a warm hue for negative and a cool hue for positive valence", () => {
    const [nr, ng, nb] = parseRgb(valenceColor(-0.8));
    expect(nr).toBeGreaterThan(ng);
    expect(nr).toBeGreaterThan(nb);
    const [pr, pg, pb] = parseRgb(valenceColor(0.8));
    expect(pg).toBeGreaterThan(pr);
    expect(pg).toBeGreaterThanOrEqual(pb);
  });

  it("is a pure function", () => {
    for (const v of [-1, -0.37, 0, 0.42, 1]) {
      expect(valenceColor(v)).toBe(valenceColor(v));
    }
  });

  it("rejects values outside [-1, 1] and non-finite input", () => {
    for (const bad of [-1.01, 1.01, Number.NaN, Number.POSITIVE_INFINITY]) {
      expect(() => valenceColor(bad)).toThrowError(RangeError);
    }
  });
});

describe("arousalHeight", () => {
  it("maps the endpoints to the height limits", () => {
    expect(arousalHeight(0)).toBe(MIN_BAR_PX);
    expect(arousalHeight(1)).toBe(MAX_BAR_PX);
  });

  it("is linear", () => {
    expect(arousalHeight(0.5)).toBeCloseTo((MIN_BAR_PX + MAX_BAR_PX) / 2, 10);
    const quarter = arousalHeight(0.25) - arousalHeight(0);
    expect(arousalHeight(0.75) - arousalHeight(0.5)).toBeCloseTo(quarter, 10);
  });

  it("rejects values outside [0, 1]", () => {
    for (const bad of [-0.01, 1.01, Number.NaN]) {
      expect(() => arousalHeight(bad)).toThrowError(RangeError);
    }
  });
});

describe("formatScore", () => {
  it("renders two decimals", () => {
    expect(formatScore(0.649999)).toBe("0.65");
    expect(formatScore(-1)).toBe("-1.00");
    expect(formatScore(0)).toBe("0.00");
  });
});
