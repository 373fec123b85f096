import { readdirSync, readFileSync } from "node:fs";
import { join } from "node:path";

// vitest runs with cwd at the package root, where vitest.config.ts lives
export const FIXTURES_DIR = join(process.cwd(), "tests", "fixtures");

export function fixtureNames(): string[] {
  return readdirSync(FIXTURES_DIR)
    .filter((name) => name.endsWith(".json"))
    .sort();
}

export function readFixture(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES_DIR, name), "utf-8"));
}

/** Deep-copied minimal topic document for mutation-based rejection tests. */
export function smallTopic(): Record<string, unknown> {
  return {
    schema: 1,
    topic_id: 0,
    abstractive_summary: { text: "Calm waters ahead.", valence: 0.25 },
    chunks: [
      {
        index: 0,
        text: "The launch went well. The team celebrated.",
        valence: 0.5,
        sentences: [
          { index: 0, text: "The launch went well.", valence: 0.5, arousal: 0.6 },
          { index: 1, text: "The team celebrated.", valence: 0.5, arousal: 0.4 },
        ],
      },
      {
        index: 1,
        text: "Cleanup remains.",
        valence: 0.0,
        sentences: [{ index: 2, text: "Cleanup remains.", valence: 0.0, arousal: 0.0 }],
      },
    ],
  };
}

export function parseRgb(color: string): [number, number, number] {
  const match = /^rgb\((\d+), (\d+), (\d+)\)$/.exec(color);
  if (match === null) throw new Error(`not an rgb() color: ${color}`);
  return [Number(match[1]), Number(match[2]), Number(match[3])];
}

export function chroma(color: string): number {
  const [r, g, b] = parseRgb(color);
  return Math.max(r, g, b) - Math.min(r, g, b);
}
