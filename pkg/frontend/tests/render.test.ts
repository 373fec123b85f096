import { describe, expect, it } from "vitest";

import { arousalHeight, valenceColor } from "../src/color.js";
import { applyHoverDetail, hoverDetail, renderCollection, renderTopic } from "../src/render.js";
import type { HoverTarget } from "../src/render.js";
import { parseTopicDocument, parseVizDocument } from "../src/schema.js";
import type { CollectionIndex, TopicDocument } from "../src/schema.js";
import { fixtureNames, parseRgb, readFixture, smallTopic } from "./helpers.js";

function firstTopicFixture(): TopicDocument {
  const name = fixtureNames().find((n) => n.startsWith("topic-")) as string;
  return parseTopicDocument(readFixture(name));
}

describe("renderTopic", () => {
  it("renders the three tiers for every pipeline topic fixture", () => {
    for (const name of fixtureNames()) {
      if (!name.startsWith("topic-")) continue;
      const doc = parseTopicDocument(readFixture(name));
      const view = renderTopic(doc);

      const lines = view.querySelectorAll(".chunk-strip .chunk-line");
      expect(lines.length).toBe(doc.chunks.length);

      const bars = view.querySelectorAll(".sentence-bars .sentence-bar");
      const nSentences = doc.chunks.reduce((acc, c) => acc + c.sentences.length, 0);
      expect(bars.length).toBe(nSentences);

      const summary = view.querySelector(".topic-summary") as HTMLElement;
      expect(summary.textContent).toBe(doc.abstractive_summary.text);
    }
  });

  it("colors chunk lines and the summary by valence", () => {
    const doc = firstTopicFixture();
    const view = renderTopic(doc);
    const lines = view.querySelectorAll<HTMLElement>(".chunk-line");
    doc.chunks.forEach((chunk, i) => {
      expect(lines[i]!.style.backgroundColor).toBe(valenceColor(chunk.valence));
    });
    const summary = view.querySelector(".topic-summary") as HTMLElement;
    expect(summary.style.color).toBe(valenceColor(doc.abstractive_summary.valence));
  });

  it("sizes sentence bars by arousal and colors them by valence", () => {
    const doc = firstTopicFixture();
    const view = renderTopic(doc);
    const bars = view.querySelectorAll<HTMLElement>(".sentence-bar");
    let i = 0;
    for (const chunk of doc.chunks) {
      for (const sentence of chunk.sentences) {
        expect(bars[i]!.style.height).toBe(`${arousalHeight(sentence.arousal)}px`);
        expect(bars[i]!.style.backgroundColor).toBe(valenceColor(sentence.valence));
        i += 1;
      }
    }
  });

  it("renders a neutral-valence sentence as a gray bar", () => {
    const doc = parseTopicDocument(smallTopic());
    const view = renderTopic(doc);
    const neutral = view.querySelector<HTMLElement>('[data-sentence="2"]') as HTMLElement;
    const [r, g, b] = parseRgb(neutral.style.backgroundColor);
    expect(r).toBe(g);
    expect(g).toBe(b);
  });

  it("reproduces identical DOM for repeated renders of the same document", () => {
    for (const name of fixtureNames()) {
      if (!name.startsWith("topic-")) continue;
      const doc = parseTopicDocument(readFixture(name));
      expect(renderTopic(doc).outerHTML).toBe(renderTopic(doc).outerHTML);
    }
  });
});

describe("hoverDetail", () => {
  const doc = parseTopicDocument(smallTopic());

  it("resolves a sentence to its exact text and both scores", () => {
    const detail = hoverDetail(doc, { kind: "sentence", chunk: 0, sentence: 1 });
    expect(detail).not.toBeNull();
    expect(detail!.text).toBe("The team celebrated.");
    expect(detail!.scores).toEqual([
      { label: "valence", value: 0.5 },
      { label: "arousal", value: 0.4 },
    ]);
  });

  it("resolves a chunk to its text and aggregated valence", () => {
    const detail = hoverDetail(doc, { kind: "chunk", chunk: 0 });
    expect(detail!.text).toBe("The launch went well. The team celebrated.");
    expect(detail!.scores).toEqual([{ label: "valence", value: 0.5 }]);
  });

  it("returns null for out-of-bounds targets", () => {
    expect(hoverDetail(doc, { kind: "chunk", chunk: 9 })).toBeNull();
    expect(hoverDetail(doc, { kind: "sentence", chunk: 0, sentence: 99 })).toBeNull();
  });
});

describe("hover wiring", () => {
  it("emits targets on mouseenter and null on mouseleave", () => {
    const doc = parseTopicDocument(smallTopic());
    const seen: (HoverTarget | null)[] = [];
    const view = renderTopic(doc, (target) => seen.push(target));
    document.body.appendChild(view);

    const bar = view.querySelector('[data-chunk="0"][data-sentence="1"]') as HTMLElement;
    bar.dispatchEvent(new MouseEvent("mouseenter"));
    bar.dispatchEvent(new MouseEvent("mouseleave"));
    const line = view.querySelector('.chunk-line[data-chunk="1"]') as HTMLElement;
    line.dispatchEvent(new MouseEvent("mouseenter"));

    expect(seen).toEqual([
      { kind: "sentence", chunk: 0, sentence: 1 },
      null,
      { kind: "chunk", chunk: 1 },
    ]);
    view.remove();
  });

  it("shows exact text with two-decimal scores in the panel", () => {
    const doc = parseTopicDocument(smallTopic());
    const panel = document.createElement("aside");
    applyHoverDetail(panel, hoverDetail(doc, { kind: "sentence", chunk: 0, sentence: 0 }));
    expect(panel.querySelector(".detail-text")!.textContent).toBe("The launch went well.");
    const values = [...panel.querySelectorAll("dd")].map((dd) => dd.textContent);
    expect(values).toEqual(["0.50", "0.60"]);
  });

  it("leaves the panel unchanged for out-of-bounds targets", () => {
    const doc = parseTopicDocument(smallTopic());
    const panel = document.createElement("aside");
    panel.textContent = "previous detail";
    applyHoverDetail(panel, hoverDetail(doc, { kind: "sentence", chunk: 7, sentence: 0 }));
    expect(panel.textContent).toBe("previous detail");
  });
});

describe("renderCollection", () => {
  it("lists every topic with its chunk count and colored summary", () => {
    const index = parseVizDocument(readFixture("collection.json")).doc as CollectionIndex;
    const picked: number[] = [];
    const view = renderCollection(index, (id) => picked.push(id));

    const items = view.querySelectorAll(".collection-topic");
    expect(items.length).toBe(index.topics.length);
    index.topics.forEach((topic, i) => {
      const button = items[i]!.querySelector("button") as HTMLButtonElement;
      expect(button.textContent).toContain(`Topic ${topic.topic_id}`);
      expect(button.textContent).toContain(`${topic.n_chunks} chunks`);
      expect(button.style.color).toBe(valenceColor(topic.summary.valence));
    });

    (items[0]!.querySelector("button") as HTMLButtonElement).click();
    expect(picked).toEqual([index.topics[0]!.topic_id]);
  });
});
