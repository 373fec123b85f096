import { beforeEach, describe, expect, it } from "vitest";

import { createApp } from "../src/app.js";
import type { App } from "../src/app.js";
import { fixtureNames, readFixture } from "./helpers.js";

function fixtureTexts(): { name: string; text: string }[] {
  return fixtureNames().map((name) => ({
    name,
    text: JSON.stringify(readFixture(name)),
  }));
}

describe("app shell", () => {
  let root: HTMLElement;
  let app: App;

  beforeEach(() => {
    document.body.replaceChildren();
    root = document.createElement("div");
    document.body.appendChild(root);
    app = createApp(root);
  });

  function banner(): HTMLElement {
    return root.querySelector(".error-banner") as HTMLElement;
  }

  function content(): HTMLElement {
    return root.querySelector(".content") as HTMLElement;
  }

  it("loads every pipeline fixture in one batch", () => {
    app.loadTexts(fixtureTexts());
    expect(banner().hidden).toBe(true);
    expect(app.topics.size).toBe(fixtureNames().length - 1);
    expect(app.collection).not.toBeNull();
    expect(root.querySelectorAll(".topic-tabs .tab").length).toBe(app.topics.size);
    expect(content().querySelector(".collection-view")).not.toBeNull();
  });

  it("selects a topic and renders its three tiers", () => {
    app.loadTexts(fixtureTexts());
    const first = [...app.topics.keys()].sort((a, b) => a - b)[0]!;
    app.selectTopic(first);
    const view = content().querySelector(".topic-view") as HTMLElement;
    expect(view.dataset.topicId).toBe(String(first));
    expect(view.querySelector(".chunk-strip")).not.toBeNull();
    expect(view.querySelector(".sentence-bars")).not.toBeNull();
    expect(view.querySelector(".topic-summary")).not.toBeNull();
  });

  it("shows an error banner and renders nothing for a schema mismatch", () => {
    const bad = JSON.parse(JSON.stringify(readFixture("topic-000.json"))) as {
      schema: number;
    };
    bad.schema = 3;
    app.loadTexts([{ name: "topic-000.json", text: JSON.stringify(bad) }]);

    expect(banner().hidden).toBe(false);
    expect(banner().textContent).toContain("topic-000.json");
    expect(banner().textContent).toContain("unsupported schema version 3");
    expect(content().children.length).toBe(0);
    expect(root.querySelectorAll(".topic-tabs .tab").length).toBe(0);
  });

  it("never renders a partial batch when one file is broken", () => {
    const texts = fixtureTexts();
    texts.push({ name: "broken.json", text: '{"schema": 2, "topic_id": 0}' });
    app.loadTexts(texts);

    expect(banner().hidden).toBe(false);
    expect(content().children.length).toBe(0);
  });

  it("reports unparseable JSON by file name", () => {
    app.loadTexts([{ name: "garbage.json", text: "{not json" }]);
    expect(banner().hidden).toBe(false);
    expect(banner().textContent).toContain("garbage.json");
    expect(banner().textContent).toContain("not valid JSON");
  });

  it("recovers after an error once valid files load", () => {
    app.loadTexts([{ name: "garbage.json", text: "{not json" }]);
    expect(banner().hidden).toBe(false);
    app.loadTexts(fixtureTexts());
    expect(banner().hidden).toBe(true);
    expect(content().children.length).toBeGreaterThan(0);
  });

  it("updates the detail panel when a rendered bar is hovered", () => {
    app.loadTexts(fixtureTexts());
    const first = [...app.topics.keys()].sort((a, b) => a - b)[0]!;
    app.selectTopic(first);
    const doc = app.topics.get(first)!;
    const target = doc.chunks[0]!.sentences[0]!;

    const bar = content().querySelector(".sentence-bar") as HTMLElement;
    bar.dispatchEvent(new MouseEvent("mouseenter"));

    const panel = root.querySelector(".detail-panel") as HTMLElement;
    expect(panel.querySelector(".detail-text")!.textContent).toBe(target.text);
    const values = [...panel.querySelectorAll("dd")].map((dd) => dd.textContent);
    expect(values).toEqual([target.valence.toFixed(2), target.arousal.toFixed(2)]);
  });

  it("keeps the detail panel content after the pointer leaves", () => {
    app.loadTexts(fixtureTexts());
    const first = [...app.topics.keys()].sort((a, b) => a - b)[0]!;
    app.selectTopic(first);

    const bar = content().querySelector(".sentence-bar") as HTMLElement;
    bar.dispatchEvent(new MouseEvent("mouseenter"));
    const panel = root.querySelector(".detail-panel") as HTMLElement;
    const shown = panel.innerHTML;
    bar.dispatchEvent(new MouseEvent("mouseleave"));
    expect(panel.innerHTML).toBe(shown);
  });
});
