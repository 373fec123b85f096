/**
 * Three-tier topic rendering: chunk strip on top, sentence bars in the
 * middle, the colored abstractive summary at the bottom. Rendering is a
 * pure function of the parsed document, so reloading the same file
 * reproduces the identical DOM structure.
 */

import { arousalHeight, formatScore, valenceColor } from "./color.js";
import type { CollectionIndex, TopicDocument } from "./schema.js";

export type HoverTarget =
  | { kind: "chunk"; chunk: number }
  | { kind: "sentence"; chunk: number; sentence: number };

export interface HoverDetail {
  title: string;
  text: string;
  scores: { label: string; value: number }[];
}

export type HoverListener = (target: HoverTarget | null) => void;

/**
 * Resolve a hover target to its text and scores.
 *
 * Returns null when the target does not exist in the document; callers
 * treat that as a no-op and leave the panel unchanged.
 */
export function hoverDetail(doc: TopicDocument, target: HoverTarget): HoverDetail | null {
  const chunk = doc.chunks[target.chunk];
  if (chunk === undefined) return null;
  if (target.kind === "chunk") {
    return {
      title: `Chunk ${chunk.index}`,
      text: chunk.text,
      scores: [{ label: "valence", value: chunk.valence }],
    };
  }
  const sentence = chunk.sentences.find((s) => s.index === target.sentence);
  if (sentence === undefined) return null;
  return {
    title: `Sentence ${sentence.index} (chunk ${chunk.index})`,
    text: sentence.text,
    scores: [
      { label: "valence", value: sentence.valence },
      { label: "arousal", value: sentence.arousal },
    ],
  };
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) node.className = className;
  return node;
}

function watchHover(node: HTMLElement, target: HoverTarget, onHover: HoverListener): void {
  node.addEventListener("mouseenter", () => onHover(target));
  node.addEventListener("mouseleave", () => onHover(null));
}

/** Render one topic document; hover events flow through onHover. */
export function renderTopic(doc: TopicDocument, onHover: HoverListener = () => {}): HTMLElement {
  const root = el("section", "topic-view");
  root.dataset.topicId = String(doc.topic_id);

  const heading = el("h2", "topic-heading");
  heading.textContent = `Topic ${doc.topic_id}`;
  root.appendChild(heading);

  const strip = el("div", "chunk-strip");
  for (const chunk of doc.chunks) {
    const line = el("div", "chunk-line");
    line.dataset.chunk = String(chunk.index);
    line.style.backgroundColor = valenceColor(chunk.valence);
    line.style.flexGrow = String(chunk.sentences.length);
    line.title = `Chunk ${chunk.index}`;
    watchHover(line, { kind: "chunk", chunk: chunk.index }, onHover);
    strip.appendChild(line);
  }
  root.appendChild(strip);

  const bars = el("div", "sentence-bars");
  for (const chunk of doc.chunks) {
    const group = el("div", "chunk-group");
    group.dataset.chunk = String(chunk.index);
    for (const sentence of chunk.sentences) {
      const bar = el("div", "sentence-bar");
      bar.dataset.chunk = String(chunk.index);
      bar.dataset.sentence = String(sentence.index);
      bar.style.backgroundColor = valenceColor(sentence.valence);
      bar.style.height = `${arousalHeight(sentence.arousal)}px`;
      watchHover(bar, { kind: "sentence", chunk: chunk.index, sentence: sentence.index }, onHover);
      group.appendChild(bar);
    }
    bars.appendChild(group);
  }
  root.appendChild(bars);

  const summary = el("p", "topic-summary");
  summary.textContent = doc.abstractive_summary.text;
  summary.style.color = valenceColor(doc.abstractive_summary.valence);
  root.appendChild(summary);

  return root;
}

/** Render the collection overview shown before a topic is selected. */
export function renderCollection(
  index: CollectionIndex,
  onSelect: (topicId: number) => void = () => {},
): HTMLElement {
  const root = el("section", "collection-view");

  const summary = el("p", "collection-summary");
  summary.textContent = index.collection_summary.text;
  summary.style.color = valenceColor(index.collection_summary.valence);
  root.appendChild(summary);

  const list = el("ul", "collection-topics");
  for (const topic of index.topics) {
    const item = el("li", "collection-topic");
    item.dataset.topicId = String(topic.topic_id);
    const button = el("button", "topic-link");
    button.type = "button";
    button.textContent = `Topic ${topic.topic_id} (${topic.n_chunks} chunks)`;
    button.style.color = valenceColor(topic.summary.valence);
    button.addEventListener("click", () => onSelect(topic.topic_id));
    item.appendChild(button);
    const blurb = el("span", "topic-blurb");
    blurb.textContent = topic.summary.text;
    item.appendChild(blurb);
    list.appendChild(item);
  }
  root.appendChild(list);
  return root;
}

/** Replace the detail panel's content; a null detail leaves it alone. */
export function applyHoverDetail(panel: HTMLElement, detail: HoverDetail | null): void {
  if (detail === null) return;
  panel.replaceChildren();
  const title = el("h3", "detail-title");
  title.textContent = detail.title;
  panel.appendChild(title);
  const scores = el("dl", "detail-scores");
  for (const { label, value } of detail.scores) {
    const dt = el("dt");
    dt.textContent = label;
    const dd = el("dd");
    dd.textContent = formatScore(value);
    scores.appendChild(dt);
    scores.appendChild(dd);
  }
  panel.appendChild(scores);
  const text = el("p", "detail-text");
  text.textContent = detail.text;
  panel.appendChild(text);
}
