/**
 * Application shell: file loading, topic selection, the shared detail
 * panel, and the all-or-nothing error banner. Any parse or schema
 * failure across a batch of files clears the content area, so a broken
 * export can never leave a partial render on screen.
 */

import { applyHoverDetail, hoverDetail, renderCollection, renderTopic } from "./render.js";
import type { HoverTarget } from "./render.js";
import { parseVizDocument, SchemaError } from "./schema.js";
import type { CollectionIndex, TopicDocument } from "./schema.js";

export interface NamedText {
  name: string;
  text: string;
}

export interface App {
  /** Parse and display a batch of export files; all-or-nothing. */
  loadTexts(files: NamedText[]): void;
  readonly topics: ReadonlyMap<number, TopicDocument>;
  readonly collection: CollectionIndex | null;
  selectTopic(topicId: number): void;
}

export function createApp(root: HTMLElement): App {
  root.replaceChildren();

  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.hidden = true;
  root.appendChild(banner);

  const tabs = document.createElement("nav");
  tabs.className = "topic-tabs";
  root.appendChild(tabs);

  const content = document.createElement("main");
  content.className = "content";
  root.appendChild(content);

  const detail = document.createElement("aside");
  detail.className = "detail-panel";
  detail.textContent = "Hover a chunk line or sentence bar for details.";
  root.appendChild(detail);

  const topics = new Map<number, TopicDocument>();
  let collection: CollectionIndex | null = null;
  let selected: number | null = null;

  function showError(message: string): void {
    banner.textContent = message;
    banner.hidden = false;
    tabs.replaceChildren();
    content.replaceChildren();
  }

  function clearError(): void {
    banner.textContent = "";
    banner.hidden = true;
  }

  function onHover(doc: TopicDocument, target: HoverTarget | null): void {
    if (target === null) return;
    applyHoverDetail(detail, hoverDetail(doc, target));
  }

  function renderAll(): void {
    tabs.replaceChildren();
    content.replaceChildren();
    const ids = [...topics.keys()].sort((a, b) => a - b);
    for (const id of ids) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = id === selected ? "tab tab-active" : "tab";
      button.dataset.topicId = String(id);
      button.textContent = `Topic ${id}`;
      button.addEventListener("click", () => {
        selected = id;
        renderAll();
      });
      tabs.appendChild(button);
    }
    if (selected !== null) {
      const doc = topics.get(selected);
      if (doc !== undefined) {
        content.appendChild(renderTopic(doc, (target) => onHover(doc, target)));
        return;
      }
    }
    if (collection !== null) {
      content.appendChild(
        renderCollection(collection, (topicId) => {
          if (topics.has(topicId)) {
            selected = topicId;
            renderAll();
          }
        }),
      );
    } else if (ids.length === 0) {
      const hint = document.createElement("p");
      hint.className = "empty-hint";
      hint.textContent = "Load visualization export files to begin.";
      content.appendChild(hint);
    }
  }

  function loadTexts(files: NamedText[]): void {
    const parsedTopics: TopicDocument[] = [];
    let parsedCollection: CollectionIndex | null = null;
    for (const file of files) {
      let raw: unknown;
      try {
        raw = JSON.parse(file.text);
      } catch {
        showError(`${file.name}: not valid JSON`);
        return;
      }
      try {
        const parsed = parseVizDocument(raw);
        if (parsed.kind === "topic") parsedTopics.push(parsed.doc);
        else parsedCollection = parsed.doc;
      } catch (err) {
        const reason = err instanceof SchemaError ? err.message : String(err);
        showError(`${file.name}: ${reason}`);
        return;
      }
    }
    clearError();
    for (const doc of parsedTopics) topics.set(doc.topic_id, doc);
    if (parsedCollection !== null) collection = parsedCollection;
    if (selected === null && parsedTopics.length > 0 && collection === null) {
      selected = [...topics.keys()].sort((a, b) => a - b)[0] ?? null;
    }
    renderAll();
  }

  function selectTopic(topicId: number): void {
    if (!topics.has(topicId)) return;
    selected = topicId;
    renderAll();
  }

  renderAll();
  return {
    loadTexts,
    topics,
    selectTopic,
    get collection() {
      return collection;
    },
  };
}

/** Wire drag-drop and the file picker; used by the browser entry point. */
export function attachFileSources(app: App, picker: HTMLInputElement, dropZone: HTMLElement): void {
  async function consume(fileList: FileList | null): Promise<void> {
    if (fileList === null || fileList.length === 0) return;
    const files: NamedText[] = [];
    for (const file of Array.from(fileList)) {
      files.push({ name: file.name, text: await file.text() });
    }
    app.loadTexts(files);
  }

  picker.addEventListener("change", () => {
    void consume(picker.files);
  });
  dropZone.addEventListener("dragover", (event) => {
    event.preventDefault();
  });
  dropZone.addEventListener("drop", (event) => {
    event.preventDefault();
    void consume(event.dataTransfer?.files ?? null);
  });
}
