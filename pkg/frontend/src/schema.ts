/**
 * Visualization export documents, schema version 1.
 *
 * The pipeline emits one topic document per cluster plus a collection
 * index. Parsing is strict: unknown schema versions, missing or extra
 * keys, and out-of-range scores are all rejected up front so the UI
 * never renders a partial document.
 */

export const SCHEMA_VERSION = 1;

export interface SummaryViz {
  text: string;
  valence: number;
}

export interface SentenceViz {
  index: number;
  text: string;
  valence: number;
  arousal: number;
}

export interface ChunkViz {
  index: number;
  text: string;
  valence: number;
  sentences: SentenceViz[];
}

export interface TopicDocument {
  schema: typeof SCHEMA_VERSION;
  topic_id: number;
  abstractive_summary: SummaryViz;
  chunks: ChunkViz[];
}

export interface TopicRef {
  topic_id: number;
  path: string;
  summary: SummaryViz;
  n_chunks: number;
}

export interface CollectionIndex {
  schema: typeof SCHEMA_VERSION;
  collection_summary: SummaryViz;
  topics: TopicRef[];
}

export type VizDocument =
  | { kind: "topic"; doc: TopicDocument }
  | { kind: "collection"; doc: CollectionIndex };

export class SchemaError extends Error {
  override name = "SchemaError";
}

function fail(path: string, message: string): never {
  throw new SchemaError(`${path}: ${message}`);
}

function isObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function isInt(value: unknown): value is number {
  return typeof value === "number" && Number.isInteger(value);
}

function checkKeys(obj: Record<string, unknown>, required: string[], path: string): void {
  const present = Object.keys(obj);
  const missing = required.filter((k) => !present.includes(k));
  if (missing.length > 0) fail(path, `missing keys: ${missing.sort().join(", ")}`);
  const extra = present.filter((k) => !required.includes(k));
  if (extra.length > 0) fail(path, `unexpected keys: ${extra.sort().join(", ")}`);
}

function checkValence(value: unknown, path: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    fail(path, "valence must be a number");
  }
  if (value < -1 || value > 1) fail(path, `valence ${value} outside [-1, 1]`);
  return value;
}

function checkSummary(value: unknown, path: string): SummaryViz {
  if (!isObject(value)) fail(path, "expected an object");
  checkKeys(value, ["text", "valence"], path);
  if (typeof value.text !== "string") fail(`${path}.text`, "must be a string");
  return { text: value.text, valence: checkValence(value.valence, `${path}.valence`) };
}

function checkSentence(value: unknown, path: string, prev: number | null): SentenceViz {
  if (!isObject(value)) fail(path, "expected an object");
  checkKeys(value, ["index", "text", "valence", "arousal"], path);
  if (!isInt(value.index)) fail(`${path}.index`, "must be an integer");
  if (prev !== null && value.index !== prev + 1) {
    fail(`${path}.index`, "sentence indices must be consecutive");
  }
  if (typeof value.text !== "string") fail(`${path}.text`, "must be a string");
  const valence = checkValence(value.valence, `${path}.valence`);
  const arousal = value.arousal;
  if (typeof arousal !== "number" || !Number.isFinite(arousal)) {
    fail(`${path}.arousal`, "must be a number");
  }
  if (arousal < 0 || arousal > 1) fail(`${path}.arousal`, `arousal ${arousal} outside [0, 1]`);
  return { index: value.index, text: value.text, valence, arousal };
}

function checkSchemaVersion(obj: Record<string, unknown>, path: string): void {
  if (!("schema" in obj)) fail(`${path}.schema`, "missing schema version");
  if (obj.schema !== SCHEMA_VERSION) {
    fail(`${path}.schema`, `unsupported schema version ${JSON.stringify(obj.schema)}`);
  }
}

export function parseTopicDocument(raw: unknown): TopicDocument {
  if (!isObject(raw)) fail("topic", "expected an object");
  checkSchemaVersion(raw, "topic");
  checkKeys(raw, ["schema", "topic_id", "abstractive_summary", "chunks"], "topic");
  if (!isInt(raw.topic_id)) fail("topic.topic_id", "must be an integer");
  const summary = checkSummary(raw.abstractive_summary, "topic.abstractive_summary");
  if (!Array.isArray(raw.chunks)) fail("topic.chunks", "must be a list");
  const chunks: ChunkViz[] = [];
  raw.chunks.forEach((chunkRaw: unknown, i: number) => {
    const cpath = `topic.chunks[${i}]`;
    if (!isObject(chunkRaw)) fail(cpath, "expected an object");
    checkKeys(chunkRaw, ["index", "text", "valence", "sentences"], cpath);
    if (!isInt(chunkRaw.index)) fail(`${cpath}.index`, "must be an integer");
    if (chunkRaw.index !== i) fail(`${cpath}.index`, `expected ${i}, got ${chunkRaw.index}`);
    if (typeof chunkRaw.text !== "string" || chunkRaw.text === "") {
      fail(`${cpath}.text`, "must be a non-empty string");
    }
    const valence = checkValence(chunkRaw.valence, `${cpath}.valence`);
    if (!Array.isArray(chunkRaw.sentences) || chunkRaw.sentences.length === 0) {
      fail(`${cpath}.sentences`, "must be a non-empty list");
    }
    const sentences: SentenceViz[] = [];
    let prev: number | null = null;
    chunkRaw.sentences.forEach((sentRaw: unknown, j: number) => {
      const sent = checkSentence(sentRaw, `${cpath}.sentences[${j}]`, prev);
      prev = sent.index;
      sentences.push(sent);
    });
    chunks.push({ index: chunkRaw.index, text: chunkRaw.text, valence, sentences });
  });
  return {
    schema: SCHEMA_VERSION,
    topic_id: raw.topic_id,
    abstractive_summary: summary,
    chunks,
  };
}

export function parseCollectionIndex(raw: unknown): CollectionIndex {
  if (!isObject(raw)) fail("collection", "expected an object");
  checkSchemaVersion(raw, "collection");
  checkKeys(raw, ["schema", "collection_summary", "topics"], "collection");
  const summary = checkSummary(raw.collection_summary, "collection.collection_summary");
  if (!Array.isArray(raw.topics)) fail("collection.topics", "must be a list");
  const seen = new Set<number>();
  const topics: TopicRef[] = [];
  raw.topics.forEach((topicRaw: unknown, i: number) => {
    const tpath = `collection.topics[${i}]`;
    if (!isObject(topicRaw)) fail(tpath, "expected an object");
    checkKeys(topicRaw, ["topic_id", "path", "summary", "n_chunks"], tpath);
    if (!isInt(topicRaw.topic_id)) fail(`${tpath}.topic_id`, "must be an integer");
    if (seen.has(topicRaw.topic_id)) {
      fail(`${tpath}.topic_id`, `duplicate topic id ${topicRaw.topic_id}`);
    }
    seen.add(topicRaw.topic_id);
    if (typeof topicRaw.path !== "string" || topicRaw.path === "") {
      fail(`${tpath}.path`, "must be a non-empty string");
    }
    const topicSummary = checkSummary(topicRaw.summary, `${tpath}.summary`);
    if (!isInt(topicRaw.n_chunks) || topicRaw.n_chunks < 0) {
      fail(`${tpath}.n_chunks`, "must be a non-negative integer");
    }
    topics.push({
      topic_id: topicRaw.topic_id,
      path: topicRaw.path,
      summary: topicSummary,
      n_chunks: topicRaw.n_chunks,
    });
  });
  return { schema: SCHEMA_VERSION, collection_summary: summary, topics };
}

/** Parse either export document kind, telling them apart by shape. */
export function parseVizDocument(raw: unknown): VizDocument {
  if (!isObject(raw)) throw new SchemaError("export document must be an object");
  checkSchemaVersion(raw, "document");
  if ("topic_id" in raw) return { kind: "topic", doc: parseTopicDocument(raw) };
  if ("topics" in raw) return { kind: "collection", doc: parseCollectionIndex(raw) };
  throw new SchemaError("export document is neither a topic nor a collection index");
}
