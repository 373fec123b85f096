"""Dashboard export documents and their schema validator.

One JSON document per topic plus a collection index, all stamped with
``"schema": 1``. The dashboard refuses documents whose schema version it
does not know, so the validator here is strict about shape and ranges.
"""

from __future__ import annotations

from typing import Sequence

from ..chunker import SemanticChunk
from ..corpus import Sentence
from ..sentiment import TopicSentiment

SCHEMA_VERSION = 1


def build_topic_document(
    cluster_id: int,
    summary_text: str,
    sentiment: TopicSentiment,
    chunks: Sequence[SemanticChunk],
    sentences: Sequence[Sentence],
) -> dict:
    """Assemble one topic's export document.

    Sentence indices refer to positions in the topic's extracted sentence
    list, matching the chunk spans. A topic with no sentences exports an
    empty chunk list.
    """
    if len(sentiment.chunk_scores) != len(chunks):
        raise ValueError("one chunk score per chunk is required")
    if len(sentiment.sentence_scores) != len(sentences):
        raise ValueError("one sentence score per sentence is required")
    chunk_records = []
    for chunk, chunk_score in zip(chunks, sentiment.chunk_scores):
        start, end = chunk.sentence_span
        sentence_records = [
            {
                "index": j,
                "text": sentences[j].text,
                "valence": sentiment.sentence_scores[j].valence,
                "arousal": sentiment.sentence_scores[j].arousal,
            }
            for j in range(start, end + 1)
        ]
        chunk_records.append(
            {
                "index": chunk.chunk_index,
                "text": chunk.text,
                "valence": chunk_score.valence,
                "sentences": sentence_records,
            }
        )
    return {
        "schema": SCHEMA_VERSION,
        "topic_id": cluster_id,
        "abstractive_summary": {
            "text": summary_text,
            "valence": sentiment.topic_score.valence,
        },
        "chunks": chunk_records,
    }


def build_collection_index(
    topics: Sequence[dict],
    collection_summary_text: str,
    collection_valence: float,
) -> dict:
    """Assemble the collection index pointing at the per-topic documents.

    ``topics`` entries need ``topic_id``, ``path``, ``summary`` and
    ``n_chunks`` keys, as produced by the export stage.
    """
    return {
        "schema": SCHEMA_VERSION,
        "collection_summary": {
            "text": collection_summary_text,
            "valence": collection_valence,
        },
        "topics": list(topics),
    }


def _fail(path: str, message: str) -> None:
    raise ValueError(f"{path}: {message}")


def _check_keys(obj: dict, required: set[str], path: str) -> None:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    missing = required - set(obj)
    if missing:
        _fail(path, f"missing keys: {', '.join(sorted(missing))}")
    extra = set(obj) - required
    if extra:
        _fail(path, f"unexpected keys: {', '.join(sorted(extra))}")


def _check_valence(value, path: str) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        _fail(path, "valence must be a number")
    if not -1.0 <= float(value) <= 1.0:
        _fail(path, f"valence {value} outside [-1, 1]")


def _check_summary(obj, path: str) -> None:
    _check_keys(obj, {"text", "valence"}, path)
    if not isinstance(obj["text"], str):
        _fail(path + ".text", "must be a string")
    _check_valence(obj["valence"], path + ".valence")


def validate_topic_document(doc: dict) -> None:
    """Raise ValueError when a topic export violates schema version 1."""
    _check_keys(doc, {"schema", "topic_id", "abstractive_summary", "chunks"}, "topic")
    if doc["schema"] != SCHEMA_VERSION:
        _fail("topic.schema", f"unsupported schema version {doc['schema']!r}")
    if not isinstance(doc["topic_id"], int) or isinstance(doc["topic_id"], bool):
        _fail("topic.topic_id", "must be an integer")
    _check_summary(doc["abstractive_summary"], "topic.abstractive_summary")
    if not isinstance(doc["chunks"], list):
        _fail("topic.chunks", "must be a list")
    for i, chunk in enumerate(doc["chunks"]):
        cpath = f"topic.chunks[{i}]"
        _check_keys(chunk, {"index", "text", "valence", "sentences"}, cpath)
        if not isinstance(chunk["index"], int) or isinstance(chunk["index"], bool):
            _fail(cpath + ".index", "must be an integer")
        if chunk["index"] != i:
            _fail(cpath + ".index", f"expected {i}, got {chunk['index']}")
        if not isinstance(chunk["text"], str) or not chunk["text"]:
            _fail(cpath + ".text", "must be a non-empty string")
        _check_valence(chunk["valence"], cpath + ".valence")
        if not isinstance(chunk["sentences"], list) or not chunk["sentences"]:
            _fail(cpath + ".sentences", "must be a non-empty list")
        last_index = None
        for j, sent in enumerate(chunk["sentences"]):
            spath = f"{cpath}.sentences[{j}]"
            _check_keys(sent, {"index", "text", "valence", "arousal"}, spath)
            if not isinstance(sent["index"], int) or isinstance(sent["index"], bool):
                _fail(spath + ".index", "must be an integer")
            if last_index is not None and sent["index"] != last_index + 1:
                _fail(spath + ".index", "sentence indices must be consecutive")
            last_index = sent["index"]
            if not isinstance(sent["text"], str):
                _fail(spath + ".text", "must be a string")
            _check_valence(sent["valence"], spath + ".valence")
            arousal = sent["arousal"]
            if not isinstance(arousal, (int, float)) or isinstance(arousal, bool):
                _fail(spath + ".arousal", "must be a number")
            if not 0.0 <= float(arousal) <= 1.0:
                _fail(spath + ".arousal", f"arousal {arousal} outside [0, 1]")


def validate_collection_index(doc: dict) -> None:
    """Raise ValueError when a collection index violates schema version 1."""
    _check_keys(doc, {"schema", "collection_summary", "topics"}, "collection")
    if doc["schema"] != SCHEMA_VERSION:
        _fail("collection.schema", f"unsupported schema version {doc['schema']!r}")
    _check_summary(doc["collection_summary"], "collection.collection_summary")
    if not isinstance(doc["topics"], list):
        _fail("collection.topics", "must be a list")
    seen_ids = set()
    for i, topic in enumerate(doc["topics"]):
        tpath = f"collection.topics[{i}]"
        _check_keys(topic, {"topic_id", "path", "summary", "n_chunks"}, tpath)
        tid = topic["topic_id"]
        if not isinstance(tid, int) or isinstance(tid, bool):
            _fail(tpath + ".topic_id", "must be an integer")
        if tid in seen_ids:
            _fail(tpath + ".topic_id", f"duplicate topic id {tid}")
        seen_ids.add(tid)
        if not isinstance(topic["path"], str) or not topic["path"]:
            _fail(tpath + ".path", "must be a non-empty string")
        _check_summary(topic["summary"], tpath + ".summary")
        n_chunks = topic["n_chunks"]
        if not isinstance(n_chunks, int) or isinstance(n_chunks, bool) or n_chunks < 0:
            _fail(tpath + ".n_chunks", "must be a non-negative integer")


def validate_viz_document(doc: dict) -> None:
    """Validate either export document kind, telling them apart by shape."""
    if not isinstance(doc, dict):
        raise ValueError("export document must be an object")
    if "topic_id" in doc:
        validate_topic_document(doc)
    elif "topics" in doc:
        validate_collection_index(doc)
    else:
        raise ValueError("export document is neither a topic nor a collection index")
