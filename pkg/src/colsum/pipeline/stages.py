"""Staged pipeline execution with persisted, resumable artifacts.

Each stage writes its artifact before the next begins, so a failed run
keeps everything it finished. Resuming reuses artifacts up to the first
missing (or unreadable) one and recomputes from there; with the stub
backends a recomputed artifact is byte-identical to the original. A lock
file gives one run exclusive ownership of its output directory.

The manifest is the one non-deterministic output (it carries wall-clock
timings), so determinism checks compare everything except manifest.json.
"""

from __future__ import annotations

import contextlib
import dataclasses
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .. import __version__
from ..chunker import SemanticChunk, chunk_sentences, similarity_matrix, weighted_adjacent_scores
from ..cluster import ClusterAssignment, ProjectedPoint, hdbscan, partition_corpus, project
from ..corpus import Corpus, Document, Sentence, load_corpus, segment_sentences
from ..embed_index import (
    LocalEmbeddingBackend,
    RemoteEmbeddingBackend,
    embed,
    query_documents,
)
from ..errors import ColsumError, LockError, StageError
from ..evaluation import concat_ground_truth, score_run, score_table_csv, score_table_text
from ..sentiment import (
    SentimentScore,
    TopicSentiment,
    load_lexicon,
    score_hierarchy,
    score_text,
)
from ..summarize import (
    CompletionParams,
    RemoteCompletionBackend,
    StubCompletionBackend,
    SummaryNode,
    summarize_chunks,
    summarize_collection,
    summarize_topic,
)
from ..topics import (
    TopicSentences,
    TopicTermSet,
    build_topic_term_set,
    extract_topic_sentences,
    fit_lda,
    load_synonym_lexicon,
)
from .config import PipelineConfig, config_snapshot, validate_config
from .export import (
    build_collection_index,
    build_topic_document,
    validate_collection_index,
    validate_topic_document,
)

STAGE_ORDER = (
    "ingest",
    "query",
    "cluster",
    "topics",
    "chunk",
    "summarize",
    "sentiment",
    "evaluate",
    "export",
)

LOCK_FILE = "run.lock"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to audit a run or re-execute it exactly."""

    tool_version: str
    config: dict
    stage_order: tuple[str, ...]
    stage_timings: dict[str, float]
    artifacts: dict[str, str]
    files: tuple[str, ...]
    backend_ids: dict[str, str]
    reused_stages: tuple[str, ...]
    evaluated: bool

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "config": self.config,
            "stage_order": list(self.stage_order),
            "stage_timings": {k: round(v, 6) for k, v in self.stage_timings.items()},
            "artifacts": dict(self.artifacts),
            "files": list(self.files),
            "backend_ids": dict(self.backend_ids),
            "reused_stages": list(self.reused_stages),
            "evaluated": self.evaluated,
        }


@dataclass
class RunState:
    """In-memory objects carried between stages (rebuilt on resume)."""

    corpus_full: Optional[Corpus] = None
    corpus: Optional[Corpus] = None
    points: list[ProjectedPoint] = field(default_factory=list)
    assignment: Optional[ClusterAssignment] = None
    partitions: dict[int, list[Document]] = field(default_factory=dict)
    term_sets: dict[int, TopicTermSet] = field(default_factory=dict)
    topic_sentences: dict[int, TopicSentences] = field(default_factory=dict)
    adjacent_scores: dict[int, list[float]] = field(default_factory=dict)
    chunks: dict[int, list[SemanticChunk]] = field(default_factory=dict)
    chunk_nodes: dict[int, list[SummaryNode]] = field(default_factory=dict)
    topic_nodes: dict[int, Optional[SummaryNode]] = field(default_factory=dict)
    collection_node: Optional[SummaryNode] = None
    sentiments: dict[int, TopicSentiment] = field(default_factory=dict)
    collection_score: Optional[SentimentScore] = None
    rouge: Optional[dict] = None
    _sentence_cache: dict[str, list[Sentence]] = field(default_factory=dict)

    def sentences_of(self, doc_id: str) -> list[Sentence]:
        if doc_id not in self._sentence_cache:
            assert self.corpus is not None
            self._sentence_cache[doc_id] = segment_sentences(self.corpus.get(doc_id))
        return self._sentence_cache[doc_id]


def make_embedding_backend(config: PipelineConfig):
    emb = config.embedding
    if emb.backend == "local":
        return LocalEmbeddingBackend(dim=emb.dim, seed=emb.seed)
    return RemoteEmbeddingBackend(
        endpoint=emb.endpoint,
        model=emb.model,
        api_key_env=emb.api_key_env,
        timeout=emb.timeout,
        batch_size=emb.batch_size,
        max_concurrency=emb.max_concurrency,
    )


def make_completion_backend(config: PipelineConfig):
    comp = config.completion
    if comp.backend == "stub":
        return StubCompletionBackend(context_window=comp.context_window)
    return RemoteCompletionBackend(
        endpoint=comp.endpoint,
        model=comp.params.model,
        api_key_env=comp.api_key_env,
        timeout=comp.timeout,
        context_window=comp.context_window,
    )


def _backend_ids(config: PipelineConfig) -> dict[str, str]:
    emb = make_embedding_backend(config)
    emb_id = emb.kind
    if config.embedding.backend == "remote" and config.embedding.model:
        emb_id = f"{emb_id}:{config.embedding.model}"
    comp = make_completion_backend(config)
    return {"embedding": emb_id, "completion": comp.backend_id}


# ---------------------------------------------------------------------------
# artifact IO


def _dump_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write_text(outdir: Path, rel: str, text: str) -> str:
    target = outdir / rel
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(f"{target.name}.tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, target)
    return rel


def _write_json(outdir: Path, rel: str, payload) -> str:
    return _write_text(outdir, rel, _dump_json(payload))


def _read_json(outdir: Path, rel: str):
    return json.loads((outdir / rel).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# stage bodies: compute_* writes files and fills state, load_* rebuilds state
# from the files. Each returns the list of relative paths involved, primary
# artifact first.


def _compute_ingest(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    corpus = load_corpus(config.corpus.source, config.corpus.format)
    if corpus.n_docs == 0:
        raise ValueError("corpus is empty")
    state.corpus_full = corpus
    state.corpus = corpus
    payload = {
        "source": config.corpus.source,
        "format": config.corpus.format,
        "count": corpus.n_docs,
        "documents": [
            {
                "id": d.id,
                "text": d.text,
                "title": d.title,
                "summary": d.ground_truth_summary,
            }
            for d in corpus
        ],
    }
    return [_write_json(outdir, "corpus.json", payload)]


def _load_ingest(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    payload = _read_json(outdir, "corpus.json")
    docs = tuple(
        Document(
            id=d["id"],
            text=d["text"],
            title=d.get("title"),
            ground_truth_summary=d.get("summary"),
        )
        for d in payload["documents"]
    )
    state.corpus_full = Corpus(documents=docs)
    state.corpus = state.corpus_full
    return ["corpus.json"]


def _compute_query(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    assert config.query is not None and state.corpus_full is not None
    backend = make_embedding_backend(config)
    ranked = query_documents(
        state.corpus_full,
        backend,
        config.query.text,
        config.query.u,
        max_tokens=config.query.max_tokens,
        metric=config.query.metric,
    )
    state.corpus = ranked
    state._sentence_cache.clear()
    payload = {
        "text": config.query.text,
        "u": config.query.u,
        "max_tokens": config.query.max_tokens,
        "metric": config.query.metric,
        "selected": [d.id for d in ranked],
    }
    return [_write_json(outdir, "query.json", payload)]


def _load_query(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    assert state.corpus_full is not None
    payload = _read_json(outdir, "query.json")
    docs = tuple(state.corpus_full.get(doc_id) for doc_id in payload["selected"])
    state.corpus = Corpus(documents=docs)
    state._sentence_cache.clear()
    return ["query.json"]


def _compute_cluster(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    assert state.corpus is not None
    backend = make_embedding_backend(config)
    vectors = embed(backend, [d.text for d in state.corpus])
    pairs = [(d.id, v) for d, v in zip(state.corpus, vectors)]
    proj = config.projection
    points = project(pairs, target_dim=proj.dim, method=proj.method, seed=proj.seed)
    clu = config.clustering
    assignment = hdbscan(
        points,
        min_cluster_size=clu.min_cluster_size,
        min_samples=clu.min_samples,
        selection=clu.selection,
        n_clusters=clu.k,
    )
    state.points = points
    state.assignment = assignment
    payload = {
        "projection": {"method": proj.method, "dim": proj.dim, "seed": proj.seed},
        "clustering": {
            "min_cluster_size": clu.min_cluster_size,
            "min_samples": clu.min_samples,
            "selection": clu.selection,
            "k": clu.k,
        },
        "points": [{"id": p.doc_id, "coords": list(p.coords)} for p in points],
        "labels": [{"id": p.doc_id, "label": assignment.labels[p.doc_id]} for p in points],
        "stabilities": [
            {"label": label, "stability": assignment.stabilities[label]}
            for label in sorted(assignment.stabilities)
        ],
        "n_clusters": assignment.n_clusters,
        "noise_count": assignment.noise_count,
    }
    return [_write_json(outdir, "clusters.json", payload)]


def _load_cluster(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    payload = _read_json(outdir, "clusters.json")
    state.points = [
        ProjectedPoint(doc_id=p["id"], coords=tuple(float(c) for c in p["coords"]))
        for p in payload["points"]
    ]
    state.assignment = ClusterAssignment(
        labels={entry["id"]: entry["label"] for entry in payload["labels"]},
        n_clusters=payload["n_clusters"],
        stabilities={
            entry["label"]: entry["stability"] for entry in payload["stabilities"]
        },
    )
    return ["clusters.json"]


def _compute_topics(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    assert state.corpus is not None and state.assignment is not None
    partitions = partition_corpus(state.corpus, state.assignment, noise_policy="drop")
    if not partitions:
        raise ValueError("clustering produced no clusters, only noise")
    lexicon = load_synonym_lexicon(config.term_set.synonym_lexicon)
    lda = config.lda
    ts = config.term_set
    state.partitions = {cid: partitions[cid] for cid in sorted(partitions)}
    cluster_payloads = []
    for cid, docs in state.partitions.items():
        model = fit_lda(
            docs,
            n_topics=lda.n_topics,
            alpha=lda.alpha,
            beta=lda.beta,
            iterations=lda.iterations,
            seed=lda.seed,
        )
        term_set = build_topic_term_set(
            model,
            freq_threshold=ts.freq_threshold,
            synonym_lexicon=lexicon,
            cluster_id=cid,
            t=ts.t,
            epsilon=ts.epsilon,
        )
        sentences = extract_topic_sentences(docs, term_set)
        state.term_sets[cid] = term_set
        state.topic_sentences[cid] = sentences
        cluster_payloads.append(
            {
                "cluster_id": cid,
                "doc_ids": [d.id for d in docs],
                "terms": {
                    term: sorted(expansion)
                    for term, expansion in sorted(term_set.entries.items())
                },
                "sentences": [
                    {"doc_id": s.doc_id, "index": s.index, "text": s.text}
                    for s in sentences.sentences
                ],
            }
        )
    payload = {
        "lda": {
            "n_topics": lda.n_topics,
            "alpha": lda.alpha,
            "beta": lda.beta,
            "iterations": lda.iterations,
            "seed": lda.seed,
        },
        "term_set": {
            "t": ts.t,
            "epsilon": ts.epsilon,
            "freq_threshold": ts.freq_threshold,
        },
        "clusters": cluster_payloads,
    }
    return [_write_json(outdir, "topics.json", payload)]


def _load_topics(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    assert state.corpus is not None
    payload = _read_json(outdir, "topics.json")
    for entry in payload["clusters"]:
        cid = entry["cluster_id"]
        docs = [state.corpus.get(doc_id) for doc_id in entry["doc_ids"]]
        state.partitions[cid] = docs
        state.term_sets[cid] = TopicTermSet(
            cluster_id=cid,
            entries={
                term: frozenset(expansion) for term, expansion in entry["terms"].items()
            },
        )
        sentences = tuple(
            state.sentences_of(s["doc_id"])[s["index"]] for s in entry["sentences"]
        )
        state.topic_sentences[cid] = TopicSentences(cluster_id=cid, sentences=sentences)
    return ["topics.json"]


def _compute_chunk(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    backend = make_embedding_backend(config)
    ch = config.chunker
    cluster_payloads = []
    for cid, topic_sents in state.topic_sentences.items():
        sentences = topic_sents.sentences
        if not sentences:
            state.adjacent_scores[cid] = []
            state.chunks[cid] = []
            cluster_payloads.append(
                {"cluster_id": cid, "adjacent_scores": [], "chunks": []}
            )
            continue
        vectors = embed(backend, [s.text for s in sentences])
        scores = (
            weighted_adjacent_scores(
                similarity_matrix(vectors), invert_activation=ch.invert_activation
            )
            if len(sentences) > 1
            else []
        )
        chunks = chunk_sentences(
            topic_sents,
            vectors,
            token_limit=ch.token_limit,
            invert_activation=ch.invert_activation,
        )
        state.adjacent_scores[cid] = scores
        state.chunks[cid] = chunks
        cluster_payloads.append(
            {
                "cluster_id": cid,
                "adjacent_scores": scores,
                "chunks": [
                    {
                        "index": c.chunk_index,
                        "span": list(c.sentence_span),
                        "text": c.text,
                        "token_count": c.token_count,
                        "oversized": c.oversized,
                    }
                    for c in chunks
                ],
            }
        )
    payload = {
        "token_limit": ch.token_limit,
        "invert_activation": ch.invert_activation,
        "clusters": cluster_payloads,
    }
    return [_write_json(outdir, "chunks.json", payload)]


def _load_chunk(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    payload = _read_json(outdir, "chunks.json")
    for entry in payload["clusters"]:
        cid = entry["cluster_id"]
        state.adjacent_scores[cid] = [float(s) for s in entry["adjacent_scores"]]
        state.chunks[cid] = [
            SemanticChunk(
                cluster_id=cid,
                chunk_index=c["index"],
                sentence_span=(c["span"][0], c["span"][1]),
                text=c["text"],
                token_count=c["token_count"],
                oversized=c["oversized"],
            )
            for c in entry["chunks"]
        ]
    return ["chunks.json"]


def _node_payload(node: SummaryNode) -> dict:
    return {
        "node_id": node.node_id,
        "level": node.level,
        "source_ids": list(node.source_ids),
        "text": node.text,
        "backend_id": node.backend_id,
        "fold_depth": node.fold_depth,
        "params": dataclasses.asdict(node.params_used),
    }


def _node_from_payload(data: dict) -> SummaryNode:
    return SummaryNode(
        node_id=data["node_id"],
        level=data["level"],
        source_ids=tuple(data["source_ids"]),
        text=data["text"],
        params_used=CompletionParams(**data["params"]),
        backend_id=data["backend_id"],
        fold_depth=data["fold_depth"],
    )


def _compute_summarize(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    backend = make_completion_backend(config)
    params = config.completion.params
    cluster_payloads = []
    for cid, chunks in state.chunks.items():
        if not chunks:
            state.chunk_nodes[cid] = []
            state.topic_nodes[cid] = None
            cluster_payloads.append(
                {"cluster_id": cid, "chunk_nodes": [], "topic_node": None}
            )
            continue
        nodes = summarize_chunks(
            backend,
            chunks,
            params,
            max_concurrency=config.completion.max_concurrency,
            sentences=state.topic_sentences[cid].sentences,
            adjacent_scores=state.adjacent_scores[cid],
        )
        topic_node = summarize_topic(backend, nodes, params, cluster_id=cid)
        state.chunk_nodes[cid] = nodes
        state.topic_nodes[cid] = topic_node
        cluster_payloads.append(
            {
                "cluster_id": cid,
                "chunk_nodes": [_node_payload(n) for n in nodes],
                "topic_node": _node_payload(topic_node),
            }
        )
    topic_nodes = [n for n in state.topic_nodes.values() if n is not None]
    if not topic_nodes:
        raise ValueError("no topic produced any summary")
    collection = summarize_collection(backend, topic_nodes, params)
    state.collection_node = collection
    payload = {
        "backend_id": backend.backend_id,
        "clusters": cluster_payloads,
        "collection": _node_payload(collection),
    }
    return [_write_json(outdir, "summaries.json", payload)]


def _load_summarize(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    payload = _read_json(outdir, "summaries.json")
    for entry in payload["clusters"]:
        cid = entry["cluster_id"]
        state.chunk_nodes[cid] = [_node_from_payload(n) for n in entry["chunk_nodes"]]
        state.topic_nodes[cid] = (
            _node_from_payload(entry["topic_node"]) if entry["topic_node"] else None
        )
    state.collection_node = _node_from_payload(payload["collection"])
    return ["summaries.json"]


def _score_payload(score: SentimentScore) -> dict:
    return {
        "valence": score.valence,
        "arousal": score.arousal,
        "matched_terms": score.matched_terms,
        "token_count": score.token_count,
    }


def _score_from_payload(data: dict) -> SentimentScore:
    return SentimentScore(
        valence=data["valence"],
        arousal=data["arousal"],
        matched_terms=data["matched_terms"],
        token_count=data["token_count"],
    )


def _compute_sentiment(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    assert state.collection_node is not None
    lexicon = load_lexicon(config.sentiment.lexicon)
    weights = config.sentiment.weights
    cluster_payloads = []
    for cid, topic_sents in state.topic_sentences.items():
        node = state.topic_nodes.get(cid)
        summary_text = node.text if node is not None else ""
        if topic_sents.sentences:
            sentiment = score_hierarchy(
                topic_sents.sentences,
                state.chunks[cid],
                summary_text,
                lexicon,
                weights=weights,
            )
        else:
            sentiment = TopicSentiment(
                sentence_scores=(),
                chunk_scores=(),
                topic_score=score_text(summary_text, lexicon),
            )
        state.sentiments[cid] = sentiment
        cluster_payloads.append(
            {
                "cluster_id": cid,
                "sentences": [_score_payload(s) for s in sentiment.sentence_scores],
                "chunks": [_score_payload(s) for s in sentiment.chunk_scores],
                "topic": _score_payload(sentiment.topic_score),
            }
        )
    state.collection_score = score_text(state.collection_node.text, lexicon)
    payload = {
        "weights": weights,
        "clusters": cluster_payloads,
        "collection": _score_payload(state.collection_score),
    }
    return [_write_json(outdir, "sentiment.json", payload)]


def _load_sentiment(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    payload = _read_json(outdir, "sentiment.json")
    for entry in payload["clusters"]:
        cid = entry["cluster_id"]
        state.sentiments[cid] = TopicSentiment(
            sentence_scores=tuple(_score_from_payload(s) for s in entry["sentences"]),
            chunk_scores=tuple(_score_from_payload(s) for s in entry["chunks"]),
            topic_score=_score_from_payload(entry["topic"]),
        )
    state.collection_score = _score_from_payload(payload["collection"])
    return ["sentiment.json"]


def _evaluable(state: RunState) -> bool:
    """Evaluation only makes sense when every clustered doc has a reference."""
    if not state.partitions:
        return False
    return all(
        bool(doc.ground_truth_summary)
        for docs in state.partitions.values()
        for doc in docs
    )


def _compute_evaluate(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    cids = sorted(state.partitions)
    candidates = []
    references = []
    for cid in cids:
        node = state.topic_nodes.get(cid)
        candidates.append(node.text if node is not None else "")
        references.append(concat_ground_truth(state.partitions[cid]))
    run = score_run(candidates, references)
    per_topic = []
    for scores in run.per_topic:
        per_topic.append(
            {
                variant: {
                    "recall": s.recall,
                    "precision": s.precision,
                    "f1": s.f1,
                    "candidate_count": s.candidate_count,
                    "reference_count": s.reference_count,
                    "overlap": s.overlap,
                }
                for variant, s in scores.items()
            }
        )
    overall = {
        variant: {"recall": avg.recall, "precision": avg.precision, "f1": avg.f1}
        for variant, avg in run.overall.items()
    }
    state.rouge = {"clusters": cids, "per_topic": per_topic, "overall": overall}
    files = [
        _write_text(outdir, "rouge.csv", score_table_csv(run)),
        _write_text(outdir, "rouge.txt", score_table_text(run)),
        _write_json(outdir, "rouge.json", state.rouge),
    ]
    return files


def _load_evaluate(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    state.rouge = _read_json(outdir, "rouge.json")
    for rel in ("rouge.csv", "rouge.txt"):
        if not (outdir / rel).exists():
            raise FileNotFoundError(rel)
    return ["rouge.csv", "rouge.txt", "rouge.json"]


def _topic_doc_name(cid: int) -> str:
    return f"viz/topic-{cid:03d}.json"


def _compute_export(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    assert state.collection_node is not None and state.collection_score is not None
    index_entries = []
    topic_files = []
    for cid in state.partitions:
        node = state.topic_nodes.get(cid)
        summary_text = node.text if node is not None else ""
        doc = build_topic_document(
            cid,
            summary_text,
            state.sentiments[cid],
            state.chunks[cid],
            state.topic_sentences[cid].sentences,
        )
        validate_topic_document(doc)
        rel = _topic_doc_name(cid)
        topic_files.append(_write_json(outdir, rel, doc))
        index_entries.append(
            {
                "topic_id": cid,
                "path": rel.split("/", 1)[1],
                "summary": {
                    "text": summary_text,
                    "valence": state.sentiments[cid].topic_score.valence,
                },
                "n_chunks": len(state.chunks[cid]),
            }
        )
    index = build_collection_index(
        index_entries, state.collection_node.text, state.collection_score.valence
    )
    validate_collection_index(index)
    primary = _write_json(outdir, "viz/collection.json", index)
    return [primary, *topic_files]


def _load_export(state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    index = _read_json(outdir, "viz/collection.json")
    validate_collection_index(index)
    files = ["viz/collection.json"]
    for entry in index["topics"]:
        rel = f"viz/{entry['path']}"
        validate_topic_document(_read_json(outdir, rel))
        files.append(rel)
    return files


_COMPUTE: dict[str, Callable[[RunState, PipelineConfig, Path], list[str]]] = {
    "ingest": _compute_ingest,
    "query": _compute_query,
    "cluster": _compute_cluster,
    "topics": _compute_topics,
    "chunk": _compute_chunk,
    "summarize": _compute_summarize,
    "sentiment": _compute_sentiment,
    "evaluate": _compute_evaluate,
    "export": _compute_export,
}

_LOAD: dict[str, Callable[[RunState, PipelineConfig, Path], list[str]]] = {
    "ingest": _load_ingest,
    "query": _load_query,
    "cluster": _load_cluster,
    "topics": _load_topics,
    "chunk": _load_chunk,
    "summarize": _load_summarize,
    "sentiment": _load_sentiment,
    "evaluate": _load_evaluate,
    "export": _load_export,
}


@contextlib.contextmanager
def _dir_lock(outdir: Path):
    """Exclusive ownership of the output directory for one run."""
    lock_path = outdir / LOCK_FILE
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LockError(
            f"output directory is locked by another run: {lock_path} "
            "(remove the file if that run is dead)"
        ) from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(lock_path)


def _run_compute(stage: str, state: RunState, config: PipelineConfig, outdir: Path) -> list[str]:
    try:
        return _COMPUTE[stage](state, config, outdir)
    except StageError:
        raise
    except (ColsumError, ValueError, KeyError, OSError) as exc:
        raise StageError(stage, f"{type(exc).__name__}: {exc}") from exc


def _try_load(stage: str, state: RunState, config: PipelineConfig, outdir: Path) -> list[str] | None:
    """Reuse a persisted artifact; None means absent or unreadable."""
    try:
        return _LOAD[stage](state, config, outdir)
    except (OSError, ValueError, KeyError, TypeError, ColsumError):
        return None


def _active(stage: str, config: PipelineConfig) -> bool:
    if stage == "query":
        return config.query is not None
    return True


def run_pipeline(
    config: PipelineConfig,
    resume: bool = False,
    echo: Callable[[str], None] | None = None,
) -> RunManifest:
    """Execute the staged pipeline and write the run manifest.

    With ``resume=True``, persisted artifacts are reused up to the first
    missing one; everything after that point is recomputed so downstream
    artifacts always belong to the upstream ones next to them.
    """
    validate_config(config)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    say = echo or (lambda _: None)
    with _dir_lock(outdir):
        state = RunState()
        timings: dict[str, float] = {}
        artifacts: dict[str, str] = {}
        files: list[str] = []
        reused: list[str] = []
        executed: list[str] = []
        evaluated = False
        must_compute = not resume
        for stage in STAGE_ORDER:
            if not _active(stage, config):
                continue
            if stage == "evaluate":
                if not _evaluable(state):
                    continue
                evaluated = True
            start = time.perf_counter()
            stage_files = None
            if not must_compute:
                stage_files = _try_load(stage, state, config, outdir)
                if stage_files is None:
                    must_compute = True
                else:
                    reused.append(stage)
                    say(f"[{stage}] reused {stage_files[0]}")
            if stage_files is None:
                stage_files = _run_compute(stage, state, config, outdir)
                say(f"[{stage}] wrote {stage_files[0]}")
            executed.append(stage)
            artifacts[stage] = stage_files[0]
            files.extend(stage_files)
            timings[stage] = time.perf_counter() - start
        files.append(MANIFEST_FILE)
        manifest = RunManifest(
            tool_version=__version__,
            config=config_snapshot(config),
            stage_order=tuple(executed),
            stage_timings=timings,
            artifacts=artifacts,
            files=tuple(sorted(set(files))),
            backend_ids=_backend_ids(config),
            reused_stages=tuple(reused),
            evaluated=evaluated,
        )
        _write_json(outdir, MANIFEST_FILE, manifest.to_dict())
    return manifest


def _upstream(stage: str, config: PipelineConfig) -> list[str]:
    idx = STAGE_ORDER.index(stage)
    return [
        s
        for s in STAGE_ORDER[:idx]
        if s != "evaluate" and _active(s, config)
    ]


def run_single_stage(
    config: PipelineConfig,
    stage: str,
    echo: Callable[[str], None] | None = None,
) -> str:
    """Recompute one stage from its persisted upstream artifacts.

    Upstream artifacts must already exist in the output directory; the
    manifest is only rewritten by full runs.
    """
    if stage not in STAGE_ORDER:
        raise ValueError(f"unknown stage {stage!r}")
    validate_config(config)
    if stage == "query" and config.query is None:
        raise StageError(stage, "config has no query section")
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    say = echo or (lambda _: None)
    with _dir_lock(outdir):
        state = RunState()
        for dep in _upstream(stage, config):
            if _try_load(dep, state, config, outdir) is None:
                raise StageError(
                    stage,
                    f"missing upstream artifact for '{dep}'; run that stage or a full run first",
                )
        if stage == "evaluate" and not _evaluable(state):
            raise StageError(stage, "ground-truth summaries are missing; nothing to evaluate")
        stage_files = _run_compute(stage, state, config, outdir)
        say(f"[{stage}] wrote {stage_files[0]}")
    return str(outdir / stage_files[0])
