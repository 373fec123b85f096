"""Hierarchical zero-shot summarization over a pluggable completion backend.

Each semantic chunk is summarized with a trailing "Tl;dr:" prompt, chunk
summaries concatenate into a topic prompt, and topic summaries concatenate
into the collection prompt. A deterministic extractive stub backend keeps
the whole tree byte-reproducible offline; a remote HTTP backend speaks the
common completion-API shape.
"""

from __future__ import annotations

import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence

import requests

from .chunker import SemanticChunk, split_oversized_chunk
from .corpus import split_sentences
from .errors import (
    BackendError,
    BackendUnreachableError,
    ContextOverflowError,
    RateLimitError,
)
from .retry import retry_call

PROMPT_SUFFIX = "\n\nTl;dr:"
SEPARATOR = "\n\n"

LEVELS = ("chunk", "topic", "collection")


@dataclass(frozen=True)
class CompletionParams:
    """Decoding parameters sent with every completion request."""

    model: str = "stub"
    temperature: float = 0.3
    top_p: float = 0.9
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    max_output_tokens: int = 256

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not (0.0 < self.top_p <= 1.0):
            raise ValueError("top_p must be in (0, 1]")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


@dataclass(frozen=True)
class SummaryNode:
    """One node of the summary tree, with provenance for audits."""

    node_id: str
    level: str
    source_ids: tuple[str, ...]
    text: str
    params_used: CompletionParams
    backend_id: str
    fold_depth: int = 0


def _tokens(text: str) -> int:
    return len(text.split())


class CompletionBackend(Protocol):
    backend_id: str
    context_window: int

    def complete(self, prompt: str, params: CompletionParams) -> str: ...


_PARAGRAPH_SPLIT = re.compile(r"\n\s*\n")


class StubCompletionBackend:
    """Offline extractive stand-in for a text-completion service.

    Returns the first sentence of each paragraph of the prompt (the
    trailing "Tl;dr:" paragraph excluded), truncated to the requested
    output budget. Pure function of its input: same prompt, same bytes.
    """

    backend_id = "stub"

    def __init__(self, context_window: int = 4096) -> None:
        self.context_window = context_window

    def complete(self, prompt: str, params: CompletionParams) -> str:
        if _tokens(prompt) > self.context_window:
            raise ContextOverflowError(
                f"prompt of {_tokens(prompt)} tokens exceeds window {self.context_window}"
            )
        paragraphs = [p.strip() for p in _PARAGRAPH_SPLIT.split(prompt) if p.strip()]
        if paragraphs and paragraphs[-1] == PROMPT_SUFFIX.strip():
            paragraphs = paragraphs[:-1]
        leads = []
        for para in paragraphs:
            pieces = split_sentences(para)
            if pieces:
                leads.append(pieces[0])
        text = " ".join(leads)
        words = text.split()
        if len(words) > params.max_output_tokens:
            text = " ".join(words[: params.max_output_tokens])
        return text


class RemoteCompletionBackend:
    """Client for an HTTP completion service.

    Request: ``{"model", "prompt", "temperature", "top_p",
    "frequency_penalty", "presence_penalty", "max_tokens"}``; response:
    ``{"choices": [{"text": ...}]}``. The API key is read from the
    environment at call time, never from configuration files.
    """

    def __init__(
        self,
        endpoint: str,
        model: str = "",
        api_key_env: str = "COMPLETION_API_KEY",
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff: float = 0.5,
        context_window: int = 4096,
        session: requests.Session | None = None,
    ) -> None:
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.context_window = context_window
        self._session = session or requests.Session()

    @property
    def backend_id(self) -> str:
        return f"remote:{self.model}" if self.model else "remote"

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, prompt: str, params: CompletionParams) -> str:
        payload = {
            "model": params.model or self.model,
            "prompt": prompt,
            "temperature": params.temperature,
            "top_p": params.top_p,
            "frequency_penalty": params.frequency_penalty,
            "presence_penalty": params.presence_penalty,
            "max_tokens": params.max_output_tokens,
        }
        try:
            resp = self._session.post(
                self.endpoint, json=payload, headers=self._headers(), timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise BackendUnreachableError(f"completion service unreachable: {exc}") from exc
        if resp.status_code == 429:
            raise RateLimitError("completion service rate limit")
        if resp.status_code >= 500:
            raise BackendError(f"completion service error {resp.status_code}", retryable=True)
        if resp.status_code != 200:
            raise BackendError(
                f"completion service rejected request ({resp.status_code}): {resp.text[:200]}"
            )
        try:
            return str(resp.json()["choices"][0]["text"])
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"malformed completion response: {exc}") from exc

    def complete(self, prompt: str, params: CompletionParams) -> str:
        if _tokens(prompt) > self.context_window:
            raise ContextOverflowError(
                f"prompt of {_tokens(prompt)} tokens exceeds window {self.context_window}"
            )
        return retry_call(
            lambda: self._post(prompt, params),
            attempts=self.max_retries,
            base_delay=self.backoff,
        )


def complete(backend: CompletionBackend, prompt: str, params: CompletionParams) -> str:
    """Run one completion; the result is guaranteed non-empty."""
    text = backend.complete(prompt, params).strip()
    if not text:
        raise BackendError("backend returned empty text")
    return text


def _chunk_id(chunk: SemanticChunk) -> str:
    return f"chunk-{chunk.cluster_id}-{chunk.chunk_index}"


def summarize_chunk(
    backend: CompletionBackend,
    chunk: SemanticChunk,
    params: CompletionParams,
    *,
    sentences: Sequence | None = None,
    adjacent_scores: Sequence[float] | None = None,
) -> SummaryNode:
    """Summarize one semantic chunk.

    On context overflow, when the chunk's sentences and adjacent scores
    are supplied, the chunk is re-split at its score discontinuity and the
    part summaries are folded into a single node (depth recorded);
    otherwise the overflow propagates.
    """
    if not chunk.text.strip():
        raise ValueError("chunk text is empty")
    prompt = chunk.text + PROMPT_SUFFIX
    try:
        text = complete(backend, prompt, params)
        fold_depth = 0
    except ContextOverflowError:
        if sentences is None or adjacent_scores is None:
            raise
        limit = max(1, backend.context_window - _tokens(PROMPT_SUFFIX) - 1)
        parts = split_oversized_chunk(chunk, adjacent_scores, limit, sentences)
        if len(parts) == 1:
            raise
        part_nodes = [
            summarize_chunk(
                backend, part, params, sentences=sentences, adjacent_scores=adjacent_scores
            )
            for part in parts
        ]
        text, depth = _summarize_series(backend, [n.text for n in part_nodes], params)
        fold_depth = 1 + max([depth, *(n.fold_depth for n in part_nodes)])
    return SummaryNode(
        node_id=f"sum-{_chunk_id(chunk)}",
        level="chunk",
        source_ids=(_chunk_id(chunk),),
        text=text,
        params_used=params,
        backend_id=backend.backend_id,
        fold_depth=fold_depth,
    )


def _summarize_series(
    backend: CompletionBackend, texts: Sequence[str], params: CompletionParams
) -> tuple[str, int]:
    """Summarize a concatenation, folding pairwise when it overflows."""
    prompt = SEPARATOR.join(texts) + PROMPT_SUFFIX
    if _tokens(prompt) <= backend.context_window:
        return complete(backend, prompt, params), 0
    if len(texts) == 1:
        raise ContextOverflowError("single summary exceeds the context window")
    mid = (len(texts) + 1) // 2
    left, dl = _summarize_series(backend, texts[:mid], params)
    right, dr = _summarize_series(backend, texts[mid:], params)
    pair_prompt = SEPARATOR.join([left, right]) + PROMPT_SUFFIX
    if _tokens(pair_prompt) > backend.context_window:
        # outputs are not shrinking, so further folds cannot converge
        raise ContextOverflowError("folded summaries still exceed the context window")
    return complete(backend, pair_prompt, params), 1 + max(dl, dr)


def summarize_topic(
    backend: CompletionBackend,
    chunk_nodes: Sequence[SummaryNode],
    params: CompletionParams,
    *,
    cluster_id: int,
) -> SummaryNode:
    """Fold chunk summaries (in chunk order) into one topic summary."""
    if not chunk_nodes:
        raise ValueError("need at least one chunk summary")
    text, fold_depth = _summarize_series(backend, [n.text for n in chunk_nodes], params)
    return SummaryNode(
        node_id=f"sum-topic-{cluster_id}",
        level="topic",
        source_ids=tuple(n.node_id for n in chunk_nodes),
        text=text,
        params_used=params,
        backend_id=backend.backend_id,
        fold_depth=fold_depth,
    )


def summarize_collection(
    backend: CompletionBackend,
    topic_nodes: Sequence[SummaryNode],
    params: CompletionParams,
) -> SummaryNode:
    """Fold all topic summaries into the single collection summary."""
    if not topic_nodes:
        raise ValueError("need at least one topic summary")
    text, fold_depth = _summarize_series(backend, [n.text for n in topic_nodes], params)
    return SummaryNode(
        node_id="sum-collection",
        level="collection",
        source_ids=tuple(n.node_id for n in topic_nodes),
        text=text,
        params_used=params,
        backend_id=backend.backend_id,
        fold_depth=fold_depth,
    )


def summarize_chunks(
    backend: CompletionBackend,
    chunks: Sequence[SemanticChunk],
    params: CompletionParams,
    *,
    max_concurrency: int = 1,
    sentences: Sequence | None = None,
    adjacent_scores: Sequence[float] | None = None,
) -> list[SummaryNode]:
    """Summarize many chunks, preserving order, optionally in parallel."""

    def run(chunk: SemanticChunk) -> SummaryNode:
        return summarize_chunk(
            backend, chunk, params, sentences=sentences, adjacent_scores=adjacent_scores
        )

    if max_concurrency > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
            return list(pool.map(run, chunks))
    return [run(chunk) for chunk in chunks]
