"""Splitting topic sentences into semantic chunks.

Adjacent sentence similarities pass through a reverse-sigmoid activation,
the two superdiagonals of the similarity matrix are summed per row, and
relative minima of that score list become chunk boundaries. Chunks that
exceed the token budget are split recursively at the sharpest score
discontinuity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .embed_index import EmbeddingVector
from .topics import TopicSentences


@dataclass(frozen=True)
class SimilarityMatrix:
    """Pairwise cosine similarities between sentence embeddings.

    Rows and columns of degenerate (all-zero) embeddings are defined as 0
    and their positions recorded.
    """

    n: int
    entries: np.ndarray
    degenerate: tuple[int, ...] = ()


@dataclass(frozen=True)
class SemanticChunk:
    """A contiguous run of topic sentences.

    ``sentence_span`` is an inclusive (start, end) pair into the topic
    sentence list. ``oversized`` marks chunks beyond the token limit that
    are too short to split further.
    """

    cluster_id: int
    chunk_index: int
    sentence_span: tuple[int, int]
    text: str
    token_count: int
    oversized: bool = False


def similarity_matrix(embeddings: Sequence[EmbeddingVector]) -> SimilarityMatrix:
    """Cosine similarity of every embedding pair."""
    if not embeddings:
        raise ValueError("need at least one embedding")
    matrix = np.asarray([e.values for e in embeddings], dtype=float)
    norms = np.linalg.norm(matrix, axis=1)
    degenerate = tuple(int(i) for i in np.flatnonzero(norms == 0.0))
    safe = np.where(norms > 0.0, norms, 1.0)
    unit = matrix / safe[:, None]
    entries = np.clip(unit @ unit.T, -1.0, 1.0)
    for i in degenerate:
        entries[i, :] = 0.0
        entries[:, i] = 0.0
    return SimilarityMatrix(n=len(embeddings), entries=entries, degenerate=degenerate)


def activation_weight(x: float) -> float:
    """Reverse sigmoid 1/(1 + exp(0.5x)); strictly decreasing, range (0, 1)."""
    if not math.isfinite(x):
        raise ValueError("similarity must be finite")
    return 1.0 / (1.0 + math.exp(0.5 * x))


def weighted_adjacent_scores(
    matrix: SimilarityMatrix, invert_activation: bool = False
) -> list[float]:
    """Per-row sum of activated superdiagonal similarities.

    Row i contributes w(m[i][i+1]) + w(m[i][i+2]); the last row only has
    the single adjacent cell. ``invert_activation`` feeds -x through the
    activation so low-similarity boundaries score as minima instead.
    """
    n = matrix.n
    if n < 2:
        raise ValueError("need at least two sentences for adjacent scores")
    sign = -1.0 if invert_activation else 1.0
    entries = matrix.entries
    scores = []
    for i in range(n - 1):
        score = activation_weight(sign * float(entries[i, i + 1]))
        if i + 2 < n:
            score += activation_weight(sign * float(entries[i, i + 2]))
        scores.append(score)
    return scores


def find_relative_minima(
    scores: Sequence[float], include_plateaus: bool = False
) -> list[int]:
    """Indices that strictly drop below both neighbors.

    With ``include_plateaus`` a flat valley also splits, reported at its
    first index; by default plateaus are not minima.
    """
    if len(scores) == 0:
        raise ValueError("scores must be non-empty")
    minima = []
    n = len(scores)
    for i in range(1, n - 1):
        if scores[i - 1] > scores[i] and scores[i] < scores[i + 1]:
            minima.append(i)
        elif include_plateaus and scores[i - 1] > scores[i]:
            j = i
            while j + 1 < n and scores[j + 1] == scores[i]:
                j += 1
            if j + 1 < n and scores[j + 1] > scores[i] and j > i:
                minima.append(i)
    return minima


def _token_count(text: str) -> int:
    return len(text.split())


def _make_chunk(
    cluster_id: int, sentences: Sequence, start: int, end: int, index: int = -1
) -> SemanticChunk:
    text = " ".join(sentences[i].text for i in range(start, end + 1))
    return SemanticChunk(
        cluster_id=cluster_id,
        chunk_index=index,
        sentence_span=(start, end),
        text=text,
        token_count=_token_count(text),
    )


def split_oversized_chunk(
    chunk: SemanticChunk,
    adjacent_scores: Sequence[float],
    token_limit: int,
    sentences: Sequence | None = None,
) -> list[SemanticChunk]:
    """Recursively split an over-budget chunk at its score discontinuity.

    The split point maximizes |a[s-1] - a[s]| + |a[s] - a[s+1]| over the
    chunk's interior boundary scores (one-sided at three-sentence chunks),
    lowest index on ties. Chunks of one or two sentences that still exceed
    the limit come back flagged ``oversized``.
    """
    if chunk.token_count <= token_limit:
        return [chunk]
    start, end = chunk.sentence_span
    n_sent = end - start + 1
    if n_sent <= 2:
        return [replace(chunk, oversized=True)]
    if sentences is None:
        raise ValueError("sentences are required to split a chunk")
    # boundary s sits between sentences start+s and start+s+1
    local = [float(adjacent_scores[i]) for i in range(start, end)]
    n_local = len(local)
    if n_local >= 3:
        candidates = range(1, n_local - 1)
    else:
        candidates = range(n_local)
    best_s = None
    best_gap = -1.0
    for s in candidates:
        gap = 0.0
        if s - 1 >= 0:
            gap += abs(local[s - 1] - local[s])
        if s + 1 < n_local:
            gap += abs(local[s] - local[s + 1])
        if gap > best_gap:
            best_gap = gap
            best_s = s
    assert best_s is not None
    split_at = start + best_s
    left = _make_chunk(chunk.cluster_id, sentences, start, split_at)
    right = _make_chunk(chunk.cluster_id, sentences, split_at + 1, end)
    out = []
    for part in (left, right):
        out.extend(split_oversized_chunk(part, adjacent_scores, token_limit, sentences))
    return out


def chunk_sentences(
    topic_sentences: TopicSentences,
    embeddings: Sequence[EmbeddingVector],
    token_limit: int = 3000,
    invert_activation: bool = False,
) -> list[SemanticChunk]:
    """Partition topic sentences into semantic chunks.

    Relative minima of the weighted adjacent scores mark boundaries: a
    minimum at score index s closes the chunk after sentence s. Oversized
    chunks are then split recursively. Spans always partition the input.
    """
    sentences = topic_sentences.sentences
    n = len(sentences)
    if n == 0:
        return []
    cluster_id = topic_sentences.cluster_id
    if len(embeddings) != n:
        raise ValueError("one embedding per sentence is required")
    if n == 1:
        chunks = [_make_chunk(cluster_id, sentences, 0, 0)]
        scores: list[float] = []
    else:
        matrix = similarity_matrix(embeddings)
        scores = weighted_adjacent_scores(matrix, invert_activation=invert_activation)
        bounds = find_relative_minima(scores)
        chunks = []
        start = 0
        for b in bounds:
            chunks.append(_make_chunk(cluster_id, sentences, start, b))
            start = b + 1
        chunks.append(_make_chunk(cluster_id, sentences, start, n - 1))
    final: list[SemanticChunk] = []
    for chunk in chunks:
        final.extend(split_oversized_chunk(chunk, scores, token_limit, sentences))
    return [replace(chunk, chunk_index=i) for i, chunk in enumerate(final)]
