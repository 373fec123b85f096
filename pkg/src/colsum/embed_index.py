"""Text encoders and a vector index for u-nearest-neighbor retrieval.

Two encoder backends share one interface: a deterministic local encoder
(hashed bag-of-words pushed through a seeded random projection) that keeps
the whole pipeline runnable offline, and a client for a remote HTTP service
speaking the common embedding-API shape. Vectors go into a ``VectorIndex``
supporting an exact scan and a partitioned (inverted-list) mode.
"""

from __future__ import annotations

import hashlib
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np
import requests

from .corpus import Corpus, load_stopwords
from .errors import BackendError, BackendUnreachableError, RateLimitError
from .retry import retry_call

_TOKEN_RE = re.compile(r"[a-z0-9']+")
_N_BUCKETS = 4096

METRICS = ("cosine", "inner-product", "euclidean")
MODES = ("exact", "partitioned")


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-length real vector produced by an encoder backend."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("embedding must have at least one dimension")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding values must be finite")

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def degenerate(self) -> bool:
        """True for the all-zeros vector (empty or fully unseen input)."""
        return all(v == 0.0 for v in self.values)


class EmbeddingBackend(Protocol):
    kind: str

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]: ...


class LocalEmbeddingBackend:
    """Deterministic offline encoder.

    Content-word counts (stopwords dropped, so topical terms dominate) are
    hashed into a fixed number of buckets and projected by a seeded
    Gaussian matrix, then L2-normalized. Identical text and seed always
    produce the identical vector, which the golden tests rely on.
    """

    kind = "deterministic-local"

    def __init__(self, dim: int = 64, seed: int = 0) -> None:
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.seed = seed
        self._projection: np.ndarray | None = None
        self._stopwords = load_stopwords()

    def _matrix(self) -> np.ndarray:
        if self._projection is None:
            rng = np.random.RandomState(self.seed)
            self._projection = rng.standard_normal((_N_BUCKETS, self.dim))
        return self._projection

    @staticmethod
    def _bucket(token: str) -> int:
        # hashlib, not hash(): PYTHONHASHSEED must not change embeddings
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % _N_BUCKETS

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        matrix = self._matrix()
        out = []
        for text in texts:
            counts: dict[int, int] = {}
            tokens = [t for t in _TOKEN_RE.findall(text.lower()) if t not in self._stopwords]
            if not tokens:
                tokens = _TOKEN_RE.findall(text.lower())  # all-stopword text still embeds
            for token in tokens:
                bucket = self._bucket(token)
                counts[bucket] = counts.get(bucket, 0) + 1
            if not counts:
                out.append([0.0] * self.dim)
                continue
            vec = np.zeros(self.dim)
            for bucket, count in counts.items():
                vec += count * matrix[bucket]
            norm = float(np.linalg.norm(vec))
            if norm > 0.0:
                vec = vec / norm
            out.append([float(v) for v in vec])
        return out


class RemoteEmbeddingBackend:
    """Client for an HTTP embedding service.

    Request shape: ``{"model": ..., "input": [...]}``; response shape:
    ``{"data": [{"embedding": [...]}, ...]}`` with one item per input,
    in order. The API key is read from the environment at call time and
    never stored in configuration.
    """

    kind = "remote-service"

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str = "EMBEDDING_API_KEY",
        timeout: float = 30.0,
        max_retries: int = 3,
        backoff: float = 0.5,
        batch_size: int = 64,
        max_concurrency: int = 1,
        session: requests.Session | None = None,
    ) -> None:
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.batch_size = max(1, batch_size)
        self.max_concurrency = max(1, max_concurrency)
        self._session = session or requests.Session()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, batch: Sequence[str]) -> list[list[float]]:
        payload = {"model": self.model, "input": list(batch)}
        try:
            resp = self._session.post(
                self.endpoint, json=payload, headers=self._headers(), timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise BackendUnreachableError(f"embedding service unreachable: {exc}") from exc
        if resp.status_code == 429:
            raise RateLimitError("embedding service rate limit")
        if resp.status_code >= 500:
            raise BackendError(f"embedding service error {resp.status_code}", retryable=True)
        if resp.status_code != 200:
            raise BackendError(
                f"embedding service rejected request ({resp.status_code}): {resp.text[:200]}"
            )
        try:
            data = resp.json()["data"]
            vectors = [[float(v) for v in item["embedding"]] for item in data]
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendError(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(batch):
            raise BackendError(
                f"embedding response has {len(vectors)} items for {len(batch)} inputs"
            )
        return vectors

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        batches = [texts[i : i + self.batch_size] for i in range(0, len(texts), self.batch_size)]

        def run(batch: Sequence[str]) -> list[list[float]]:
            return retry_call(
                lambda: self._post(batch), attempts=self.max_retries, base_delay=self.backoff
            )

        if self.max_concurrency > 1 and len(batches) > 1:
            with ThreadPoolExecutor(max_workers=self.max_concurrency) as pool:
                results = list(pool.map(run, batches))
        else:
            results = [run(batch) for batch in batches]
        return [vec for chunk in results for vec in chunk]


def embed(backend: EmbeddingBackend, texts: Iterable[str]) -> list[EmbeddingVector]:
    """Encode texts in order, one vector per text."""
    items = list(texts)
    if not items:
        raise ValueError("texts must be non-empty")
    raw = backend.embed_batch(items)
    vectors = [EmbeddingVector(tuple(values)) for values in raw]
    dims = {v.dim for v in vectors}
    if len(dims) > 1:
        raise BackendError(f"backend returned mixed dimensions: {sorted(dims)}")
    return vectors


@dataclass
class VectorIndex:
    """Searchable collection of (id, vector) rows.

    Immutable after build; concurrent queries are safe. Row ``i`` of
    ``matrix`` belongs to ``ids[i]``.
    """

    ids: tuple
    matrix: np.ndarray
    metric: str = "cosine"
    mode: str = "exact"
    centroids: np.ndarray | None = None
    cells: tuple[tuple[int, ...], ...] = field(default_factory=tuple)
    nprobe: int = 1

    @property
    def size(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])


def _kmeans_cells(
    matrix: np.ndarray, n_cells: int, seed: int, n_iter: int = 25
) -> tuple[np.ndarray, tuple[tuple[int, ...], ...]]:
    n = matrix.shape[0]
    n_cells = max(1, min(n_cells, n))
    rng = np.random.RandomState(seed)
    centroids = matrix[rng.permutation(n)[:n_cells]].copy()
    assign = np.zeros(n, dtype=int)
    for step in range(n_iter):
        d2 = ((matrix[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)
        if step > 0 and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(n_cells):
            mask = assign == c
            if mask.any():
                centroids[c] = matrix[mask].mean(axis=0)
    cells = tuple(tuple(int(i) for i in np.flatnonzero(assign == c)) for c in range(n_cells))
    return centroids, cells


def build_index(
    vectors: Sequence[tuple[object, EmbeddingVector | Sequence[float]]],
    metric: str = "cosine",
    mode: str = "exact",
    *,
    n_cells: int | None = None,
    nprobe: int = 1,
    seed: int = 0,
) -> VectorIndex:
    """Build a queryable index over (id, vector) pairs.

    ``partitioned`` mode buckets rows into seeded k-means cells; queries
    probe the ``nprobe`` nearest cells. Probing every cell reproduces the
    exact scan.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not vectors:
        raise ValueError("cannot build an index from zero vectors")
    ids = []
    rows = []
    for vid, vec in vectors:
        values = vec.values if isinstance(vec, EmbeddingVector) else tuple(vec)
        ids.append(vid)
        rows.append(values)
    dims = {len(r) for r in rows}
    if len(dims) > 1:
        raise ValueError(f"mixed vector dimensions: {sorted(dims)}")
    matrix = np.asarray(rows, dtype=float)
    index = VectorIndex(ids=tuple(ids), matrix=matrix, metric=metric, mode=mode, nprobe=nprobe)
    if mode == "partitioned":
        if n_cells is None:
            n_cells = max(1, int(round(math.sqrt(len(rows)))))
        index.centroids, index.cells = _kmeans_cells(matrix, n_cells, seed)
    return index


def _candidate_rows(index: VectorIndex, q: np.ndarray) -> list[int]:
    if index.mode == "exact" or index.centroids is None:
        return list(range(index.size))
    d2 = ((index.centroids - q) ** 2).sum(axis=1)
    probe = np.argsort(d2, kind="stable")[: max(1, index.nprobe)]
    rows = [row for cell in probe for row in index.cells[cell]]
    return sorted(rows)


def query_nearest(
    index: VectorIndex, q: EmbeddingVector | Sequence[float], u: int
) -> list[tuple[object, float]]:
    """Return the u nearest entries as (id, score), best first.

    Cosine and inner-product order descending, euclidean ascending; exact
    ties break by ascending id so results are reproducible.
    """
    if index.size == 0:
        raise ValueError("empty index")
    if u < 1:
        raise ValueError("u must be >= 1")
    qv = np.asarray(q.values if isinstance(q, EmbeddingVector) else q, dtype=float)
    if qv.shape != (index.dim,):
        raise ValueError(f"query dim {qv.shape} does not match index dim {index.dim}")
    rows = _candidate_rows(index, qv)
    sub = index.matrix[rows]
    if index.metric == "euclidean":
        scores = np.linalg.norm(sub - qv, axis=1)
        reverse = False
    elif index.metric == "inner-product":
        scores = sub @ qv
        reverse = True
    else:
        denom = np.linalg.norm(sub, axis=1) * float(np.linalg.norm(qv))
        safe = np.where(denom > 0.0, denom, 1.0)
        scores = np.where(denom > 0.0, (sub @ qv) / safe, 0.0)
        reverse = True
    pairs = [(index.ids[row], float(score)) for row, score in zip(rows, scores)]
    if reverse:
        pairs.sort(key=lambda p: (-p[1], p[0]))
    else:
        pairs.sort(key=lambda p: (p[1], p[0]))
    return pairs[: min(u, len(pairs))]


def truncate_tokens(text: str, max_tokens: int) -> str:
    """Keep the first max_tokens whitespace-delimited tokens."""
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    tokens = text.split()
    if len(tokens) <= max_tokens:
        return text
    return " ".join(tokens[:max_tokens])


def query_documents(
    corpus: Corpus,
    backend: EmbeddingBackend,
    query: str,
    u: int,
    *,
    max_tokens: int = 512,
    metric: str = "cosine",
) -> Corpus:
    """Retrieve the u documents most similar to the query string.

    Long documents are embedded from their first ``max_tokens`` tokens
    only; the pipeline records that cutoff in its run manifest. The result
    keeps retrieval order (best match first).
    """
    if corpus.n_docs == 0:
        raise ValueError("cannot query an empty corpus")
    texts = [truncate_tokens(doc.text, max_tokens) for doc in corpus]
    vectors = embed(backend, texts)
    index = build_index(
        [(doc.id, vec) for doc, vec in zip(corpus, vectors)], metric=metric, mode="exact"
    )
    (query_vec,) = embed(backend, [truncate_tokens(query, max_tokens)])
    ranked = query_nearest(index, query_vec, u)
    return Corpus(documents=tuple(corpus.get(doc_id) for doc_id, _ in ranked))
