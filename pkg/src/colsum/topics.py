"""Per-cluster topic modeling and topic-sentence extraction.

Each document cluster gets its own LDA fit (collapsed Gibbs sampling over
stemmed, stopword-filtered tokens). The per-concept top-term lists are
distilled into a topic term set, expanded with synonyms from a bundled
lexicon, and every sentence mentioning a topic term is pulled out for the
chunking stage.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Document, Sentence, load_stopwords, segment_sentences, tokenize
from .errors import LexiconFormatError
from .porter import stem


@dataclass(frozen=True)
class TopicModel:
    """Fitted LDA state for one cluster.

    ``phi`` is concepts x vocabulary, ``theta`` documents x concepts; both
    are row-stochastic. ``vocab`` holds stemmed terms in sorted order and
    ``doc_ids`` aligns theta rows with documents.
    """

    n_topics: int
    phi: np.ndarray
    theta: np.ndarray
    vocab: tuple[str, ...]
    doc_ids: tuple
    seed: int
    iterations: int


@dataclass(frozen=True)
class TopicTermSet:
    """Representative terms for a cluster, each with its synonym set."""

    cluster_id: int
    entries: dict[str, frozenset[str]]

    def all_terms(self) -> frozenset[str]:
        out: set[str] = set()
        for rep, syns in self.entries.items():
            out.add(rep)
            out.update(syns)
        return frozenset(out)


@dataclass(frozen=True)
class TopicSentences:
    """Sentences from a cluster that mention at least one topic term."""

    cluster_id: int
    sentences: tuple[Sentence, ...]


def _doc_stems(doc: Document, stopwords: frozenset[str]) -> list[str]:
    return [stem(tok) for tok in tokenize(doc.text, stopwords=stopwords)]


def fit_lda(
    docs: Sequence[Document],
    n_topics: int = 10,
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 150,
    seed: int = 0,
    stopwords: frozenset[str] | None = None,
) -> TopicModel:
    """Fit LDA by collapsed Gibbs sampling; fixed seed gives identical output.

    ``alpha`` defaults to 50/n_topics. Sampling is plain Python on purpose:
    float arithmetic and the RNG stream are exactly reproducible, which the
    pipeline's resume and golden tests depend on.
    """
    if n_topics < 1:
        raise ValueError("n_topics must be >= 1")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not docs:
        raise ValueError("no documents to model")
    if stopwords is None:
        stopwords = load_stopwords()

    doc_stem_lists = [_doc_stems(doc, stopwords) for doc in docs]
    vocab = tuple(sorted({s for stems in doc_stem_lists for s in stems}))
    if not vocab:
        raise ValueError("empty vocabulary after preprocessing")
    word_id = {w: i for i, w in enumerate(vocab)}
    doc_words = [[word_id[s] for s in stems] for stems in doc_stem_lists]

    if alpha is None:
        alpha = 50.0 / n_topics
    n_vocab = len(vocab)
    vbeta = n_vocab * beta
    k_range = range(n_topics)

    rng = random.Random(seed)
    doc_topic = [[0] * n_topics for _ in docs]
    topic_term = [[0] * n_vocab for _ in k_range]
    topic_total = [0] * n_topics
    assignments = []
    for d, words in enumerate(doc_words):
        zs = []
        for w in words:
            t = rng.randrange(n_topics)
            zs.append(t)
            doc_topic[d][t] += 1
            topic_term[t][w] += 1
            topic_total[t] += 1
        assignments.append(zs)

    cum = [0.0] * n_topics
    for _ in range(iterations):
        for d, words in enumerate(doc_words):
            dt = doc_topic[d]
            zs = assignments[d]
            for pos, w in enumerate(words):
                t_old = zs[pos]
                dt[t_old] -= 1
                topic_term[t_old][w] -= 1
                topic_total[t_old] -= 1
                total = 0.0
                for k in k_range:
                    total += (dt[k] + alpha) * (topic_term[k][w] + beta) / (topic_total[k] + vbeta)
                    cum[k] = total
                u = rng.random() * total
                t_new = 0
                while cum[t_new] < u:
                    t_new += 1
                zs[pos] = t_new
                dt[t_new] += 1
                topic_term[t_new][w] += 1
                topic_total[t_new] += 1

    phi = np.array(
        [
            [(topic_term[k][v] + beta) / (topic_total[k] + vbeta) for v in range(n_vocab)]
            for k in k_range
        ]
    )
    theta = np.array(
        [
            [
                (doc_topic[d][k] + alpha) / (len(doc_words[d]) + n_topics * alpha)
                for k in k_range
            ]
            for d in range(len(docs))
        ]
    )
    return TopicModel(
        n_topics=n_topics,
        phi=phi,
        theta=theta,
        vocab=vocab,
        doc_ids=tuple(doc.id for doc in docs),
        seed=seed,
        iterations=iterations,
    )


def top_terms(
    model: TopicModel, t: int, epsilon: float | None = None
) -> list[list[tuple[str, float]]]:
    """Rank each concept's terms by weight, truncated to t (and epsilon).

    With ``epsilon`` given, at most the terms whose weight reaches it are
    kept, still capped at t.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    out = []
    for k in range(model.n_topics):
        weights = model.phi[k]
        ranked = sorted(
            ((term, float(weights[i])) for i, term in enumerate(model.vocab)),
            key=lambda pair: (-pair[1], pair[0]),
        )
        keep = t
        if epsilon is not None:
            keep = min(t, sum(1 for _, w in ranked if w >= epsilon))
        out.append(ranked[:keep])
    return out


def load_synonym_lexicon(path: str | Path | None = None) -> dict[str, frozenset[str]]:
    """Load the tab-separated synonym lexicon, stem-normalized.

    Format: ``term<TAB>syn1, syn2, ...`` per line; ``#`` starts a comment.
    """
    if path is None:
        source = resources.files("colsum.data").joinpath("synonyms.tsv")
        text = source.read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    lexicon: dict[str, set[str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconFormatError("expected 'term<TAB>synonyms'", line=lineno)
        term = stem(parts[0].strip().lower())
        syns = {
            stem(s.strip().lower()) for s in parts[1].split(",") if s.strip()
        }
        if not term:
            raise LexiconFormatError("empty term", line=lineno)
        lexicon.setdefault(term, set()).update(syns)
    return {term: frozenset(syns) for term, syns in lexicon.items()}


def build_topic_term_set(
    model: TopicModel,
    freq_threshold: int = 2,
    synonym_lexicon: dict[str, frozenset[str]] | None = None,
    *,
    cluster_id: int = 0,
    t: int = 10,
    epsilon: float | None = None,
) -> TopicTermSet:
    """Collect terms recurring across concept top-lists and expand synonyms.

    A term is representative when it appears in at least ``freq_threshold``
    of the concepts' top-``t`` lists. Terms without a lexicon entry stay
    singleton sets. An empty result marks a degenerate cluster.
    """
    if freq_threshold < 1:
        raise ValueError("freq_threshold must be >= 1")
    if synonym_lexicon is None:
        synonym_lexicon = load_synonym_lexicon()
    lists = top_terms(model, t=t, epsilon=epsilon)
    counts: dict[str, int] = {}
    for ranked in lists:
        for term, _ in ranked:
            counts[term] = counts.get(term, 0) + 1
    entries = {}
    for term in sorted(counts):
        if counts[term] >= freq_threshold:
            entries[term] = frozenset({term}) | synonym_lexicon.get(term, frozenset())
    return TopicTermSet(cluster_id=cluster_id, entries=entries)


def extract_topic_sentences(
    cluster_docs: Iterable[Document], term_set: TopicTermSet
) -> TopicSentences:
    """Keep every sentence whose stems intersect the topic term set.

    Documents are scanned in the given order and sentence order is
    preserved, so the output is a subsequence of the cluster's sentence
    stream.
    """
    terms = term_set.all_terms()
    kept: list[Sentence] = []
    if terms:
        for doc in cluster_docs:
            for sentence in segment_sentences(doc):
                if terms.intersection(sentence.stems):
                    kept.append(sentence)
    return TopicSentences(cluster_id=term_set.cluster_id, sentences=tuple(kept))
