"""Lexicon-based valence and arousal scoring.

Terms carry 1-9 ratings for pleasantness (valence) and intensity
(arousal). Sentence scores are means over matched stems, normalized to
[-1, 1] and [0, 1]; chunk and topic scores are plain means on top, so
opposing sentiments cancel rather than being corrected away. That
cancellation is intentional and surfaced to the dashboard.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .chunker import SemanticChunk
from .corpus import Sentence, tokenize
from .errors import LexiconFormatError
from .porter import stem

WEIGHTINGS = ("uniform", "token-weighted")


@dataclass(frozen=True)
class SentimentLexicon:
    """Stemmed term -> (valence, arousal) on 1-9 scales."""

    entries: dict[str, tuple[float, float]]

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, stemmed: str) -> tuple[float, float] | None:
        return self.entries.get(stemmed)


@dataclass(frozen=True)
class SentimentScore:
    """Normalized sentiment: valence in [-1, 1], arousal in [0, 1].

    ``matched_terms`` counts lexicon hits (with multiplicity) over
    ``token_count`` tokens; both are zero-safe for neutral text.
    """

    valence: float
    arousal: float
    matched_terms: int
    token_count: int

    @property
    def coverage(self) -> float:
        if self.token_count == 0:
            return 0.0
        return self.matched_terms / self.token_count


NEUTRAL = SentimentScore(valence=0.0, arousal=0.0, matched_terms=0, token_count=0)


def load_lexicon(path: str | Path | None = None) -> SentimentLexicon:
    """Read a tab-separated lexicon: ``term<TAB>valence<TAB>arousal``.

    Terms are stem-normalized; a duplicate stem warns and the last entry
    wins. Scores outside [1, 9] or malformed lines fail with their line
    number. Without a path the bundled demo lexicon loads.
    """
    if path is None:
        source = resources.files("colsum.data").joinpath("sentiment_lexicon.tsv")
        text = source.read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    entries: dict[str, tuple[float, float]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise LexiconFormatError("expected 'term<TAB>valence<TAB>arousal'", line=lineno)
        term = stem(parts[0].strip().lower())
        if not term:
            raise LexiconFormatError("empty term", line=lineno)
        try:
            valence = float(parts[1])
            arousal = float(parts[2])
        except ValueError:
            raise LexiconFormatError("scores must be numbers", line=lineno) from None
        if not (1.0 <= valence <= 9.0 and 1.0 <= arousal <= 9.0):
            raise LexiconFormatError("scores must lie in [1, 9]", line=lineno)
        if term in entries:
            warnings.warn(f"duplicate lexicon term {term!r} at line {lineno}; last wins")
        entries[term] = (valence, arousal)
    return SentimentLexicon(entries=entries)


def _score_stems(stems: Sequence[str], lexicon: SentimentLexicon) -> SentimentScore:
    total_v = 0.0
    total_a = 0.0
    matched = 0
    for s in stems:
        hit = lexicon.lookup(s)
        if hit is not None:
            total_v += hit[0]
            total_a += hit[1]
            matched += 1
    if matched == 0:
        return SentimentScore(0.0, 0.0, 0, len(stems))
    mean_v = total_v / matched
    mean_a = total_a / matched
    return SentimentScore(
        valence=(mean_v - 5.0) / 4.0,
        arousal=(mean_a - 1.0) / 8.0,
        matched_terms=matched,
        token_count=len(stems),
    )


def score_sentence(sentence: Sentence, lexicon: SentimentLexicon) -> SentimentScore:
    """Score one segmented sentence from its stems."""
    return _score_stems(sentence.stems, lexicon)


def score_text(text: str, lexicon: SentimentLexicon) -> SentimentScore:
    """Tokenize, stem and score free text (summaries are scored this way)."""
    stems = [stem(tok) for tok in tokenize(text)]
    return _score_stems(stems, lexicon)


def aggregate(scores: Sequence[SentimentScore], weights: str = "uniform") -> SentimentScore:
    """Weighted mean of scores; cancellation across signs is preserved."""
    if not scores:
        raise ValueError("cannot aggregate zero scores")
    if weights not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weights!r}")
    if weights == "token-weighted":
        ws = [float(s.token_count) for s in scores]
        if sum(ws) == 0.0:
            ws = [1.0] * len(scores)
    else:
        ws = [1.0] * len(scores)
    total = sum(ws)
    valence = sum(w * s.valence for w, s in zip(ws, scores)) / total
    arousal = sum(w * s.arousal for w, s in zip(ws, scores)) / total
    return SentimentScore(
        valence=valence,
        arousal=arousal,
        matched_terms=sum(s.matched_terms for s in scores),
        token_count=sum(s.token_count for s in scores),
    )


@dataclass(frozen=True)
class TopicSentiment:
    """Sentiment at all three display levels of one topic."""

    sentence_scores: tuple[SentimentScore, ...]
    chunk_scores: tuple[SentimentScore, ...]
    topic_score: SentimentScore


def score_hierarchy(
    sentences: Sequence[Sentence],
    chunks: Sequence[SemanticChunk],
    topic_summary: str,
    lexicon: SentimentLexicon,
    weights: str = "uniform",
) -> TopicSentiment:
    """Score sentences, chunks and the topic summary.

    Chunk scores aggregate their member sentences by span; the topic
    score comes from the abstractive summary text itself, matching what
    the dashboard colors. Chunks must partition the sentence range.
    """
    spans = [c.sentence_span for c in chunks]
    covered: list[int] = []
    for start, end in spans:
        covered.extend(range(start, end + 1))
    if covered != list(range(len(sentences))):
        raise ValueError("chunks do not partition the topic sentences")
    sentence_scores = tuple(score_sentence(s, lexicon) for s in sentences)
    chunk_scores = tuple(
        aggregate(sentence_scores[start : end + 1], weights=weights) for start, end in spans
    )
    return TopicSentiment(
        sentence_scores=sentence_scores,
        chunk_scores=chunk_scores,
        topic_score=score_text(topic_summary, lexicon),
    )
