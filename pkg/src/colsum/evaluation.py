"""ROUGE scoring against concatenated ground-truth summaries.

Unigram and bigram variants use clipped counts (each reference n-gram is
matchable once); the L variant measures the longest common subsequence.
Tokenization is lowercase with edge punctuation stripped and no stemming.
Per-topic scores average unweighted into the run-level result.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .corpus import Document, tokenize

VARIANTS = ("R1", "R2", "RL")


@dataclass(frozen=True)
class RougeScore:
    """One variant's scores plus the counts they came from.

    ``overlap`` is the clipped n-gram match count, or the longest common
    subsequence length for RL.
    """

    variant: str
    recall: float
    precision: float
    f1: float
    candidate_count: int
    reference_count: int
    overlap: int


def tokenize_for_rouge(text: str) -> list[str]:
    return tokenize(text, lowercase=True, strip_punct=True)


def _score(variant: str, overlap: int, n_cand: int, n_ref: int) -> RougeScore:
    recall = overlap / n_ref if n_ref else 0.0
    precision = overlap / n_cand if n_cand else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) > 0 else 0.0
    return RougeScore(
        variant=variant,
        recall=recall,
        precision=precision,
        f1=f1,
        candidate_count=n_cand,
        reference_count=n_ref,
        overlap=overlap,
    )


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_overlap(candidate: Counter, reference: Counter) -> int:
    return sum(min(count, reference[gram]) for gram, count in candidate.items())


def rouge1(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Unigram overlap with clipped counts."""
    if not reference:
        raise ValueError("reference must be non-empty")
    overlap = _clipped_overlap(Counter(candidate), Counter(reference))
    return _score("R1", overlap, len(candidate), len(reference))


def rouge2(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Bigram overlap with clipped counts."""
    if len(reference) < 2:
        raise ValueError("reference needs at least two tokens")
    cand_grams = _ngrams(candidate, 2)
    ref_grams = _ngrams(reference, 2)
    overlap = _clipped_overlap(cand_grams, ref_grams)
    return _score("R2", overlap, sum(cand_grams.values()), sum(ref_grams.values()))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # two-row DP keeps memory linear in the shorter side
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]


def rougeL(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Longest-common-subsequence overlap."""
    if not reference:
        raise ValueError("reference must be non-empty")
    overlap = _lcs_length(candidate, reference)
    return _score("RL", overlap, len(candidate), len(reference))


def score_pair(candidate_text: str, reference_text: str) -> dict[str, RougeScore]:
    """All three variants for one candidate/reference text pair."""
    cand = tokenize_for_rouge(candidate_text)
    ref = tokenize_for_rouge(reference_text)
    out = {"R1": rouge1(cand, ref), "RL": rougeL(cand, ref)}
    out["R2"] = rouge2(cand, ref) if len(ref) >= 2 else _score("R2", 0, max(len(cand) - 1, 0), 0)
    return {"R1": out["R1"], "R2": out["R2"], "RL": out["RL"]}


def concat_ground_truth(cluster_docs: Sequence[Document]) -> str:
    """Join the cluster's ground-truth summaries, in order, with spaces."""
    parts = []
    for doc in cluster_docs:
        if not doc.ground_truth_summary:
            raise ValueError(f"document {doc.id!r} has no ground-truth summary")
        parts.append(doc.ground_truth_summary.strip())
    return " ".join(parts)


@dataclass(frozen=True)
class RougeAverages:
    """Unweighted per-variant means across topics."""

    variant: str
    recall: float
    precision: float
    f1: float


@dataclass(frozen=True)
class RunScores:
    per_topic: tuple[dict[str, RougeScore], ...]
    overall: dict[str, RougeAverages]


def score_run(topic_summaries: Sequence[str], references: Sequence[str]) -> RunScores:
    """Score each topic summary against its reference and average."""
    if len(topic_summaries) != len(references):
        raise ValueError("summaries and references must align one to one")
    if not topic_summaries:
        raise ValueError("nothing to score")
    per_topic = tuple(
        score_pair(cand, ref) for cand, ref in zip(topic_summaries, references)
    )
    overall = {}
    for variant in VARIANTS:
        scores = [topic[variant] for topic in per_topic]
        overall[variant] = RougeAverages(
            variant=variant,
            recall=sum(s.recall for s in scores) / len(scores),
            precision=sum(s.precision for s in scores) / len(scores),
            f1=sum(s.f1 for s in scores) / len(scores),
        )
    return RunScores(per_topic=per_topic, overall=overall)


def score_table_csv(scores: RunScores) -> str:
    """CSV table: topic,variant,recall,precision,f1 (overall rows last)."""
    lines = ["topic,variant,recall,precision,f1"]
    for i, topic in enumerate(scores.per_topic):
        for variant in VARIANTS:
            s = topic[variant]
            lines.append(f"{i},{variant},{s.recall:.6f},{s.precision:.6f},{s.f1:.6f}")
    for variant in VARIANTS:
        avg = scores.overall[variant]
        lines.append(f"overall,{variant},{avg.recall:.6f},{avg.precision:.6f},{avg.f1:.6f}")
    return "\n".join(lines) + "\n"


def score_table_text(scores: RunScores, metric: str = "f1") -> str:
    """Readable table, one row per topic, ROUGE-1/2/L columns."""
    if metric not in ("recall", "precision", "f1"):
        raise ValueError(f"unknown metric {metric!r}")
    header = f"{'topic':<10}{'ROUGE-1':>10}{'ROUGE-2':>10}{'ROUGE-L':>10}"
    lines = [header, "-" * len(header)]
    for i, topic in enumerate(scores.per_topic):
        values = [getattr(topic[v], metric) for v in VARIANTS]
        lines.append(f"{i:<10}" + "".join(f"{v:>10.4f}" for v in values))
    avg = [getattr(scores.overall[v], metric) for v in VARIANTS]
    lines.append(f"{'overall':<10}" + "".join(f"{v:>10.4f}" for v in avg))
    return "\n".join(lines) + "\n"
