"""Document collection loading, sentence segmentation, and tokenization.

Everything downstream consumes the sentence-level representation built here.
All operations are pure and deterministic; a Corpus is immutable once built.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import CorpusFormatError
from .porter import stem

__all__ = [
    "Document",
    "Corpus",
    "Sentence",
    "load_corpus",
    "segment_sentences",
    "tokenize",
    "stem",
    "load_stopwords",
]

_WS = re.compile(r"\s+")


def _normalize_ws(text: str) -> str:
    return _WS.sub(" ", text).strip()


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    title: Optional[str] = None
    ground_truth_summary: Optional[str] = None


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]

    @property
    def n_docs(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, i):
        return self.documents[i]

    def get(self, doc_id: str) -> Document:
        for d in self.documents:
            if d.id == doc_id:
                return d
        raise KeyError(doc_id)


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    text: str
    tokens: tuple[str, ...]
    stems: tuple[str, ...]


def _make_corpus(records: Iterable[tuple[int, dict]]) -> Corpus:
    docs = []
    seen = set()
    for recno, rec in records:
        doc_id = rec.get("id")
        if doc_id is None or str(doc_id) == "":
            raise CorpusFormatError("missing id", record=recno)
        doc_id = str(doc_id)
        if doc_id in seen:
            raise CorpusFormatError(f"duplicate id {doc_id!r}", record=recno)
        seen.add(doc_id)
        text = _normalize_ws(str(rec.get("text") or ""))
        if not text:
            raise CorpusFormatError("empty text", record=recno)
        summary = rec.get("summary")
        title = rec.get("title")
        docs.append(
            Document(
                id=doc_id,
                text=text,
                title=str(title) if title else None,
                ground_truth_summary=str(summary) if summary else None,
            )
        )
    if not docs:
        raise CorpusFormatError("no documents in source")
    return Corpus(documents=tuple(docs))


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for recno, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON ({exc})", record=recno) from exc
            if not isinstance(rec, dict):
                raise CorpusFormatError("record is not an object", record=recno)
            yield recno, rec


def _iter_csv(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames or "text" not in reader.fieldnames:
            raise CorpusFormatError("CSV header must contain id,text[,summary]")
        for recno, row in enumerate(reader):
            yield recno, row


def _iter_dir(path: Path):
    files = sorted(p for p in path.iterdir() if p.suffix == ".txt")
    if not files:
        raise CorpusFormatError(f"no .txt files in {path}")
    for recno, p in enumerate(files):
        yield recno, {"id": p.stem, "text": p.read_text(encoding="utf-8")}


def load_corpus(path: str | Path, format: str = "jsonl") -> Corpus:
    """Load a Corpus from a jsonl file, a csv file, or a directory of .txt files.

    jsonl records carry ``id``, ``text`` and optionally ``summary`` (ground
    truth) and ``title``; csv needs an ``id,text[,summary]`` header; for a
    directory the filename (sans .txt) is the id. UTF-8 throughout.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusFormatError(f"path does not exist: {path}")
    if format == "jsonl":
        return _make_corpus(_iter_jsonl(path))
    if format == "csv":
        return _make_corpus(_iter_csv(path))
    if format == "plain-dir":
        return _make_corpus(_iter_dir(path))
    raise CorpusFormatError(f"unknown corpus format {format!r}")


# Tokens before a period that do not end a sentence.
ABBREVIATIONS = {
    "Dr", "Mr", "Mrs", "Ms", "Prof", "Sr", "Jr", "St", "Rev", "Gen", "Rep",
    "Sen", "Gov", "Lt", "Col", "Sgt", "Capt", "vs", "etc", "al", "Inc",
    "Ltd", "Co", "Corp", "approx", "dept", "est", "Fig", "fig", "No", "no",
    "Vol", "vol", "Jan", "Feb", "Mar", "Apr", "Jun", "Jul", "Aug", "Sep",
    "Sept", "Oct", "Nov", "Dec", "Mt", "Ave", "Blvd", "Rd",
}

_BOUNDARY = re.compile(r"[.!?]+(?=\s+[A-Z])")


def split_sentences(text: str) -> list[str]:
    """Split text into sentence strings.

    Splits after ``.``, ``!`` or ``?`` runs followed by whitespace and a
    capital letter, except when the preceding token is a known abbreviation.
    Text without terminators comes back as a single piece.
    """
    cut_points = []
    for m in _BOUNDARY.finditer(text):
        if "." in m.group():
            before = text[: m.start()]
            last_word = re.split(r"[^\w.]+", before)[-1] if before else ""
            # dotted initialisms ("U.S", "e.g") never end a sentence here
            if "." in last_word or last_word in ABBREVIATIONS:
                continue
        cut_points.append(m.end())
    pieces = []
    start = 0
    for cut in cut_points:
        pieces.append(text[start:cut])
        start = cut
    pieces.append(text[start:])
    return [piece.strip() for piece in pieces if piece.strip()]


def segment_sentences(doc: Document) -> list[Sentence]:
    """Split a document into ordered, tokenized sentences."""
    if not doc.text:
        raise ValueError("document text is empty")
    sentences = []
    for piece in split_sentences(doc.text):
        tokens = tuple(tokenize(piece))
        sentences.append(
            Sentence(
                doc_id=doc.id,
                index=len(sentences),
                text=piece,
                tokens=tokens,
                stems=tuple(stem(t) for t in tokens),
            )
        )
    return sentences


_PUNCT_EDGE = re.compile(r"^\W+|\W+$", re.UNICODE)


def tokenize(
    text: str,
    lowercase: bool = True,
    strip_punct: bool = True,
    stopwords: Optional[set[str]] = None,
) -> list[str]:
    """Whitespace tokenization with optional case folding and punctuation
    stripping; stopwords are removed only when a set is supplied."""
    if lowercase:
        text = text.lower()
    out = []
    for raw in text.split():
        tok = _PUNCT_EDGE.sub("", raw) if strip_punct else raw
        if not tok:
            continue
        if stopwords is not None and tok in stopwords:
            continue
        out.append(tok)
    return out


def load_stopwords(path: str | Path | None = None) -> set[str]:
    """Load a stopword set, defaulting to the list shipped with the package."""
    if path is None:
        path = Path(__file__).parent / "data" / "stopwords.txt"
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            w = line.strip().lower()
            if w and not w.startswith("#"):
                words.add(w)
    return words
