import pytest
from hypothesis import given
from hypothesis import strategies as st

from colsum.corpus import (
    Document,
    load_corpus,
    load_stopwords,
    segment_sentences,
    split_sentences,
    tokenize,
)
from colsum.errors import CorpusFormatError

from conftest import write_jsonl


def test_load_jsonl(smoke_corpus_path):
    corpus = load_corpus(smoke_corpus_path, "jsonl")
    assert corpus.n_docs == 6
    assert [d.id for d in corpus][:2] == ["pets-01", "pets-02"]
    assert corpus.get("market-03").ground_truth_summary is None


def test_load_jsonl_with_summary(tmp_path):
    path = write_jsonl(
        tmp_path / "c.jsonl",
        [
            {"id": "a", "text": "One sentence.", "summary": "S.", "title": "T"},
            {"id": "b", "text": "Another."},
        ],
    )
    corpus = load_corpus(path)
    assert corpus.get("a").ground_truth_summary == "S."
    assert corpus.get("a").title == "T"
    assert corpus.get("b").ground_truth_summary is None


def test_load_csv(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text('id,text,summary\nx,"Hello there.",\ny,"Bye now.","A ref."\n')
    corpus = load_corpus(path, "csv")
    assert corpus.n_docs == 2
    assert corpus.get("y").ground_truth_summary == "A ref."


def test_load_csv_requires_header(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("name,body\nx,hello\n")
    with pytest.raises(CorpusFormatError):
        load_corpus(path, "csv")


def test_load_plain_dir(tmp_path):
    (tmp_path / "b.txt").write_text("Second file.")
    (tmp_path / "a.txt").write_text("First file.")
    corpus = load_corpus(tmp_path, "plain-dir")
    # filename order, not creation order
    assert [d.id for d in corpus] == ["a", "b"]


def test_duplicate_ids_rejected(tmp_path):
    path = write_jsonl(
        tmp_path / "c.jsonl", [{"id": "a", "text": "x."}, {"id": "a", "text": "y."}]
    )
    with pytest.raises(CorpusFormatError, match="duplicate"):
        load_corpus(path)


def test_empty_text_rejected(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [{"id": "a", "text": "   "}])
    with pytest.raises(CorpusFormatError, match="empty text"):
        load_corpus(path)


def test_invalid_json_names_record(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "a", "text": "ok."}\n{broken\n')
    with pytest.raises(CorpusFormatError) as err:
        load_corpus(path)
    assert err.value.record == 1


def test_unknown_format(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [{"id": "a", "text": "x."}])
    with pytest.raises(CorpusFormatError, match="unknown corpus format"):
        load_corpus(path, "parquet")


def test_missing_path():
    with pytest.raises(CorpusFormatError, match="does not exist"):
        load_corpus("/nonexistent/corpus.jsonl")


def test_split_sentences_basic():
    assert split_sentences("One here. Two there! Three? Four.") == [
        "One here.",
        "Two there!",
        "Three?",
        "Four.",
    ]


def test_split_sentences_abbreviations():
    pieces = split_sentences("Dr. Smith arrived at 9 a.m. sharp. He sat down.")
    assert pieces == ["Dr. Smith arrived at 9 a.m. sharp.", "He sat down."]


def test_split_sentences_initialisms():
    pieces = split_sentences("The U.S. Team won gold. Fans cheered loudly.")
    assert pieces == ["The U.S. Team won gold.", "Fans cheered loudly."]


def test_split_sentences_no_boundary():
    assert split_sentences("no terminal punctuation at all") == [
        "no terminal punctuation at all"
    ]


def test_segment_sentences_indices():
    doc = Document(id="d", text="Alpha runs fast. Beta walks slowly.")
    sents = segment_sentences(doc)
    assert [s.index for s in sents] == [0, 1]
    assert sents[0].doc_id == "d"
    assert sents[0].tokens == ("alpha", "runs", "fast")
    assert sents[1].stems[0] == "beta"


def test_segment_sentences_empty_doc():
    with pytest.raises(ValueError):
        segment_sentences(Document(id="d", text=""))


def test_tokenize_defaults():
    assert tokenize("The Cat, sat!") == ["the", "cat", "sat"]


def test_tokenize_options():
    assert tokenize("The Cat", lowercase=False) == ["The", "Cat"]
    assert tokenize("don't stop", stopwords={"stop"}) == ["don't"]
    assert tokenize("x. y,", strip_punct=False) == ["x.", "y,"]


def test_stopwords_load():
    stops = load_stopwords()
    assert "the" in stops and "and" in stops
    assert "market" not in stops


@given(st.text())
def test_tokenize_strips_edges(text):
    for tok in tokenize(text):
        assert tok == tok.lower()
        assert tok[0].isalnum() or tok[0] == "'" or not tok[0].isascii() or tok[0] == "_"


@given(st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Zs")), max_size=200))
def test_split_sentences_preserves_words(text):
    # splitting never invents or loses non-space characters
    joined = "".join("".join(split_sentences(text)).split())
    assert joined == "".join(text.split())
