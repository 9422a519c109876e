import json

import pytest

from tableforge.corpus import (
    Cell,
    Corpus,
    CorpusError,
    PairedExample,
    Table,
    ingest_corpus,
    pair_tables_to_paragraphs,
    split_corpus,
    table_number,
    write_corpus,
)


def _example(ex_id="e1", split="train", report="Value 7 in Table1 .") -> PairedExample:
    table = Table(
        table_id="Table1",
        title="Example Table1",
        columns=("Label", "Value"),
        rows=((Cell("A"), Cell("7")),),
    )
    return PairedExample(ex_id, (table,), report, split)


def _write_lines(path, lines):
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def test_empty_file_gives_empty_corpus(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text("", encoding="utf-8")
    assert ingest_corpus(path).examples == []


def test_round_trip_preserves_examples(tmp_path):
    corpus = Corpus([_example("a"), _example("b", split="test")])
    path = tmp_path / "corpus.jsonl"
    write_corpus(corpus, path)
    assert ingest_corpus(path).examples == corpus.examples


def test_order_preserved(tmp_path):
    corpus = Corpus([_example(f"e{i}") for i in range(5)])
    path = tmp_path / "corpus.jsonl"
    write_corpus(corpus, path)
    assert [ex.id for ex in ingest_corpus(path).examples] == [f"e{i}" for i in range(5)]


def test_missing_report_names_line_and_field(tmp_path):
    from tableforge.corpus import example_to_dict

    good = example_to_dict(_example("a"))
    bad = example_to_dict(_example("b"))
    del bad["report"]
    path = tmp_path / "corpus.jsonl"
    _write_lines(path, [json.dumps(good), json.dumps(bad)])
    with pytest.raises(CorpusError, match="line 2.*report"):
        ingest_corpus(path)


@pytest.mark.parametrize("field", ["id", "split", "tables"])
def test_missing_fields_are_reported(tmp_path, field):
    from tableforge.corpus import example_to_dict

    bad = example_to_dict(_example())
    del bad[field]
    path = tmp_path / "corpus.jsonl"
    _write_lines(path, [json.dumps(bad)])
    with pytest.raises(CorpusError, match=f"line 1.*{field}"):
        ingest_corpus(path)


def test_duplicate_id_names_the_id(tmp_path):
    from tableforge.corpus import example_to_dict

    line = json.dumps(example_to_dict(_example("dup")))
    path = tmp_path / "corpus.jsonl"
    _write_lines(path, [line, line])
    with pytest.raises(CorpusError, match="dup"):
        ingest_corpus(path)


def test_invalid_json_names_line(tmp_path):
    path = tmp_path / "corpus.jsonl"
    _write_lines(path, ["{not json"])
    with pytest.raises(CorpusError, match="line 1"):
        ingest_corpus(path)


def test_ragged_rows_rejected():
    with pytest.raises(CorpusError, match="row 0"):
        Table("t", "T", ("a", "b"), ((Cell("only"),),))


def test_cell_invariants():
    with pytest.raises(CorpusError):
        Cell("line\nbreak")
    with pytest.raises(CorpusError):
        Cell("x", emphasis=-1)


# --- pairing ---

def _numbered_table(table_id, values):
    rows = tuple((Cell(v),) for v in values)
    return Table(table_id, f"Results in {table_id}", ("Value",), rows)


def test_paper_style_pairing():
    table = _numbered_table("Table7B", ["300"])
    paragraphs = ["As presented in Table7B the value was 300 .", "Unrelated text"]
    pairs = pair_tables_to_paragraphs([table], paragraphs)
    assert len(pairs) == 1
    assert pairs[0].report == paragraphs[0]


def test_table_without_mention_is_omitted():
    table = _numbered_table("Table9", ["300"])
    assert pair_tables_to_paragraphs([table], ["No tables here"]) == []


def test_most_values_wins():
    # Oracle: count the table's values in each paragraph by brute force.
    values = ["101", "202", "303", "404", "505"]
    table = _numbered_table("Table3", values)
    rich = "Table3 shows 101 202 303 404 505 ."
    poor = "Table3 shows 101 202 only ."
    counts = [sum(v in p.split() for v in values) for p in (poor, rich)]
    assert counts == [2, 5]
    pairs = pair_tables_to_paragraphs([table], [poor, rich])
    assert pairs[0].report == rich


def test_tie_breaks_to_earlier_paragraph():
    table = _numbered_table("Table4", ["111"])
    first = "Table4 has 111 ."
    second = "Table4 repeats 111 ."
    pairs = pair_tables_to_paragraphs([table], [first, second])
    assert pairs[0].report == first


def test_table_number_is_case_insensitive():
    table = _numbered_table("Table7B", ["1"])
    assert table_number(table) == "table7b"
    pairs = pair_tables_to_paragraphs([table], ["see TABLE7B for 1"])
    assert len(pairs) == 1


# --- splits ---

def _corpus(n):
    return Corpus([_example(f"e{i}") for i in range(n)])


def test_split_fraction_zero_and_one():
    corpus = _corpus(10)
    assert all(ex.split == "train" for ex in split_corpus(corpus, 0, 0.0).examples)
    assert all(ex.split == "test" for ex in split_corpus(corpus, 0, 1.0).examples)


def test_split_is_deterministic():
    corpus = _corpus(10)
    first = split_corpus(corpus, seed=42, test_fraction=0.3)
    second = split_corpus(corpus, seed=42, test_fraction=0.3)
    assert [ex.split for ex in first.examples] == [ex.split for ex in second.examples]
    assert sum(ex.split == "test" for ex in first.examples) == 3


def test_split_sizes_follow_round():
    corpus = _corpus(7)
    labeled = split_corpus(corpus, seed=1, test_fraction=0.5)
    assert sum(ex.split == "test" for ex in labeled.examples) == round(0.5 * 7)


def test_split_rejects_bad_fraction():
    with pytest.raises(ValueError):
        split_corpus(_corpus(3), 0, 1.5)
