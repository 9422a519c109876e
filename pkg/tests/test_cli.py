import json

import pytest

from tableforge.cli import main
from tableforge.corpus import ingest_corpus, write_corpus
from tableforge.sampledata import make_assay_corpus, make_tox_corpus


@pytest.fixture()
def corpus_path(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_corpus(make_assay_corpus(12, seed=3), path)
    return path


def _lines(capsys):
    return [json.loads(line) for line in capsys.readouterr().out.strip().splitlines()]


def test_ingest_summary(corpus_path, capsys):
    assert main(["ingest", str(corpus_path)]) == 0
    summary = _lines(capsys)[0]
    assert summary["examples"] == 12


def test_ingest_missing_file_fails(tmp_path, capsys):
    assert main(["ingest", str(tmp_path / "nope.jsonl")]) == 1
    assert "error" in capsys.readouterr().err


def test_split_writes_labels(corpus_path, tmp_path, capsys):
    out = tmp_path / "split.jsonl"
    assert main(["split", str(corpus_path), "--seed", "3",
                 "--test-fraction", "0.25", "--out", str(out)]) == 0
    relabeled = ingest_corpus(out)
    assert sum(ex.split == "test" for ex in relabeled.examples) == 3


def test_extract_emits_alignments(corpus_path, capsys):
    assert main(["extract", str(corpus_path)]) == 0
    lines = _lines(capsys)
    assert len(lines) == 12
    first = lines[0]
    assert {"id", "extract", "positions"} <= set(first)
    assert len(first["extract"]) == len(first["positions"])
    for value in first["extract"]:
        assert {"surface", "kind", "source"} <= set(value)


def test_preprocess_flattens(corpus_path, capsys):
    assert main(["preprocess", str(corpus_path),
                 "--max-rows", "3", "--max-tokens-per-row", "8"]) == 0
    lines = _lines(capsys)
    assert lines and all("tokens" in line for line in lines)


def test_preprocess_with_rules(tmp_path, capsys):
    corpus = make_tox_corpus(n_train=3, seed=1)
    corpus_path = tmp_path / "tox.jsonl"
    write_corpus(corpus, corpus_path)
    rules_path = tmp_path / "rules.json"
    rules_path.write_text(json.dumps(
        [{"kind": "GroupMean", "parameters": {"group_column": "Group"}}]
    ), encoding="utf-8")
    assert main(["preprocess", str(corpus_path), "--max-rows", "5",
                 "--max-tokens-per-row", "10", "--rules", str(rules_path)]) == 0
    assert _lines(capsys)


def test_synth_round_trip(tmp_path, corpus_path, capsys):
    out = tmp_path / "synthetic.jsonl"
    assert main(["synth", str(corpus_path), "--per-example", "2",
                 "--seed", "5", "--out", str(out)]) == 0
    synthetic = ingest_corpus(out)
    source = ingest_corpus(corpus_path)
    assert len(synthetic.examples) == 2 * len(source.train())


def test_generate_template(corpus_path, capsys):
    assert main(["generate", str(corpus_path), "--generator", "template"]) == 0
    lines = _lines(capsys)
    assert lines
    for line in lines:
        assert {"id", "text", "token_confidences"} <= set(line)


def test_evaluate_scores_hypotheses(tmp_path, corpus_path, capsys):
    corpus = ingest_corpus(corpus_path)
    hyp_path = tmp_path / "hyp.jsonl"
    with hyp_path.open("w", encoding="utf-8") as fh:
        for ex in corpus.test():
            fh.write(json.dumps({"id": ex.id, "text": ex.report}) + "\n")
    assert main(["evaluate", "--hyp", str(hyp_path), "--corpus", str(corpus_path)]) == 0
    report = _lines(capsys)[0]
    assert report["table_recall"] == 1.0
    assert report["ter"] == 0.0


def test_correct_applies_memory(tmp_path, corpus_path, capsys):
    corpus = ingest_corpus(corpus_path)
    ex = corpus.examples[0]
    hyp_path = tmp_path / "hyp.jsonl"
    hyp_path.write_text(
        json.dumps({"id": ex.id, "text": "bogus value 99999 TotallyNovel"}) + "\n",
        encoding="utf-8",
    )
    memory_path = tmp_path / "memory.jsonl"
    memory_path.write_text(
        json.dumps({"from": "TotallyNovel", "to": "Planted", "weight": 2}) + "\n",
        encoding="utf-8",
    )
    assert main(["correct", "--memory", str(memory_path),
                 "--corpus", str(corpus_path), "--hyp", str(hyp_path)]) == 0
    line = _lines(capsys)[0]
    assert "Planted" in line["text"]


def test_hil_sweep_prints_stage_table(tmp_path, capsys):
    from tableforge.corpus import write_corpus
    from tableforge.sampledata import make_planted_error_setup

    corpus, _ = make_planted_error_setup(n_train=12, n_test=6)
    path = tmp_path / "planted.jsonl"
    write_corpus(corpus, path)
    assert main(["hil", "sweep", str(path), "--strategy", "oracle",
                 "--fractions", "0,0.5,1.0", "--seed", "1",
                 "--simulate-annotator"]) == 0
    out = capsys.readouterr().out
    assert "fraction" in out and "recall" in out
    assert len(out.strip().splitlines()) == 4


def test_hil_sweep_requires_simulation_flag(tmp_path, corpus_path, capsys):
    assert main(["hil", "sweep", str(corpus_path), "--strategy", "random"]) == 2
