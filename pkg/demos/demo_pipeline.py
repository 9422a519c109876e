#!/usr/bin/env python3
"""End-to-end walk through the pipeline on a generated sample corpus."""

from tableforge import (
    calibrate_limits,
    dedup_consecutive,
    flatten_table,
    ingest_corpus,
    match_values,
    propagate_markup,
    write_corpus,
)
from tableforge.align import difficulty_score, select_curriculum
from tableforge.generate import TemplateGenerator
from tableforge.metrics import evaluate_corpus
from tableforge.sampledata import make_assay_corpus

corpus = make_assay_corpus(n_examples=60, seed=7)
print(f"corpus: {len(corpus.train())} train / {len(corpus.test())} test examples")

write_corpus(corpus, "/tmp/assay-demo.jsonl")
corpus = ingest_corpus("/tmp/assay-demo.jsonl")
print("round-tripped through JSONL")

example = corpus.train()[0]
alignment = match_values(example.tables, example.report)
print("\nfirst train report:")
print(" ", example.report)
print("extracted values:", [(v.surface, v.kind.value) for v in alignment.extract.values])
print("difficulty score:", round(difficulty_score(example, alignment), 3))

limits = calibrate_limits(corpus, coverage_target=0.85)
print(f"\ncalibrated limits: {limits.max_rows} rows, "
      f"{limits.max_tokens_per_row} tokens per row")

table = propagate_markup(example.tables[0])
flat = dedup_consecutive(flatten_table(table, limits))
print("flattened table:", " ".join(flat.tokens[:24]), "...")

hardest = select_curriculum(corpus, count=5)
print("\nhardest examples:", [ex.id for ex in hardest])

generator = TemplateGenerator.from_corpus(corpus)
pairs = []
for ex in corpus.test():
    result = generator.for_tables(ex.tables)
    extract = match_values(ex.tables, ex.report).extract
    pairs.append((result.text, ex, extract))
report = evaluate_corpus(pairs)
print("\ntemplate baseline on the test split:")
for name, value in report.to_dict().items():
    print(f"  {name:>12}: {value:.4f}")
