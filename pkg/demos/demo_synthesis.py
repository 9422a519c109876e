#!/usr/bin/env python3
"""Synthetic data generation: typed replacement, jitter and scrambling."""

import random

from tableforge import (
    SynthConfig,
    build_slot_dictionary,
    generate_synthetic_corpus,
    jitter_numeric,
    match_values,
    scramble_alnum,
    synthesize_pair,
)
from tableforge.sampledata import make_tox_corpus

rng = random.Random(0)
print("numeric jitter:   0.6  ->", [jitter_numeric("0.6", random.Random(s)) for s in range(6)])
print("numeric jitter:   300  ->", [jitter_numeric("300", random.Random(s)) for s in range(6)])
print("id scrambling: ABC123  ->", [scramble_alnum("ABC123", random.Random(s)) for s in range(6)])

corpus = make_tox_corpus(n_train=43, seed=11)
dictionary = build_slot_dictionary(corpus)
for kind, surfaces in dictionary.entries.items():
    print(f"dictionary[{kind.value}]: {sorted(surfaces)[:6]} ...")

example = corpus.train()[0]
print("\noriginal report: ", example.report)
synthetic = synthesize_pair(
    example, dictionary, SynthConfig(per_example=1, seed=1), random.Random(4)
)
print("synthetic report:", synthetic.report)

original_kinds = match_values(example.tables, example.report).extract.kinds()
synthetic_kinds = match_values(synthetic.tables, synthetic.report).extract.kinds()
print("kind sequence preserved:", original_kinds == synthetic_kinds)

config = SynthConfig(per_example=100, seed=17)
big = generate_synthetic_corpus(corpus, config)
print(f"\ngenerated {len(big.examples)} synthetic pairs "
      f"from {len(corpus.train())} real ones")
