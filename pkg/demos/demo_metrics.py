#!/usr/bin/env python3
"""The five evaluation metrics on small worked examples."""

from tableforge import bleu, bleu_extract, match_values, restore_extract, rouge, table_recall, ter
from tableforge.corpus import Cell, Table
from tableforge.metrics import RougeVariant

table = Table(
    "Table7B", "Detection of ConditionA", ("Run", "Low", "High"),
    ((Cell("RunID92"), Cell("300"), Cell("1000")),),
)
reference = "ConditionA was tested in RunID92 at 300 and 1000 , see Table7B ."
extract = match_values([table], reference).extract
print("reference extract:", extract.surfaces())

generated = "ConditionA was tested in RunID92 at 300 , see Table7B ."
print("\ngenerated:", generated)
print("table recall:", round(table_recall(extract, generated), 4))
print("restored extract:", restore_extract(generated, extract).surfaces())
print("bleu extract:", round(bleu_extract(generated, extract), 2))

candidate = generated.split()
target = reference.split()
print("\nbleu:", round(bleu(candidate, target), 2))
for variant in RougeVariant:
    print(f"rouge {variant.name}:", round(rouge(candidate, target, variant), 4))
print("ter:", round(ter(candidate, target), 4))

print("\nshift example: candidate 'b a c' vs reference 'a b c'")
print("ter =", round(ter("b a c".split(), "a b c".split()), 4), "(one block shift)")
