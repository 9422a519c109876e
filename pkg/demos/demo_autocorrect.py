#!/usr/bin/env python3
"""Value autocorrection against tables, plus learning from human edits."""

from tableforge import (
    CorrectionMemory,
    apply_memory,
    correct_values,
    learn_corrections,
)
from tableforge.corpus import Cell, Table

tables = [Table(
    "Table7B", "Detection of ConditionA", ("Run", "Low", "High"),
    ((Cell("RunID92"), Cell("300"), Cell("1000")),),
)]

draft = "ConditionB was checked in run RunID8 at 301 ng/mL , see Table7B ."
print("draft:    ", draft)
result = correct_values(draft, tables)
print("corrected:", result.text)
for edit in result.edits:
    print(f"  token {edit.token_index}: {edit.from_surface} -> "
          f"{edit.to_surface} ({edit.reason.value})")

human = "ConditionA was checked in run RunID92 at 300 ng/mL , see Table7B ."
rules = learn_corrections(draft, human)
print("\nlearned rules from the human correction:")
for rule in rules:
    print(f"  {rule.from_surface} -> {rule.to_surface} "
          f"(context {rule.left!r}/{rule.right!r}, weight {rule.weight})")

memory = apply_memory(CorrectionMemory(), rules)
second_draft = "no effect in run RunID8 at 301 ng/mL"
print("\nsecond draft:", second_draft)
print("with memory: ", correct_values(second_draft, tables, memory).text)
