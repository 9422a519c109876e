"""Deterministic value correction of drafts against their source tables.

Two passes: learned memory rules first (context-matching before
context-free, heavier rules first), then nearest-table-value repair of
value tokens that occur nowhere in the tables.  Both passes touch only
value tokens absent from the tables, so a correction can never lower the
draft's table recall.  The whole procedure runs to a fixpoint and reports
net edits, which makes it idempotent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from .align import TableIndex, ValueKind, classify_value
from .corpus import Table
from .generate import GenerationResult, ro_similarity
from .preprocess import parse_numeric
from .text import token_spans

_MAX_PASSES = 10

# Replacement thresholds: numerics within 25% relative difference,
# string-like values at similarity >= 0.6.
NUMERIC_THRESHOLD = 0.25
SIMILARITY_THRESHOLD = 0.6

_NUMERIC_KINDS = (ValueKind.INTEGER, ValueKind.FLOAT)
_SIMILARITY_KINDS = (ValueKind.RUN_ID, ValueKind.STRING_VALUE, ValueKind.TABLE_ID)


class EditReason(Enum):
    NEAREST_TABLE_VALUE = "NearestTableValue"
    MEMORY_RULE = "MemoryRule"


@dataclass(frozen=True)
class MemoryRule:
    from_surface: str
    to_surface: str
    left: Optional[str] = None
    right: Optional[str] = None
    weight: int = 1

    def __post_init__(self) -> None:
        if self.from_surface == self.to_surface:
            raise ValueError("rule must change the surface")
        if self.weight < 1:
            raise ValueError("rule weight must be >= 1")

    def key(self) -> tuple:
        return (self.from_surface, self.to_surface, self.left, self.right)

    def specificity(self) -> int:
        return (self.left is not None) + (self.right is not None)


@dataclass(frozen=True)
class CorrectionMemory:
    rules: tuple[MemoryRule, ...] = ()

    def merged(self, new_rules: Sequence[MemoryRule]) -> "CorrectionMemory":
        weights: dict[tuple, int] = {}
        for rule in list(self.rules) + list(new_rules):
            weights[rule.key()] = weights.get(rule.key(), 0) + rule.weight
        merged = [
            MemoryRule(frm, to, left, right, weight)
            for (frm, to, left, right), weight in weights.items()
        ]
        merged.sort(key=lambda r: (r.from_surface, r.to_surface,
                                   r.left or "", r.right or ""))
        return CorrectionMemory(tuple(merged))

    def ordered(self) -> list[MemoryRule]:
        """Application order: context rules first, then heavier, then stable."""
        return sorted(
            self.rules,
            key=lambda r: (-r.specificity(), -r.weight, r.from_surface,
                           r.to_surface, r.left or "", r.right or ""),
        )


def apply_memory(
    memory: CorrectionMemory, rules: Sequence[MemoryRule]
) -> CorrectionMemory:
    """Merge rules into memory; duplicate (from, to, context) weights sum."""
    return memory.merged(rules)


@dataclass(frozen=True)
class Edit:
    token_index: int
    from_surface: str
    to_surface: str
    reason: EditReason


@dataclass(frozen=True)
class CorrectionResult:
    text: str
    edits: tuple[Edit, ...]


class _TableValues:
    """Typed value pool of the input tables, for nearest-value search."""

    def __init__(self, tables: Sequence[Table]):
        self.index = TableIndex(tables)
        self.tokens = set(self.index.cell_sources) | set(self.index.title_sources)
        ordered = list(self.index.cell_sources) + list(self.index.title_sources)
        self.numeric: dict[ValueKind, list[tuple[Decimal, str]]] = {
            ValueKind.INTEGER: [],
            ValueKind.FLOAT: [],
        }
        self.string_like: dict[ValueKind, list[str]] = {
            kind: [] for kind in _SIMILARITY_KINDS
        }
        for token in ordered:
            kind = classify_value(token)
            if kind in _NUMERIC_KINDS:
                self.numeric[kind].append((parse_numeric(token), token))
            elif kind in _SIMILARITY_KINDS:
                self.string_like[kind].append(token)

    def nearest(self, surface: str, kind: ValueKind) -> Optional[str]:
        if kind in _NUMERIC_KINDS:
            value = parse_numeric(surface)
            best: Optional[tuple[Decimal, Decimal, str]] = None
            for table_value, token in self.numeric[kind]:
                diff = abs(value - table_value)
                if best is None or (diff, table_value) < best[:2]:
                    best = (diff, table_value, token)
            if best is None:
                return None
            diff, table_value, token = best
            if diff / max(abs(table_value), Decimal(1)) <= Decimal(str(NUMERIC_THRESHOLD)):
                return token
            return None
        if kind in _SIMILARITY_KINDS:
            best_token: Optional[str] = None
            best_score = 0.0
            for token in self.string_like[kind]:
                score = ro_similarity(surface, token)
                if score > best_score:
                    best_token, best_score = token, score
            if best_token is not None and best_score >= SIMILARITY_THRESHOLD:
                return best_token
            return None
        return None


def _rule_applies(
    rule: MemoryRule, tokens: list[str], position: int
) -> bool:
    if rule.left is not None:
        if position == 0 or tokens[position - 1] != rule.left:
            return False
    if rule.right is not None:
        if position + 1 >= len(tokens) or tokens[position + 1] != rule.right:
            return False
    return True


def correct_values(
    draft: GenerationResult | str,
    tables: Sequence[Table],
    memory: CorrectionMemory = CorrectionMemory(),
) -> CorrectionResult:
    """Correct value tokens of the draft against the full tables.

    Memory rules and nearest-value repair apply only to value tokens whose
    surface occurs nowhere in the tables; iteration stops at a fixpoint.
    A position whose rewrite history cycles reverts to its original token.
    """
    text = draft.text if isinstance(draft, GenerationResult) else draft
    spans = token_spans(text)
    original = [token for token, _, _ in spans]
    work = original[:]
    pool = _TableValues(tables)
    ordered_rules = memory.ordered()
    history: list[set[str]] = [{token} for token in original]
    frozen = [False] * len(work)
    reasons: dict[int, EditReason] = {}

    for _ in range(_MAX_PASSES):
        changed = False
        for i, token in enumerate(work):
            if frozen[i] or token in pool.tokens:
                continue
            kind = classify_value(token)
            if kind is None or kind is ValueKind.EMPHASIS_MARK:
                continue
            replacement: Optional[str] = None
            reason = EditReason.MEMORY_RULE
            for rule in ordered_rules:
                if rule.from_surface == token and _rule_applies(rule, work, i):
                    replacement = rule.to_surface
                    break
            if replacement is None:
                replacement = pool.nearest(token, kind)
                reason = EditReason.NEAREST_TABLE_VALUE
            if replacement is None or replacement == token:
                continue
            if replacement in history[i]:
                work[i] = original[i]
                frozen[i] = True
                changed = True
                continue
            history[i].add(replacement)
            work[i] = replacement
            reasons[i] = reason
            changed = True
        if not changed:
            break

    edits = tuple(
        Edit(i, original[i], work[i], reasons[i])
        for i in range(len(work))
        if work[i] != original[i]
    )
    pieces: list[str] = []
    cursor = 0
    for i, (_, start, end) in enumerate(spans):
        pieces.append(text[cursor:start])
        pieces.append(work[i])
        cursor = end
    pieces.append(text[cursor:])
    return CorrectionResult("".join(pieces), edits)


def _alignment_ops(
    draft_tokens: list[str], human_tokens: list[str]
) -> list[tuple[str, int, int]]:
    """Edit-distance alignment ops: (op, draft index, human index)."""
    n, m = len(draft_tokens), len(human_tokens)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dist[i][j] = min(
                dist[i - 1][j - 1] + (0 if draft_tokens[i - 1] == human_tokens[j - 1] else 1),
                dist[i - 1][j] + 1,
                dist[i][j - 1] + 1,
            )
    ops: list[tuple[str, int, int]] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] and \
                draft_tokens[i - 1] == human_tokens[j - 1]:
            ops.append(("match", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + 1:
            ops.append(("substitute", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append(("delete", i - 1, j))
            i -= 1
        else:
            ops.append(("insert", i, j - 1))
            j -= 1
    ops.reverse()
    return ops


def learn_corrections(draft: str, human: str) -> list[MemoryRule]:
    """Substitution rules from an edit-distance alignment of the two texts.

    Only substituted value-token pairs become rules; context is the draft's
    immediate neighbors.  Repeated observations raise the weight.
    """
    draft_tokens = [t for t, _, _ in token_spans(draft)]
    human_tokens = [t for t, _, _ in token_spans(human)]
    weights: dict[tuple, int] = {}
    for op, i, j in _alignment_ops(draft_tokens, human_tokens):
        if op != "substitute":
            continue
        from_surface, to_surface = draft_tokens[i], human_tokens[j]
        if classify_value(from_surface) is None or classify_value(to_surface) is None:
            continue
        left = draft_tokens[i - 1] if i > 0 else None
        right = draft_tokens[i + 1] if i + 1 < len(draft_tokens) else None
        key = (from_surface, to_surface, left, right)
        weights[key] = weights.get(key, 0) + 1
    return [
        MemoryRule(frm, to, left, right, weight)
        for (frm, to, left, right), weight in sorted(
            weights.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or "", kv[0][3] or "")
        )
    ]


# --- persistence ---

def save_memory(memory: CorrectionMemory, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rule in memory.rules:
            fh.write(json.dumps({
                "from": rule.from_surface,
                "to": rule.to_surface,
                "left": rule.left,
                "right": rule.right,
                "weight": rule.weight,
            }, ensure_ascii=False))
            fh.write("\n")


def load_memory(path: str | Path) -> CorrectionMemory:
    rules: list[MemoryRule] = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            rules.append(MemoryRule(
                obj["from"], obj["to"], obj.get("left"), obj.get("right"),
                obj.get("weight", 1),
            ))
    return CorrectionMemory().merged(rules)
