"""Evaluation metrics: Table Recall, BLEU Extract, BLEU, ROUGE-1/2/L, TER.

BLEU is corpus-level (aggregated n-gram counts) with add-one smoothing for
orders >= 2 whose precision would otherwise be zero; short bullet-style
reports collapse to zero without it.  Table Recall ignores order and count;
BLEU Extract is order- and count-sensitive over restored value sequences.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from .align import TableExtract, TypedValue
from .corpus import PairedExample
from .text import tokenize

log = logging.getLogger(__name__)

MAX_BLEU_ORDER = 4
MAX_SHIFT_LENGTH = 10
MAX_SHIFTS = 50


class RougeVariant(Enum):
    R1 = 1
    R2 = 2
    RL = "L"


@dataclass(frozen=True)
class MetricReport:
    table_recall: float
    bleu_extract: float
    bleu: float
    rouge1: float
    rouge2: float
    rougeL: float
    ter: float

    def to_dict(self) -> dict:
        return {
            "table_recall": self.table_recall,
            "bleu_extract": self.bleu_extract,
            "rouge1": self.rouge1,
            "rouge2": self.rouge2,
            "rougeL": self.rougeL,
            "bleu": self.bleu,
            "ter": self.ter,
        }


# --- Table Recall and extract restoration ---

def table_recall(extract: TableExtract, text: str, case_sensitive: bool = True) -> float:
    """Share of unique extract values appearing as tokens of ``text``.

    Order- and count-insensitive.  An empty extract counts as vacuously
    covered (logged, so corpus statistics can exclude such samples).
    """
    required = extract.unique_surfaces()
    if not required:
        log.warning("table_recall: empty extract, returning vacuous 1.0")
        return 1.0
    tokens = set(tokenize(text))
    if not case_sensitive:
        required = {s.lower() for s in required}
        tokens = {t.lower() for t in tokens}
    return len(required & tokens) / len(required)


def restore_extract(text: str, reference_extract: TableExtract) -> TableExtract:
    """Values of ``reference_extract`` found in ``text``, in text order.

    Repetitions in the text are kept; kinds are taken from the reference
    entry for the surface.
    """
    kinds = {v.surface: v.kind for v in reference_extract.values}
    restored = tuple(
        TypedValue(token, kinds[token], None)
        for token in tokenize(text)
        if token in kinds
    )
    return TableExtract(restored)


# --- BLEU ---

def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _bleu_from_pairs(pairs: Iterable[tuple[Sequence[str], Sequence[str]]]) -> float:
    matches = [0] * MAX_BLEU_ORDER
    totals = [0] * MAX_BLEU_ORDER
    candidate_length = 0
    reference_length = 0
    for candidate, reference in pairs:
        candidate_length += len(candidate)
        reference_length += len(reference)
        for n in range(1, MAX_BLEU_ORDER + 1):
            cand_ngrams = _ngrams(candidate, n)
            if not cand_ngrams:
                continue
            ref_ngrams = _ngrams(reference, n)
            overlap = cand_ngrams & ref_ngrams
            matches[n - 1] += sum(overlap.values())
            totals[n - 1] += sum(cand_ngrams.values())
    if candidate_length == 0:
        return 0.0

    log_sum = 0.0
    orders = 0
    for n in range(1, MAX_BLEU_ORDER + 1):
        if totals[n - 1] == 0:
            continue
        if matches[n - 1] == 0:
            if n == 1:
                return 0.0
            precision = 1.0 / (totals[n - 1] + 1)
        else:
            precision = matches[n - 1] / totals[n - 1]
        log_sum += math.log(precision)
        orders += 1
    if orders == 0:
        return 0.0
    geo_mean = math.exp(log_sum / orders)
    if candidate_length >= reference_length:
        brevity = 1.0
    else:
        brevity = math.exp(1 - reference_length / candidate_length)
    return 100.0 * geo_mean * brevity


def bleu(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Corpus BLEU of a single pair, scaled to [0, 100]."""
    return _bleu_from_pairs([(candidate, reference)])


def corpus_bleu(pairs: Sequence[tuple[Sequence[str], Sequence[str]]]) -> float:
    """BLEU over aggregated n-gram counts of many (candidate, reference) pairs."""
    return _bleu_from_pairs(pairs)


def bleu_extract(generated_text: str, reference_extract: TableExtract) -> float:
    """BLEU between the restored and the reference value sequences."""
    restored = restore_extract(generated_text, reference_extract)
    return bleu(restored.surfaces(), reference_extract.surfaces())


# --- ROUGE ---

def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def _f1(overlap: int, candidate_total: int, reference_total: int) -> float:
    if candidate_total == 0 or reference_total == 0 or overlap == 0:
        return 0.0
    precision = overlap / candidate_total
    recall = overlap / reference_total
    return 2 * precision * recall / (precision + recall)


def rouge(
    candidate: Sequence[str], reference: Sequence[str], variant: RougeVariant
) -> float:
    """F1 over n-gram multiset overlap (R1/R2) or LCS length (RL)."""
    if not candidate and not reference:
        return 1.0
    if variant is RougeVariant.RL:
        return _f1(_lcs_length(candidate, reference), len(candidate), len(reference))
    n = variant.value
    cand_ngrams = _ngrams(candidate, n)
    ref_ngrams = _ngrams(reference, n)
    overlap = sum((cand_ngrams & ref_ngrams).values())
    return _f1(overlap, sum(cand_ngrams.values()), sum(ref_ngrams.values()))


# --- TER ---

def word_edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance with unit costs over word tokens."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i]
        for j, y in enumerate(b, start=1):
            cur.append(min(
                prev[j] + 1,
                cur[-1] + 1,
                prev[j - 1] + (0 if x == y else 1),
            ))
        prev = cur
    return prev[-1]


def _edit_trace(a: Sequence[str], b: Sequence[str]) -> tuple[set[int], set[int]]:
    """Indices of a and b that are not exact matches in one optimal trace."""
    n, m = len(a), len(b)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dist[i][j] = min(
                dist[i - 1][j] + 1,
                dist[i][j - 1] + 1,
                dist[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1),
            )
    a_errors: set[int] = set()
    b_errors: set[int] = set()
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] and a[i - 1] == b[j - 1]:
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + 1:
            a_errors.add(i - 1)
            b_errors.add(j - 1)
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            a_errors.add(i - 1)
            i -= 1
        else:
            b_errors.add(j - 1)
            j -= 1
    return a_errors, b_errors


def _shift_candidates(
    current: list[str], reference: Sequence[str]
) -> Iterable[tuple[int, int, int]]:
    """(start, length, insertion point) moves worth evaluating.

    A block qualifies when its token sequence occurs in the reference and
    the current alignment marks an error inside the block or at one of its
    reference occurrences; it is shifted to the positions of those
    occurrences, which keeps the scan tractable on long inputs.
    """
    cand_errors, ref_errors = _edit_trace(current, reference)
    ref_positions: dict[tuple[str, ...], list[int]] = {}
    for length in range(1, min(MAX_SHIFT_LENGTH, len(reference)) + 1):
        for j in range(len(reference) - length + 1):
            ref_positions.setdefault(tuple(reference[j:j + length]), []).append(j)

    n = len(current)
    seen: set[tuple[int, int, int]] = set()
    for length in range(1, min(MAX_SHIFT_LENGTH, n) + 1):
        for i in range(n - length + 1):
            block = tuple(current[i:i + length])
            occurrences = ref_positions.get(block)
            if not occurrences:
                continue
            block_misaligned = any(k in cand_errors for k in range(i, i + length))
            for p in occurrences:
                occurrence_mispaired = any(
                    k in ref_errors for k in range(p, p + length)
                )
                if not (block_misaligned or occurrence_mispaired):
                    continue
                j = min(p, n - length)
                move = (i, length, j)
                if j != i and move not in seen:
                    seen.add(move)
                    yield move


def _apply_shift(tokens: list[str], start: int, length: int, target: int) -> list[str]:
    block = tokens[start:start + length]
    rest = tokens[:start] + tokens[start + length:]
    return rest[:target] + block + rest[target:]


# Inputs this short get the exact shift search instead of the greedy one.
EXACT_TER_LIMIT = 8


def _ref_blocks(reference: Sequence[str]) -> set[tuple[str, ...]]:
    blocks: set[tuple[str, ...]] = set()
    ref = tuple(reference)
    for length in range(1, len(ref) + 1):
        for j in range(len(ref) - length + 1):
            blocks.add(ref[j:j + length])
    return blocks


def _exact_ter_edits(candidate: Sequence[str], reference: Sequence[str]) -> int:
    """Minimal shifts + edit distance by depth-limited search.

    Only blocks whose token sequence occurs in the reference may shift
    (same move universe as the greedy path).
    """
    blocks = _ref_blocks(reference)
    start = tuple(candidate)
    best = word_edit_distance(start, reference)
    seen: dict[tuple[str, ...], int] = {start: 0}

    def explore(seq: tuple[str, ...], shifts: int) -> None:
        nonlocal best
        if shifts + 1 >= best:
            return
        n = len(seq)
        for length in range(1, n + 1):
            for i in range(n - length + 1):
                block = seq[i:i + length]
                if block not in blocks:
                    continue
                rest = seq[:i] + seq[i + length:]
                for j in range(len(rest) + 1):
                    if j == i:
                        continue
                    moved = rest[:j] + block + rest[j:]
                    g = shifts + 1
                    if seen.get(moved, g + 1) <= g:
                        continue
                    seen[moved] = g
                    best = min(best, g + word_edit_distance(moved, reference))
                    explore(moved, g)

    explore(start, 0)
    return best


def ter(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Translation edit rate: (shifts + word edits) / reference length.

    Each shift of a contiguous block costs one edit; a block may move only
    when its content occurs in the reference.  Short inputs are solved
    exactly; longer ones use greedy best-reduction-first shift selection
    capped at MAX_SHIFTS.
    """
    if not reference:
        raise ValueError("reference must be nonempty")
    if len(candidate) <= EXACT_TER_LIMIT and len(reference) <= EXACT_TER_LIMIT:
        return _exact_ter_edits(candidate, reference) / len(reference)
    current = list(candidate)
    shifts = 0
    distance = word_edit_distance(current, reference)
    while distance >= 2 and shifts < MAX_SHIFTS:
        best: Optional[tuple[int, int, int, int]] = None
        for i, length, j in _shift_candidates(current, reference):
            shifted = _apply_shift(current, i, length, j)
            d = word_edit_distance(shifted, reference)
            if d + 1 < distance and (best is None or (d, i, length, j) < best):
                best = (d, i, length, j)
        if best is None:
            break
        d, i, length, j = best
        current = _apply_shift(current, i, length, j)
        distance = d
        shifts += 1
    return (shifts + distance) / len(reference)


# --- corpus-level evaluation ---

def evaluate_corpus(
    pairs: Sequence[tuple[str, PairedExample, TableExtract]],
) -> MetricReport:
    """Aggregate metrics over (generated text, example, reference extract).

    Recall, ROUGE and TER are macro-averaged; BLEU and BLEU Extract use
    corpus-level aggregated counts.
    """
    if not pairs:
        raise ValueError("pairs must be nonempty")
    recalls: list[float] = []
    rouge1s: list[float] = []
    rouge2s: list[float] = []
    rougeLs: list[float] = []
    ters: list[float] = []
    bleu_pairs: list[tuple[Sequence[str], Sequence[str]]] = []
    extract_pairs: list[tuple[Sequence[str], Sequence[str]]] = []
    for generated, example, extract in pairs:
        cand = tokenize(generated)
        ref = tokenize(example.report)
        recalls.append(table_recall(extract, generated))
        rouge1s.append(rouge(cand, ref, RougeVariant.R1))
        rouge2s.append(rouge(cand, ref, RougeVariant.R2))
        rougeLs.append(rouge(cand, ref, RougeVariant.RL))
        ters.append(ter(cand, ref))
        bleu_pairs.append((cand, ref))
        extract_pairs.append(
            (restore_extract(generated, extract).surfaces(), extract.surfaces())
        )
    n = len(pairs)
    return MetricReport(
        table_recall=sum(recalls) / n,
        bleu_extract=corpus_bleu(extract_pairs),
        bleu=corpus_bleu(bleu_pairs),
        rouge1=sum(rouge1s) / n,
        rouge2=sum(rouge2s) / n,
        rougeL=sum(rougeLs) / n,
        ter=sum(ters) / n,
    )
