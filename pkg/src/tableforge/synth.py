"""Alignment-preserving synthetic pair generation.

Each matched value is replaced consistently in both the tables and the
report: string-like values draw from a dictionary harvested from training
alignments, numerics get a small seeded jitter, run ids are scrambled.
Replacements avoid every surface already present in the pair, so re-running
the aligner on a synthetic pair reproduces the original kind sequence.
"""

from __future__ import annotations

import hashlib
import logging
import random
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal

from . import align
from .align import Alignment, ValueKind, classify_value, match_values
from .corpus import Cell, Corpus, PairedExample, Table
from .text import replace_token, tokenize

log = logging.getLogger(__name__)

_JITTER_ATTEMPTS = 16
_DRAW_ATTEMPTS = 8

DICTIONARY_KINDS = (ValueKind.STRING_VALUE, ValueKind.RUN_ID, ValueKind.TABLE_ID)


@dataclass(frozen=True)
class SynthConfig:
    per_example: int = 1000
    seed: int = 0
    jitter_relative_bound: float = 0.1

    def __post_init__(self) -> None:
        if self.per_example < 1:
            raise ValueError("per_example must be >= 1")
        if not 0 < self.jitter_relative_bound < 1:
            raise ValueError("jitter_relative_bound must be in (0, 1)")


@dataclass
class SlotDictionary:
    entries: dict[ValueKind, set[str]] = field(default_factory=dict)

    def alternatives(self, kind: ValueKind, original: str) -> list[str]:
        return sorted(self.entries.get(kind, set()) - {original})


def build_slot_dictionary(
    corpus: Corpus, stoplist: frozenset[str] = align.DEFAULT_STOPLIST
) -> SlotDictionary:
    """Collect matched string/run-id/table-id surfaces from train alignments."""
    train = corpus.train()
    if not train:
        raise ValueError("corpus has no train examples")
    entries: dict[ValueKind, set[str]] = {kind: set() for kind in DICTIONARY_KINDS}
    for ex in train:
        alignment = match_values(ex.tables, ex.report, stoplist)
        for value in alignment.extract.values:
            if value.kind in entries:
                entries[value.kind].add(value.surface)
    return SlotDictionary(entries)


def derive_rng(seed: int, *parts) -> random.Random:
    """Stable child RNG for (seed, part...) independent of process hashing."""
    key = ":".join([str(seed), *map(str, parts)]).encode("utf-8")
    digest = hashlib.sha256(key).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _decimals(surface: str) -> int:
    return len(surface.split(".")[1]) if "." in surface else 0


def jitter_numeric(
    surface: str, rng: random.Random, bound: float = 0.1
) -> str:
    """A nearby numeric surface of the same kind, never the original.

    The perturbation radius is bound * max(|value|, 1), widened to one
    precision step when that is larger so a distinct candidate always
    exists.  Floats keep their precision or gain one digit.
    """
    kind = classify_value(surface)
    if kind is ValueKind.INTEGER:
        value = int(surface)
        radius = max(bound * max(value, 1), 1.0)
        for _ in range(_JITTER_ATTEMPTS):
            candidate = round(value + rng.uniform(-radius, radius))
            if candidate != value and candidate >= 0:
                return str(candidate)
        return str(value + 1)
    if kind is ValueKind.FLOAT:
        decimals = _decimals(surface)
        value = Decimal(surface)
        radius = max(bound * max(abs(float(value)), 1.0), 10.0 ** -decimals)
        for _ in range(_JITTER_ATTEMPTS):
            target_decimals = decimals if rng.random() < 0.5 else decimals + 1
            shifted = value + Decimal(repr(rng.uniform(-radius, radius)))
            candidate = shifted.quantize(
                Decimal(1).scaleb(-target_decimals), ROUND_HALF_UP
            )
            if candidate != value and candidate >= 0:
                return format(candidate, "f")
        return surface + str(rng.randint(1, 9))
    raise ValueError(f"not a numeric surface: {surface!r}")


def scramble_alnum(surface: str, rng: random.Random) -> str:
    """Permutation of the characters of a run id, multiset preserved."""
    if classify_value(surface) is not ValueKind.RUN_ID:
        raise ValueError(f"not a run id surface: {surface!r}")
    chars = list(surface)
    for _ in range(32):
        shuffled = chars[:]
        rng.shuffle(shuffled)
        candidate = "".join(shuffled)
        if candidate != surface and classify_value(candidate) is ValueKind.RUN_ID:
            return candidate
    reversed_surface = surface[::-1]
    if reversed_surface != surface and classify_value(reversed_surface) is ValueKind.RUN_ID:
        return reversed_surface
    return surface


def _pair_token_pool(example: PairedExample) -> set[str]:
    """Every token already present in the pair; replacements must avoid these."""
    pool = set(tokenize(example.report))
    for table in example.tables:
        pool.update(table.title_tokens())
        pool.add(table.table_id)
        for header in table.columns:
            pool.update(tokenize(header))
        for row in table.rows:
            for cell in row:
                pool.update(cell.tokens())
    return pool


def _draw_replacement(
    surface: str,
    kind: ValueKind,
    dictionary: SlotDictionary,
    rng: random.Random,
    bound: float,
    excluded: set[str],
) -> str | None:
    """A fresh same-kind surface, or None when no safe candidate exists."""

    def dictionary_draw() -> str | None:
        options = [s for s in dictionary.alternatives(kind, surface) if s not in excluded]
        return rng.choice(options) if options else None

    if kind in (ValueKind.INTEGER, ValueKind.FLOAT):
        for _ in range(_DRAW_ATTEMPTS):
            candidate = jitter_numeric(surface, rng, bound)
            if candidate not in excluded:
                return candidate
        return None
    if kind is ValueKind.RUN_ID:
        order = ("scramble", "dict") if rng.random() < 0.5 else ("dict", "scramble")
        for method in order:
            if method == "scramble":
                for _ in range(_DRAW_ATTEMPTS):
                    candidate = scramble_alnum(surface, rng)
                    if candidate != surface and candidate not in excluded:
                        return candidate
            else:
                candidate = dictionary_draw()
                if candidate is not None:
                    return candidate
        return None
    if kind in (ValueKind.STRING_VALUE, ValueKind.TABLE_ID):
        return dictionary_draw()
    return None


def _substitute_table(table: Table, mapping: dict[str, str]) -> Table:
    def fix(text: str) -> str:
        for original, replacement in mapping.items():
            if original in text:
                text = replace_token(text, original, replacement)
        return text

    return Table(
        table_id=fix(table.table_id),
        title=fix(table.title),
        columns=tuple(fix(h) for h in table.columns),
        rows=tuple(
            tuple(Cell(fix(c.text), c.emphasis) for c in row) for row in table.rows
        ),
    )


def synthesize_pair(
    example: PairedExample,
    dictionary: SlotDictionary,
    config: SynthConfig,
    rng: random.Random,
    stoplist: frozenset[str] = align.DEFAULT_STOPLIST,
    alignment: Alignment | None = None,
) -> PairedExample:
    """Replace each matched value consistently in tables and report.

    A pair with an empty alignment is returned unchanged (logged; callers
    track such ids).  Emphasis marks are never replaced.
    """
    if alignment is None:
        alignment = match_values(example.tables, example.report, stoplist)
    if not alignment.extract.values:
        log.warning("synthesize_pair: %s has an empty alignment", example.id)
        return replace(example)

    distinct: list[tuple[str, ValueKind]] = []
    seen: set[str] = set()
    for value in alignment.extract.values:
        if value.kind is ValueKind.EMPHASIS_MARK or value.surface in seen:
            continue
        seen.add(value.surface)
        distinct.append((value.surface, value.kind))

    excluded = _pair_token_pool(example)
    mapping: dict[str, str] = {}
    for j, (surface, kind) in enumerate(distinct):
        child = random.Random(rng.getrandbits(64))
        candidate = _draw_replacement(
            surface, kind, dictionary, child, config.jitter_relative_bound, excluded
        )
        if candidate is None:
            log.debug("synthesize_pair: kept %r (no safe replacement)", surface)
            continue
        mapping[surface] = candidate
        excluded.add(candidate)

    if not mapping:
        return replace(example)
    report = example.report
    for original, replacement in mapping.items():
        report = replace_token(report, original, replacement)
    tables = tuple(_substitute_table(t, mapping) for t in example.tables)
    return PairedExample(example.id, tables, report, example.split)


def generate_synthetic_corpus(
    corpus: Corpus,
    config: SynthConfig,
    stoplist: frozenset[str] = align.DEFAULT_STOPLIST,
) -> Corpus:
    """``per_example`` synthetic pairs per train example, seed-deterministic.

    Ids carry a synthesis suffix; pairs whose alignment is empty are copied
    unchanged and listed under provenance["unchanged_ids"].
    """
    train = corpus.train()
    dictionary = build_slot_dictionary(corpus, stoplist)
    alignments = [match_values(ex.tables, ex.report, stoplist) for ex in train]
    synthetic: list[PairedExample] = []
    unchanged: list[str] = []
    for i, ex in enumerate(train):
        for k in range(config.per_example):
            rng = derive_rng(config.seed, i, k)
            pair = synthesize_pair(
                ex, dictionary, config, rng, stoplist, alignments[i]
            )
            new_id = f"{ex.id}-syn{k}"
            if pair.report == ex.report and pair.tables == ex.tables:
                unchanged.append(new_id)
            synthetic.append(
                PairedExample(new_id, pair.tables, pair.report, "train")
            )
    return Corpus(
        synthetic,
        provenance={
            "synthesized_from": len(train),
            "per_example": config.per_example,
            "seed": config.seed,
            "unchanged_ids": unchanged,
        },
    )
