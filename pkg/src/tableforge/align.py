"""Value classification, table-report alignment and difficulty scoring.

A report token counts as a table value when it classifies as one of the
value kinds and its exact surface occurs in a table cell (or among the
title / table-id tokens).  The resulting extract lists values in report
order, repetitions included.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .corpus import Corpus, PairedExample, Table
from .text import tokenize


class ValueKind(str, Enum):
    INTEGER = "Integer"
    FLOAT = "Float"
    RUN_ID = "RunId"
    STRING_VALUE = "StringValue"
    TABLE_ID = "TableId"
    EMPHASIS_MARK = "EmphasisMark"


# Sentinel row index for values matched in a table's title or table_id.
TITLE_ROW = -1

# Closed-class English words plus frequent report verbiage; checked against
# the lowercased token so sentence-initial capitals are filtered too.
CLOSED_CLASS_WORDS = frozenset("""
a an the this that these those some any each every no all both few many
i you he she it we they me him her us them my your his its our their
and or but nor so yet for if then else when while because although since
unless until whether though whereas moreover however therefore thus hence
of in on at by to from with without within into onto upon about above
below under over between among during before after through across against
along around behind beside beyond near off out up down per via
is are was were be been being am do does did done doing have has had
having will would shall should can could may might must not
as than too very also only just more most less least much such same other
another either neither rather quite respectively eg ie etc
there here where which who whom whose what why how
observed presented reported shown evaluated analyzed measured described
respective following according based using used given
""".split())

# Biomedical abbreviations treated as string values even when they do not
# look like ordinary capitalized words.
DEFAULT_ABBREVIATIONS = frozenset(
    ["ADA", "CV", "CVs", "QC", "SD", "LLOQ", "ULOQ", "ELISA", "PCR", "DNA", "RNA"]
)

DEFAULT_STOPLIST = CLOSED_CLASS_WORDS

_INTEGER_RE = re.compile(r"\d+")
_FLOAT_RE = re.compile(r"\d+\.\d+")
_TABLE_ID_RE = re.compile(r"Table[A-Za-z0-9]+")
_EMPHASIS_RE = re.compile(r"\*+")
_ALPHA_RE = re.compile(r"[A-Za-z]+")
_ALNUM_MIXED_RE = re.compile(r"(?=.*[A-Za-z])(?=.*\d)[A-Za-z0-9]+")


def build_stoplist(corpus: Corpus, top_n: int = 1000) -> frozenset[str]:
    """Closed-class words plus the corpus's most frequent lowercase tokens."""
    counts: Counter[str] = Counter()
    for ex in corpus.examples:
        for token in tokenize(ex.report):
            if token.isalpha() and token.islower():
                counts[token] += 1
    frequent = {t for t, _ in counts.most_common(top_n)}
    return frozenset(CLOSED_CLASS_WORDS | frequent)


def classify_value(
    token: str,
    stoplist: frozenset[str] = DEFAULT_STOPLIST,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> Optional[ValueKind]:
    """Classify a token; ``None`` means the token is not a value.

    Digit-only surfaces are integers, single-decimal-point surfaces floats,
    ``Table``-prefixed alphanumerics table ids, other mixed letter+digit
    surfaces run ids, asterisk runs emphasis marks.  Capitalized words and
    known abbreviations are string values; everything else (punctuation,
    lowercase prose, stoplisted words) is not a value.
    """
    if not token:
        raise ValueError("token must be nonempty")
    if _EMPHASIS_RE.fullmatch(token):
        return ValueKind.EMPHASIS_MARK
    if _INTEGER_RE.fullmatch(token):
        return ValueKind.INTEGER
    if _FLOAT_RE.fullmatch(token):
        return ValueKind.FLOAT
    if _TABLE_ID_RE.fullmatch(token):
        return ValueKind.TABLE_ID
    if token in abbreviations:
        return ValueKind.STRING_VALUE
    if _ALNUM_MIXED_RE.fullmatch(token):
        return ValueKind.RUN_ID
    if _ALPHA_RE.fullmatch(token):
        if token.lower() in stoplist:
            return None
        if token[0].isupper():
            return ValueKind.STRING_VALUE
    return None


@dataclass(frozen=True)
class TypedValue:
    surface: str
    kind: ValueKind
    # (table index, row index, column index); row TITLE_ROW marks a match in
    # the table title or table_id; None marks a value present only in text.
    source: Optional[tuple[int, int, int]] = None

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError("surface must be nonempty")
        if self.kind is ValueKind.INTEGER and not _INTEGER_RE.fullmatch(self.surface):
            raise ValueError(f"not an integer surface: {self.surface!r}")
        if self.kind is ValueKind.FLOAT and not _FLOAT_RE.fullmatch(self.surface):
            raise ValueError(f"not a float surface: {self.surface!r}")


@dataclass(frozen=True)
class TableExtract:
    values: tuple[TypedValue, ...]

    def surfaces(self) -> list[str]:
        return [v.surface for v in self.values]

    def unique_surfaces(self) -> set[str]:
        return {v.surface for v in self.values}

    def kinds(self) -> list[ValueKind]:
        return [v.kind for v in self.values]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Alignment:
    extract: TableExtract
    report_positions: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.report_positions) != len(self.extract.values):
            raise ValueError("report_positions must align 1:1 with extract values")


class TableIndex:
    """Token -> first source position lookup over a list of tables."""

    def __init__(self, tables: Sequence[Table]):
        self.cell_sources: dict[str, tuple[int, int, int]] = {}
        self.title_sources: dict[str, tuple[int, int, int]] = {}
        for t, table in enumerate(tables):
            for token in table.title_tokens() + [table.table_id]:
                self.title_sources.setdefault(token, (t, TITLE_ROW, TITLE_ROW))
            for r, row in enumerate(table.rows):
                for c, cell in enumerate(row):
                    for token in cell.tokens():
                        self.cell_sources.setdefault(token, (t, r, c))

    def lookup(self, surface: str) -> Optional[tuple[int, int, int]]:
        if surface in self.cell_sources:
            return self.cell_sources[surface]
        return self.title_sources.get(surface)


def match_values(
    tables: Sequence[Table],
    report: str,
    stoplist: frozenset[str] = DEFAULT_STOPLIST,
) -> Alignment:
    """Scan report tokens left to right and collect table values in order.

    Repetitions in the text yield repeated extract entries; each entry cites
    the first matching source position in the tables.
    """
    index = TableIndex(tables)
    values: list[TypedValue] = []
    positions: list[int] = []
    for pos, token in enumerate(tokenize(report)):
        kind = classify_value(token, stoplist)
        if kind is None:
            continue
        source = index.lookup(token)
        if source is None:
            continue
        values.append(TypedValue(token, kind, source))
        positions.append(pos)
    return Alignment(TableExtract(tuple(values)), tuple(positions))


def difficulty_score(example: PairedExample, alignment: Alignment) -> float:
    """Mean normalized row depth of the aligned values, in [0, 1].

    A value in row ``r`` (0-based) of an ``n``-row table contributes
    ``(r + 1) / n``; title matches and examples with no sourced matches
    score 0.
    """
    depths: list[float] = []
    for value in alignment.extract.values:
        if value.source is None:
            continue
        t, r, _ = value.source
        if r == TITLE_ROW:
            continue
        n_rows = example.tables[t].n_rows
        depths.append((r + 1) / n_rows)
    if not depths:
        return 0.0
    return sum(depths) / len(depths)


def select_curriculum(
    corpus: Corpus,
    count: int,
    stoplist: frozenset[str] = DEFAULT_STOPLIST,
) -> list[PairedExample]:
    """The ``count`` most difficult train examples, ties broken by id."""
    train = corpus.train()
    if count > len(train):
        raise ValueError(f"count {count} exceeds train size {len(train)}")
    scored = [
        (difficulty_score(ex, match_values(ex.tables, ex.report, stoplist)), ex)
        for ex in train
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1].id))
    return [ex for _, ex in scored[:count]]
