"""Table preprocessing: flattening, positional dedup, markup, aggregation.

Tables are flattened row by row into token sequences (title first, then
headers, then rows), with limits on row count and tokens per row.  The
limits can be calibrated so a target share of the corpus's aligned values
survives flattening.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from . import align
from .corpus import Cell, Corpus, Table
from .text import tokenize

_NUMERIC_RE = re.compile(r"-?\d+(\.\d+)?")

TITLE_ROW = align.TITLE_ROW


class AggregateError(ValueError):
    """Raised when an aggregation rule hits a non-numeric target cell."""


@dataclass(frozen=True)
class FlattenLimits:
    max_rows: int
    max_tokens_per_row: int
    coverage_target: float = 0.85

    def __post_init__(self) -> None:
        if self.max_rows < 1 or self.max_tokens_per_row < 1:
            raise ValueError("limits must be >= 1")
        if not 0 < self.coverage_target <= 1:
            raise ValueError("coverage_target must be in (0, 1]")


@dataclass(frozen=True)
class FlatTable:
    tokens: tuple[str, ...]
    # (row, column) per token; title tokens map to (TITLE_ROW, -1) and
    # header tokens to (TITLE_ROW, column).
    source_map: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.source_map):
            raise ValueError("tokens and source_map must align 1:1")


def row_tokens(table: Table, row_index: int) -> list[tuple[str, int]]:
    """Tokens of one row as (token, column) pairs, in column order."""
    out: list[tuple[str, int]] = []
    for c, cell in enumerate(table.rows[row_index]):
        out.extend((token, c) for token in cell.tokens())
    return out


def flatten_table(table: Table, limits: FlattenLimits) -> FlatTable:
    """Flatten title, headers and rows into one token sequence.

    Rows beyond ``max_rows`` are dropped; each row contributes at most
    ``max_tokens_per_row`` tokens.
    """
    tokens: list[str] = []
    sources: list[tuple[int, int]] = []
    for token in table.title_tokens():
        tokens.append(token)
        sources.append((TITLE_ROW, -1))
    for c, header in enumerate(table.columns):
        for token in tokenize(header):
            tokens.append(token)
            sources.append((TITLE_ROW, c))
    for r in range(min(table.n_rows, limits.max_rows)):
        for token, c in row_tokens(table, r)[: limits.max_tokens_per_row]:
            tokens.append(token)
            sources.append((r, c))
    return FlatTable(tuple(tokens), tuple(sources))


def dedup_consecutive(flat: FlatTable) -> FlatTable:
    """Drop row tokens that repeat the same position of the previous row.

    Comparison is positional within the row's token sequence and always
    against the previous row's original tokens, so every row of a longer
    run loses its repeats.  Title and header tokens are never removed.
    """
    by_row: dict[int, list[str]] = {}
    for token, (r, _) in zip(flat.tokens, flat.source_map):
        if r >= 0:
            by_row.setdefault(r, []).append(token)

    position_in_row: dict[int, int] = {}
    keep: list[int] = []
    for i, (token, (r, _)) in enumerate(zip(flat.tokens, flat.source_map)):
        if r < 0:
            keep.append(i)
            continue
        pos = position_in_row.get(r, 0)
        position_in_row[r] = pos + 1
        prev = by_row.get(r - 1)
        if prev is not None and pos < len(prev) and prev[pos] == token:
            continue
        keep.append(i)
    return FlatTable(
        tuple(flat.tokens[i] for i in keep),
        tuple(flat.source_map[i] for i in keep),
    )


def _header_marked(header: str) -> bool:
    return header.rstrip().endswith("*")


def propagate_markup(table: Table) -> Table:
    """Propagate cell emphasis to the column header and the row title.

    The row title is the row's first cell.  Idempotent; never decreases
    an emphasis value.
    """
    emphasized_columns = set()
    emphasized_rows = set()
    for r, row in enumerate(table.rows):
        for c, cell in enumerate(row):
            if cell.emphasis > 0:
                emphasized_columns.add(c)
                emphasized_rows.add(r)
    if not emphasized_rows:
        return table
    # Row titles (first cells) become emphasized below, so their own column
    # header is marked too; keeps a single application a fixpoint.
    emphasized_columns.add(0)
    columns = tuple(
        header if c not in emphasized_columns or _header_marked(header)
        else header + " *"
        for c, header in enumerate(table.columns)
    )
    rows = tuple(
        tuple(
            Cell(cell.text, max(1, cell.emphasis))
            if c == 0 and r in emphasized_rows else cell
            for c, cell in enumerate(row)
        )
        for r, row in enumerate(table.rows)
    )
    return Table(table.table_id, table.title, columns, rows)


@dataclass(frozen=True)
class AggregateRule:
    kind: str  # "GroupMean" | "ControlDifference"
    parameters: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("GroupMean", "ControlDifference"):
            raise ValueError(f"unknown aggregate rule kind {self.kind!r}")


def parse_numeric(text: str) -> Decimal | None:
    stripped = text.strip()
    if _NUMERIC_RE.fullmatch(stripped):
        return Decimal(stripped)
    return None


def _decimals(text: str) -> int:
    stripped = text.strip()
    return len(stripped.split(".")[1]) if "." in stripped else 0


def _format_decimal(value: Decimal, max_decimals: int) -> str:
    if max_decimals > 0:
        value = value.quantize(Decimal(1).scaleb(-max_decimals), ROUND_HALF_UP)
    text = format(value, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


def _column_index(table: Table, name: str) -> int:
    try:
        return list(table.columns).index(name)
    except ValueError:
        raise AggregateError(
            f"table {table.table_id!r} has no column {name!r}"
        ) from None


def _value_columns(table: Table, rule: AggregateRule, skip: set[int]) -> list[int]:
    """Columns targeted by numeric aggregation.

    Explicit ``value_columns`` must be numeric everywhere (error otherwise);
    with no explicit list, every all-numeric column is targeted.
    """
    explicit = rule.parameters.get("value_columns")
    if explicit is not None:
        indices = [_column_index(table, name) for name in explicit]
        for c in indices:
            for r, row in enumerate(table.rows):
                if parse_numeric(row[c].text) is None:
                    raise AggregateError(
                        f"row {r}, column {table.columns[c]!r}: "
                        f"non-numeric cell {row[c].text!r}"
                    )
        return indices
    return [
        c for c in range(len(table.columns))
        if c not in skip
        and table.rows
        and all(parse_numeric(row[c].text) is not None for row in table.rows)
    ]


def _apply_group_mean(table: Table, rule: AggregateRule) -> Table:
    group_col = _column_index(table, rule.parameters["group_column"])
    value_cols = _value_columns(table, rule, skip={group_col})
    order: list[str] = []
    groups: dict[str, list[int]] = {}
    for r, row in enumerate(table.rows):
        key = row[group_col].text
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)

    new_rows = []
    for key in order:
        members = groups[key]
        first = table.rows[members[0]]
        cells = []
        for c in range(len(table.columns)):
            if c in value_cols:
                texts = [table.rows[r][c].text for r in members]
                mean = sum(parse_numeric(t) for t in texts) / len(members)
                decimals = max(_decimals(t) for t in texts) + 2
                emphasis = max(table.rows[r][c].emphasis for r in members)
                cells.append(Cell(_format_decimal(mean, decimals), emphasis))
            else:
                cells.append(first[c])
        new_rows.append(tuple(cells))
    return Table(table.table_id, table.title, table.columns, tuple(new_rows))


def _apply_control_difference(table: Table, rule: AggregateRule) -> Table:
    group_col = _column_index(table, rule.parameters["group_column"])
    control_key = rule.parameters["control_key"]
    value_cols = _value_columns(table, rule, skip={group_col})
    control_rows = [
        r for r, row in enumerate(table.rows) if row[group_col].text == control_key
    ]
    if not control_rows:
        raise AggregateError(f"no control row with key {control_key!r}")
    control = table.rows[control_rows[0]]

    new_rows = []
    for r, row in enumerate(table.rows):
        if r == control_rows[0]:
            new_rows.append(row)
            continue
        cells = []
        for c in range(len(table.columns)):
            if c in value_cols:
                experimental = parse_numeric(row[c].text)
                baseline = parse_numeric(control[c].text)
                decimals = max(_decimals(row[c].text), _decimals(control[c].text))
                cells.append(
                    Cell(_format_decimal(experimental - baseline, decimals),
                         row[c].emphasis)
                )
            else:
                cells.append(row[c])
        new_rows.append(tuple(cells))
    return Table(table.table_id, table.title, table.columns, tuple(new_rows))


def apply_aggregate_rules(table: Table, rules: list[AggregateRule]) -> Table:
    """Apply group-mean and control-difference rules in order."""
    for rule in rules:
        if rule.kind == "GroupMean":
            table = _apply_group_mean(table, rule)
        else:
            table = _apply_control_difference(table, rule)
    return table


def _survival_requirements(
    corpus: Corpus, stoplist: frozenset[str]
) -> list[tuple[int, int]]:
    """(rows needed, row tokens needed) per aligned train value."""
    requirements: list[tuple[int, int]] = []
    for ex in corpus.train():
        alignment = align.match_values(ex.tables, ex.report, stoplist)
        for value in alignment.extract.values:
            if value.source is None:
                continue
            t, r, c = value.source
            if r == TITLE_ROW:
                requirements.append((0, 0))
                continue
            row = row_tokens(ex.tables[t], r)
            needed_tokens = min(
                p + 1
                for p, (token, col) in enumerate(row)
                if col == c and token == value.surface
            )
            requirements.append((r + 1, needed_tokens))
    return requirements


def calibrate_limits(
    corpus: Corpus,
    coverage_target: float = 0.85,
    stoplist: frozenset[str] = align.DEFAULT_STOPLIST,
) -> FlattenLimits:
    """Smallest (rows, tokens-per-row) limits, rows minimized first, such
    that at least ``coverage_target`` of aligned train values survive
    flattening."""
    requirements = _survival_requirements(corpus, stoplist)
    if not requirements:
        raise ValueError("no aligned values found in the train split")
    max_rows_needed = max(1, max(rows for rows, _ in requirements))
    max_tokens_needed = max(1, max(tokens for _, tokens in requirements))
    total = len(requirements)

    def coverage(max_rows: int, max_tokens: int) -> float:
        covered = sum(
            1 for rows, tokens in requirements
            if rows <= max_rows and tokens <= max_tokens
        )
        return covered / total

    for rows in range(1, max_rows_needed + 1):
        if coverage(rows, max_tokens_needed) < coverage_target:
            continue
        for tokens in range(1, max_tokens_needed + 1):
            if coverage(rows, tokens) >= coverage_target:
                return FlattenLimits(rows, tokens, coverage_target)
    return FlattenLimits(max_rows_needed, max_tokens_needed, coverage_target)
