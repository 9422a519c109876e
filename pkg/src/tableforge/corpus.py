"""Table-report corpora: domain types, JSONL persistence, pairing and splits.

A corpus is stored as line-delimited JSON, one example per line:

    {"id": ..., "split": "train"|"test",
     "tables": [{"table_id", "title", "columns", "rows": [[{"text", "emphasis"}]]}],
     "report": ...}
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .text import tokenize

log = logging.getLogger(__name__)


class CorpusError(ValueError):
    """Raised for malformed corpus files or invariant violations."""


@dataclass(frozen=True)
class Cell:
    text: str
    emphasis: int = 0

    def __post_init__(self) -> None:
        if "\n" in self.text:
            raise CorpusError(f"cell text contains a newline: {self.text!r}")
        if self.emphasis < 0:
            raise CorpusError(f"cell emphasis must be >= 0, got {self.emphasis}")

    def tokens(self) -> list[str]:
        """Cell tokens; emphasis surfaces as a trailing asterisk run."""
        toks = tokenize(self.text)
        if self.emphasis > 0:
            toks.append("*" * self.emphasis)
        return toks


@dataclass(frozen=True)
class Table:
    table_id: str
    title: str
    columns: tuple[str, ...]
    rows: tuple[tuple[Cell, ...], ...]

    def __post_init__(self) -> None:
        if not self.table_id:
            raise CorpusError("table_id must be nonempty")
        for r, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise CorpusError(
                    f"table {self.table_id!r}: row {r} has {len(row)} cells, "
                    f"expected {len(self.columns)}"
                )

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def title_tokens(self) -> list[str]:
        return tokenize(self.title)


def make_table(
    table_id: str,
    title: str,
    columns: Iterable[str],
    rows: Iterable[Iterable[Cell]],
) -> Table:
    """Convenience constructor accepting plain lists."""
    return Table(table_id, title, tuple(columns), tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class PairedExample:
    id: str
    tables: tuple[Table, ...]
    report: str
    split: str = "train"

    def __post_init__(self) -> None:
        if not self.tables:
            raise CorpusError(f"example {self.id!r}: tables must be nonempty")
        if self.split not in ("train", "test"):
            raise CorpusError(f"example {self.id!r}: bad split {self.split!r}")
        if not self.report:
            raise CorpusError(f"example {self.id!r}: report must be nonempty")
        seen = set()
        for t in self.tables:
            if t.table_id in seen:
                raise CorpusError(
                    f"example {self.id!r}: duplicate table_id {t.table_id!r}"
                )
            seen.add(t.table_id)


@dataclass
class Corpus:
    examples: list[PairedExample] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen = set()
        for ex in self.examples:
            if ex.id in seen:
                raise CorpusError(f"duplicate example id {ex.id!r}")
            seen.add(ex.id)

    def train(self) -> list[PairedExample]:
        return [ex for ex in self.examples if ex.split == "train"]

    def test(self) -> list[PairedExample]:
        return [ex for ex in self.examples if ex.split == "test"]

    def by_id(self, example_id: str) -> PairedExample:
        for ex in self.examples:
            if ex.id == example_id:
                return ex
        raise KeyError(example_id)


# --- JSONL (de)serialization ---

def cell_to_dict(cell: Cell) -> dict:
    return {"text": cell.text, "emphasis": cell.emphasis}


def table_to_dict(table: Table) -> dict:
    return {
        "table_id": table.table_id,
        "title": table.title,
        "columns": list(table.columns),
        "rows": [[cell_to_dict(c) for c in row] for row in table.rows],
    }


def example_to_dict(ex: PairedExample) -> dict:
    return {
        "id": ex.id,
        "split": ex.split,
        "tables": [table_to_dict(t) for t in ex.tables],
        "report": ex.report,
    }


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise CorpusError(f"{where}: missing field {key!r}")
    return obj[key]


def cell_from_dict(obj: dict, where: str) -> Cell:
    text = _require(obj, "text", where)
    emphasis = obj.get("emphasis", 0)
    if not isinstance(text, str):
        raise CorpusError(f"{where}: field 'text' must be a string")
    if not isinstance(emphasis, int) or emphasis < 0:
        raise CorpusError(f"{where}: field 'emphasis' must be a non-negative int")
    return Cell(text, emphasis)


def table_from_dict(obj: dict, where: str) -> Table:
    table_id = _require(obj, "table_id", where)
    title = _require(obj, "title", where)
    columns = _require(obj, "columns", where)
    rows = _require(obj, "rows", where)
    cells = tuple(
        tuple(cell_from_dict(c, f"{where} row {r}") for c in row)
        for r, row in enumerate(rows)
    )
    try:
        return Table(table_id, title, tuple(columns), cells)
    except CorpusError as err:
        raise CorpusError(f"{where}: {err}") from None


def example_from_dict(obj: dict, where: str) -> PairedExample:
    ex_id = _require(obj, "id", where)
    split = _require(obj, "split", where)
    tables = _require(obj, "tables", where)
    report = _require(obj, "report", where)
    if not isinstance(tables, list) or not tables:
        raise CorpusError(f"{where}: field 'tables' must be a nonempty list")
    parsed = tuple(
        table_from_dict(t, f"{where} table {i}") for i, t in enumerate(tables)
    )
    try:
        return PairedExample(ex_id, parsed, report, split)
    except CorpusError as err:
        raise CorpusError(f"{where}: {err}") from None


def ingest_corpus(path: str | Path) -> Corpus:
    """Read a JSONL corpus file; errors cite the offending line and field."""
    path = Path(path)
    examples: list[PairedExample] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise CorpusError(f"{where}: invalid JSON ({err.msg})") from None
            ex = example_from_dict(obj, where)
            if ex.id in seen:
                raise CorpusError(f"{where}: duplicate id {ex.id!r}")
            seen.add(ex.id)
            examples.append(ex)
    return Corpus(examples, provenance={"source": str(path)})


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus as JSONL (UTF-8, one example per line)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for ex in corpus.examples:
            fh.write(json.dumps(example_to_dict(ex), ensure_ascii=False))
            fh.write("\n")


def corpus_to_bytes(corpus: Corpus) -> bytes:
    """Serialized corpus content, for byte-level determinism checks."""
    lines = [
        json.dumps(example_to_dict(ex), ensure_ascii=False) for ex in corpus.examples
    ]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


# --- table-paragraph pairing ---

_TABLE_NUMBER_RE = re.compile(r"table\w+", re.IGNORECASE)


def table_number(table: Table) -> str | None:
    """First ``Table``-prefixed token of the title or table_id, lowercased."""
    for source in (table.title, table.table_id):
        for token in tokenize(source):
            if _TABLE_NUMBER_RE.fullmatch(token):
                return token.lower()
    return None


def pair_tables_to_paragraphs(
    tables: list[Table], paragraphs: list[str]
) -> list[PairedExample]:
    """Pair each table with the paragraph that describes it.

    Candidates are paragraphs mentioning the table's number; among those the
    paragraph containing the most of the table's values wins, ties breaking
    toward the earlier paragraph.  Tables with no candidate are skipped.
    """
    from .align import match_values  # local import to avoid a module cycle

    paragraph_tokens = [set(tokenize(p.lower())) for p in paragraphs]
    results: list[PairedExample] = []
    skipped = 0
    for table in tables:
        number = table_number(table)
        if number is None:
            skipped += 1
            continue
        candidates = [
            i for i, toks in enumerate(paragraph_tokens) if number in toks
        ]
        if not candidates:
            skipped += 1
            continue
        best = max(
            candidates,
            key=lambda i: (len(match_values([table], paragraphs[i]).extract.values), -i),
        )
        results.append(
            PairedExample(
                id=table.table_id,
                tables=(table,),
                report=paragraphs[best],
                split="train",
            )
        )
    if skipped:
        log.info("pair_tables_to_paragraphs: skipped %d table(s) without a match", skipped)
    return results


def split_corpus(corpus: Corpus, seed: int, test_fraction: float) -> Corpus:
    """Assign train/test labels; |test| = round(test_fraction * N)."""
    if not 0 <= test_fraction <= 1:
        raise ValueError(f"test_fraction must be in [0, 1], got {test_fraction}")
    n = len(corpus.examples)
    n_test = round(test_fraction * n)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    test_indices = set(order[:n_test])
    relabeled = [
        PairedExample(ex.id, ex.tables, ex.report,
                      "test" if i in test_indices else "train")
        for i, ex in enumerate(corpus.examples)
    ]
    return Corpus(relabeled, provenance=dict(corpus.provenance))
