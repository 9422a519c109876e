"""Generator abstraction, input assembly and the template baseline.

The template baseline picks the training template whose table title is
closest under the similarity ratio 2*K/(|s1|+|s2|), where K counts the
characters matched by recursive longest-common-substring decomposition,
then fills the template's typed slots with the test table's values at the
recorded positions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

from . import align
from .align import Alignment, TableExtract, ValueKind, classify_value, match_values
from .corpus import Corpus, PairedExample, Table
from .text import detokenize, token_spans, tokenize

TITLE_ROW = align.TITLE_ROW

# Section separator used in assembled generator inputs.
SEPARATOR = "<sep>"

# Slot markers embedded in template text use private-use sentinels so they
# can never collide with report content.
_SLOT_OPEN = ""
_SLOT_CLOSE = ""
_SLOT_RE = re.compile(f"{_SLOT_OPEN}(\\d+){_SLOT_CLOSE}")

# Slot fill for positions missing from the test table.
NA_TOKEN = "[N/A]"

# Token confidences stay in (0, 1] so entropy stays well-defined downstream.
MIN_CONFIDENCE = 0.05


class GeneratorError(RuntimeError):
    """Raised when a generator fails or violates its output contract."""


@dataclass(frozen=True)
class GenerationResult:
    text: str
    token_confidences: tuple[float, ...]

    def __post_init__(self) -> None:
        n_tokens = len(tokenize(self.text))
        if len(self.token_confidences) != n_tokens:
            raise ValueError(
                f"got {len(self.token_confidences)} confidences "
                f"for {n_tokens} tokens"
            )
        if any(not 0 <= c <= 1 for c in self.token_confidences):
            raise ValueError("token confidences must lie in [0, 1]")


def _longest_common_substring(s1: str, s2: str) -> tuple[int, int, int]:
    """(start1, start2, length) of the longest common substring.

    Ties among equal-length substrings break toward the leftmost
    occurrence in s1, then in s2.
    """
    best = (0, 0, 0)
    prev = [0] * (len(s2) + 1)
    for i in range(1, len(s1) + 1):
        cur = [0] * (len(s2) + 1)
        c1 = s1[i - 1]
        for j in range(1, len(s2) + 1):
            if c1 == s2[j - 1]:
                length = prev[j - 1] + 1
                cur[j] = length
                if length > best[2]:
                    best = (i - length, j - length, length)
        prev = cur
    return best


def matching_characters(s1: str, s2: str) -> int:
    """Characters matched by recursive longest-common-substring splitting."""
    i, j, length = _longest_common_substring(s1, s2)
    if length == 0:
        return 0
    return (
        length
        + matching_characters(s1[:i], s2[:j])
        + matching_characters(s1[i + length:], s2[j + length:])
    )


def ro_similarity(s1: str, s2: str) -> float:
    """Similarity ratio 2*K/(|s1|+|s2|); 1.0 when both strings are empty.

    The recursive matching is direction-dependent when tie-breaks interact,
    so the arguments are ordered canonically first; that makes the ratio
    symmetric, which callers (template selection, value repair) rely on.
    """
    total = len(s1) + len(s2)
    if total == 0:
        return 1.0
    a, b = sorted((s1, s2))
    return 2 * matching_characters(a, b) / total


@dataclass(frozen=True)
class TemplateSlot:
    table: int
    row: int      # TITLE_ROW marks a slot filled from the title/table_id
    column: int   # for title slots: token index in the title, -1 = table_id
    token_index: int  # index within the source cell's token sequence
    kind: ValueKind


@dataclass(frozen=True)
class Template:
    source_example_id: str
    title_key: str
    text: str
    slot_sources: tuple[TemplateSlot, ...]

    def __post_init__(self) -> None:
        markers = _SLOT_RE.findall(self.text)
        if len(markers) != len(self.slot_sources):
            raise ValueError("slot marker count must equal slot_sources length")


def _slot_for_value(tables: Sequence[Table], value: align.TypedValue) -> TemplateSlot:
    t, r, c = value.source
    if r == TITLE_ROW:
        title_tokens = tables[t].title_tokens()
        if value.surface in title_tokens:
            return TemplateSlot(t, TITLE_ROW, title_tokens.index(value.surface), 0, value.kind)
        return TemplateSlot(t, TITLE_ROW, -1, 0, value.kind)
    cell_tokens = tables[t].rows[r][c].tokens()
    return TemplateSlot(t, r, c, cell_tokens.index(value.surface), value.kind)


def build_template(example: PairedExample, alignment: Alignment) -> Template:
    """Turn one train example into a template with typed positional slots."""
    spans = token_spans(example.report)
    pieces: list[str] = []
    slots: list[TemplateSlot] = []
    cursor = 0
    for k, (value, pos) in enumerate(
        zip(alignment.extract.values, alignment.report_positions)
    ):
        _, start, end = spans[pos]
        pieces.append(example.report[cursor:start])
        pieces.append(f"{_SLOT_OPEN}{k}{_SLOT_CLOSE}")
        slots.append(_slot_for_value(example.tables, value))
        cursor = end
    pieces.append(example.report[cursor:])
    return Template(
        source_example_id=example.id,
        title_key=example.tables[0].title,
        text="".join(pieces),
        slot_sources=tuple(slots),
    )


def build_templates(
    corpus: Corpus, stoplist: frozenset[str] = align.DEFAULT_STOPLIST
) -> list[Template]:
    """One template per train example."""
    return [
        build_template(ex, match_values(ex.tables, ex.report, stoplist))
        for ex in corpus.train()
    ]


def select_template(table: Table, templates: Sequence[Template]) -> Template:
    """Template with the most similar title; earlier template wins ties."""
    if not templates:
        raise ValueError("templates must be nonempty")
    best = templates[0]
    best_score = ro_similarity(table.title, best.title_key)
    for template in templates[1:]:
        score = ro_similarity(table.title, template.title_key)
        if score > best_score:
            best, best_score = template, score
    return best


def _slot_fill(slot: TemplateSlot, tables: Sequence[Table]) -> str:
    if slot.table >= len(tables):
        return NA_TOKEN
    table = tables[slot.table]
    if slot.row == TITLE_ROW:
        if slot.column == -1:
            return table.table_id
        title_tokens = table.title_tokens()
        if slot.column < len(title_tokens):
            return title_tokens[slot.column]
        return NA_TOKEN
    if slot.row >= table.n_rows or slot.column >= len(table.columns):
        return NA_TOKEN
    cell_tokens = table.rows[slot.row][slot.column].tokens()
    if slot.token_index < len(cell_tokens):
        return cell_tokens[slot.token_index]
    return NA_TOKEN


def fill_template(
    template: Template, table: Table | Sequence[Table]
) -> GenerationResult:
    """Fill slots with the table's values at the recorded positions.

    Out-of-range positions fill with the [N/A] marker.  Filled tokens carry
    the title-similarity confidence (halved when the filled value's kind
    does not match the slot's kind); fixed template tokens carry 1.0.
    """
    tables: Sequence[Table] = [table] if isinstance(table, Table) else list(table)
    base = max(MIN_CONFIDENCE, ro_similarity(tables[0].title, template.title_key))

    pieces: list[str] = []
    fill_spans: list[tuple[int, int, float]] = []
    cursor = 0
    length = 0
    for m in _SLOT_RE.finditer(template.text):
        slot = template.slot_sources[int(m.group(1))]
        fill = _slot_fill(slot, tables)
        confidence = base
        if fill == NA_TOKEN or classify_value(fill) is not slot.kind:
            confidence = max(MIN_CONFIDENCE, base / 2)
        fixed = template.text[cursor:m.start()]
        pieces.append(fixed)
        length += len(fixed)
        pieces.append(fill)
        fill_spans.append((length, length + len(fill), confidence))
        length += len(fill)
        cursor = m.end()
    pieces.append(template.text[cursor:])
    text = "".join(pieces)

    confidences: list[float] = []
    for _, start, end in token_spans(text):
        conf = 1.0
        for span_start, span_end, span_conf in fill_spans:
            if start < span_end and end > span_start:
                conf = span_conf
                break
        confidences.append(conf)
    return GenerationResult(text, tuple(confidences))


def assemble_generator_input(
    extracts: Sequence[TableExtract], tables: Sequence[Table]
) -> list[str]:
    """Titles of all tables ++ extract values ++ last rows of each table.

    The three sections are joined with a separator token; each table
    contributes its last min(3, rows) rows, flattened.
    """
    if len(extracts) != len(tables):
        raise ValueError("extracts and tables must be parallel")
    from .preprocess import row_tokens  # deferred: preprocess imports align

    titles: list[str] = []
    for table in tables:
        titles.extend(table.title_tokens())
    extract_tokens: list[str] = []
    for extract in extracts:
        extract_tokens.extend(extract.surfaces())
    tail: list[str] = []
    for table in tables:
        for r in range(max(0, table.n_rows - 3), table.n_rows):
            tail.extend(token for token, _ in row_tokens(table, r))
    return titles + [SEPARATOR] + extract_tokens + [SEPARATOR] + tail


def split_sections(input_tokens: Sequence[str]) -> list[list[str]]:
    """Inverse of assemble_generator_input's section joins."""
    sections: list[list[str]] = [[]]
    for token in input_tokens:
        if token == SEPARATOR:
            sections.append([])
        else:
            sections[-1].append(token)
    return sections


class Generator(Protocol):
    """Contract for pluggable text generators."""

    name: str

    def run(self, input_tokens: Sequence[str]) -> GenerationResult: ...


_REGISTRY: dict[str, Generator] = {}


def register_generator(generator: Generator) -> None:
    _REGISTRY[generator.name] = generator


def get_generator(name: str) -> Generator:
    if name not in _REGISTRY:
        raise GeneratorError(f"no generator registered under {name!r}")
    return _REGISTRY[name]


def generate(
    input_tokens: Sequence[str],
    generator: Generator | str,
    sample_id: Optional[str] = None,
) -> GenerationResult:
    """Run a generator (instance or registered name) on assembled input."""
    if isinstance(generator, str):
        generator = get_generator(generator)
    try:
        result = generator.run(input_tokens)
    except GeneratorError:
        raise
    except Exception as err:
        context = f" for sample {sample_id!r}" if sample_id else ""
        raise GeneratorError(f"generator {generator.name!r} failed{context}: {err}") from err
    if not isinstance(result, GenerationResult):
        context = f" for sample {sample_id!r}" if sample_id else ""
        raise GeneratorError(f"generator {generator.name!r} returned a non-result{context}")
    return result


def _title_key(tokens: Sequence[str]) -> str:
    return detokenize(list(tokens))


class TemplateGenerator:
    """Built-in deterministic baseline backed by training templates."""

    name = "template"

    def __init__(self, templates: Sequence[Template], tables_by_title: dict[str, Sequence[Table]]):
        self.templates = list(templates)
        self.tables_by_title = dict(tables_by_title)

    @classmethod
    def from_corpus(
        cls, corpus: Corpus, stoplist: frozenset[str] = align.DEFAULT_STOPLIST
    ) -> "TemplateGenerator":
        index: dict[str, Sequence[Table]] = {}
        for ex in corpus.examples:
            tokens: list[str] = []
            for table in ex.tables:
                tokens.extend(table.title_tokens())
            index.setdefault(_title_key(tokens), ex.tables)
        return cls(build_templates(corpus, stoplist), index)

    def run(self, input_tokens: Sequence[str]) -> GenerationResult:
        sections = split_sections(input_tokens)
        key = _title_key(sections[0])
        tables = self.tables_by_title.get(key)
        if tables is None:
            raise GeneratorError(f"unknown table title {key!r}")
        return self.for_tables(tables)

    def for_tables(self, tables: Sequence[Table]) -> GenerationResult:
        template = select_template(tables[0], self.templates)
        return fill_template(template, tables)


class HttpGenerator:
    """Adapter calling an external generator over HTTP.

    POSTs {"input_tokens": [...]} and expects {"text", "token_confidences"}.
    """

    def __init__(self, name: str, endpoint: str, client=None):
        self.name = name
        self.endpoint = endpoint
        self._client = client

    def run(self, input_tokens: Sequence[str]) -> GenerationResult:
        import httpx

        client = self._client or httpx
        response = client.post(
            self.endpoint, json={"input_tokens": list(input_tokens)}, timeout=60.0
        )
        response.raise_for_status()
        payload = response.json()
        return GenerationResult(payload["text"], tuple(payload["token_confidences"]))
