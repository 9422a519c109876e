"""Human-in-the-loop orchestration: sample selection, correction learning,
and staged sweeps over annotation budgets.

Each stage selects unannotated train samples by strategy (random /
uncertainty / oracle), collects corrected texts, learns substitution rules
into the correction memory, and re-evaluates the held-out test split with
the corrector applied.  Drafts for annotation come from the two-step
generation path without the corrector.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

from . import align
from .align import match_values
from .autocorrect import CorrectionMemory, MemoryRule, apply_memory, correct_values, learn_corrections
from .corpus import Corpus, PairedExample
from .generate import (
    GenerationResult,
    Generator,
    TemplateGenerator,
    assemble_generator_input,
    generate,
)
from .metrics import MetricReport, evaluate_corpus, table_recall


class SelectionStrategy(str, Enum):
    RANDOM = "random"
    UNCERTAINTY = "uncertainty"
    ORACLE = "oracle"


FIGURE_FRACTIONS = (0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0)

# An annotator maps (sample, draft text) to a corrected text.
Annotator = Callable[[PairedExample, str], str]


def oracle_annotator(sample: PairedExample, draft: str) -> str:
    """Scripted annotator that returns the reference report."""
    return sample.report


@dataclass(frozen=True)
class PoolItem:
    sample: PairedExample
    result: GenerationResult
    target: Optional[str] = None


@dataclass
class HilRun:
    run_id: str
    corpus_ref: str
    strategy: SelectionStrategy
    fraction: float
    seed: int
    stage_metrics: list[tuple[float, MetricReport]] = field(default_factory=list)
    memory: CorrectionMemory = field(default_factory=CorrectionMemory)


def sample_entropy(result: GenerationResult) -> float:
    """Mean binary entropy of the per-token confidences.

    Confidence 1.0 contributes zero; confidence 0 is invalid generator
    output and raises.
    """
    if not result.token_confidences:
        return 0.0
    total = 0.0
    for p in result.token_confidences:
        if p <= 0:
            raise ValueError(f"invalid token confidence {p}")
        if p >= 1:
            continue
        total += -(p * math.log(p) + (1 - p) * math.log(1 - p))
    return total / len(result.token_confidences)


def _oracle_recall(item: PoolItem, stoplist: frozenset[str]) -> float:
    alignment = match_values(item.sample.tables, item.target, stoplist)
    return table_recall(alignment.extract, item.result.text)


def select_count(
    pool: Sequence[PoolItem],
    strategy: SelectionStrategy,
    count: int,
    seed: int,
    stoplist: frozenset[str] = align.DEFAULT_STOPLIST,
) -> list[PoolItem]:
    """Exactly ``count`` pool items by strategy; order-invariant for
    uncertainty and oracle, seed-deterministic for random."""
    if count < 0 or count > len(pool):
        raise ValueError(f"count {count} out of range for pool of {len(pool)}")
    ordered = sorted(pool, key=lambda item: item.sample.id)
    if strategy is SelectionStrategy.RANDOM:
        return random.Random(seed).sample(ordered, count)
    if strategy is SelectionStrategy.UNCERTAINTY:
        ordered.sort(key=lambda item: (-sample_entropy(item.result), item.sample.id))
        return ordered[:count]
    if strategy is SelectionStrategy.ORACLE:
        if any(item.target is None for item in pool):
            raise ValueError("oracle selection requires targets for all pool items")
        ordered.sort(
            key=lambda item: (_oracle_recall(item, stoplist), item.sample.id)
        )
        return ordered[:count]
    raise ValueError(f"unknown strategy {strategy!r}")


def select_samples(
    pool: Sequence[PoolItem],
    strategy: SelectionStrategy,
    fraction: float,
    seed: int,
    stoplist: frozenset[str] = align.DEFAULT_STOPLIST,
) -> list[PoolItem]:
    """round(fraction * N) pool items by strategy."""
    if not 0 <= fraction <= 1:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    return select_count(pool, strategy, round(fraction * len(pool)), seed, stoplist)


class HilSession:
    """State shared across the stages of one human-in-the-loop run."""

    def __init__(
        self,
        corpus: Corpus,
        generator: Generator | None = None,
        stoplist: frozenset[str] = align.DEFAULT_STOPLIST,
    ):
        self.corpus = corpus
        self.stoplist = stoplist
        self.generator = generator or TemplateGenerator.from_corpus(corpus, stoplist)
        self.memory = CorrectionMemory()
        self._drafts: dict[str, GenerationResult] = {}
        self._extracts = {
            ex.id: match_values(ex.tables, ex.report, stoplist).extract
            for ex in corpus.examples
        }

    def draft(self, example: PairedExample) -> GenerationResult:
        """Two-step generation without the corrector, cached per sample."""
        if example.id not in self._drafts:
            extract = self._extracts[example.id]
            input_tokens = assemble_generator_input(
                [extract] + [align.TableExtract(())] * (len(example.tables) - 1),
                example.tables,
            )
            self._drafts[example.id] = generate(
                input_tokens, self.generator, sample_id=example.id
            )
        return self._drafts[example.id]

    def pool(self) -> list[PoolItem]:
        return [
            PoolItem(ex, self.draft(ex), target=ex.report)
            for ex in self.corpus.train()
        ]

    def corrected_test_outputs(self) -> list[tuple[str, PairedExample, align.TableExtract]]:
        outputs = []
        for ex in self.corpus.test():
            draft = self.draft(ex)
            corrected = correct_values(draft, ex.tables, self.memory)
            outputs.append((corrected.text, ex, self._extracts[ex.id]))
        return outputs

    def evaluate(self) -> MetricReport:
        return evaluate_corpus(self.corrected_test_outputs())


def run_hil_stage(
    session: HilSession,
    annotations: Sequence[tuple[str, str]],
) -> tuple[list[MemoryRule], MetricReport]:
    """Learn rules from (sample id, corrected text) annotations, merge them
    into the session memory, and re-evaluate the test split."""
    known = {ex.id for ex in session.corpus.examples}
    delta: list[MemoryRule] = []
    for sample_id, corrected in annotations:
        if sample_id not in known:
            raise KeyError(f"annotation for unknown sample {sample_id!r}")
        draft = session.draft(session.corpus.by_id(sample_id))
        delta.extend(learn_corrections(draft.text, corrected))
    session.memory = apply_memory(session.memory, delta)
    return delta, session.evaluate()


def sweep_fractions(
    corpus: Corpus,
    strategy: SelectionStrategy,
    fractions: Sequence[float],
    seed: int,
    annotator: Annotator,
    generator: Generator | None = None,
    cumulative: bool = True,
    stoplist: frozenset[str] = align.DEFAULT_STOPLIST,
    run_id: str = "sweep",
) -> HilRun:
    """Run annotation stages over increasing budget fractions.

    Cumulative mode (default) grows one annotated set, each stage selecting
    from the not-yet-annotated remainder; independent mode re-selects from
    the full pool and learns each stage's memory from scratch.
    """
    fractions = list(fractions)
    if fractions != sorted(fractions):
        raise ValueError("fractions must be ascending")
    if not fractions or fractions[0] != 0:
        raise ValueError("fractions must start at 0")

    session = HilSession(corpus, generator, stoplist)
    run = HilRun(run_id, str(corpus.provenance.get("source", "")),
                 strategy, fractions[-1], seed)
    pool = session.pool()
    n = len(pool)
    annotated: set[str] = set()

    for stage, fraction in enumerate(fractions):
        target_count = round(fraction * n)
        if cumulative:
            remaining = [p for p in pool if p.sample.id not in annotated]
            need = max(0, target_count - len(annotated))
            selected = select_count(
                remaining, strategy, need, seed + stage, stoplist
            )
        else:
            session.memory = CorrectionMemory()
            selected = select_count(pool, strategy, target_count, seed + stage, stoplist)
        annotations = [
            (item.sample.id, annotator(item.sample, item.result.text))
            for item in selected
        ]
        annotated.update(item.sample.id for item in selected)
        _, report = run_hil_stage(session, annotations)
        run.stage_metrics.append((fraction, report))
    run.memory = session.memory
    return run
