"""Seeded sample corpora for demos and verification.

Real assay/toxicology corpora are proprietary, so the workbench ships
generators for structurally similar synthetic data: titled tables with run
ids, group labels and numeric results, paired with short reports that
mention a subset of the tabular values.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .corpus import Cell, Corpus, PairedExample, Table
from .generate import GenerationResult, GeneratorError, split_sections
from .text import detokenize, tokenize

_CONDITIONS = [
    "Hemolysis", "Lipolysis", "Specificity", "Sensitivity", "Linearity",
    "Recovery", "Stability", "Precision", "Carryover", "Dilution",
]
_DRUGS = [
    "DrugAlpha", "DrugBeta", "DrugGamma", "DrugDelta", "DrugEpsilon",
    "DrugZeta", "DrugEta", "DrugTheta",
]
_MATRICES = ["serum", "plasma", "whole blood", "urine"]


def _run_id(rng: random.Random) -> str:
    return f"Run{rng.choice('ABCDEFGH')}{rng.randint(10, 99)}"


def _level(rng: random.Random) -> str:
    return str(rng.choice([100, 250, 300, 500, 750, 1000]) + rng.randint(0, 9))


def _ratio(rng: random.Random) -> str:
    return f"{rng.randint(0, 1)}.{rng.randint(10, 99)}"


def make_assay_example(index: int, rng: random.Random, split: str) -> PairedExample:
    """One table-report pair with run ids, levels and recovery ratios."""
    condition = _CONDITIONS[index % len(_CONDITIONS)]
    drug = _DRUGS[index % len(_DRUGS)]
    matrix = rng.choice(_MATRICES)
    table_id = f"Table{index + 1}{rng.choice('ABC')}"
    n_rows = rng.randint(3, 8)
    rows = []
    for r in range(n_rows):
        emphasis = 1 if rng.random() < 0.15 else 0
        rows.append((
            Cell(f"Group {r + 1}"),
            Cell(_run_id(rng)),
            Cell(_level(rng), emphasis),
            Cell(_ratio(rng)),
        ))
    table = Table(
        table_id=table_id,
        title=f"{condition} of {drug} in {matrix} ( {table_id} )",
        columns=("Group", "Run", "Level", "Ratio"),
        rows=tuple(rows),
    )
    cited = rng.sample(range(n_rows), k=min(n_rows, rng.randint(2, 3)))
    sentences = [
        f"The {condition} of {drug} was evaluated in {matrix} as presented in {table_id} ."
    ]
    for r in sorted(cited):
        group, run, level, ratio = (c.text for c in rows[r])
        sentences.append(
            f"In run {run} the {group.lower()} sample at {level} ng/mL "
            f"gave a ratio of {ratio} ."
        )
    return PairedExample(
        id=f"avr-{index:04d}",
        tables=(table,),
        report=" ".join(sentences),
        split=split,
    )


def make_assay_corpus(
    n_examples: int = 100, seed: int = 7, test_fraction: float = 0.2
) -> Corpus:
    """Assay-style corpus with deterministic content for a given seed."""
    rng = random.Random(seed)
    n_test = round(test_fraction * n_examples)
    examples = [
        make_assay_example(i, rng, "test" if i < n_test else "train")
        for i in range(n_examples)
    ]
    return Corpus(examples, provenance={"source": f"sample-assay-{seed}"})


def make_tox_example(index: int, rng: random.Random, split: str) -> PairedExample:
    """Toxicology-style pair: per-group body-weight means in bullets."""
    drug = _DRUGS[index % len(_DRUGS)]
    table_id = f"Table{index + 1}"
    doses = sorted(rng.sample([0, 10, 30, 100, 300, 1000], k=3))
    rows = tuple(
        (Cell(f"Group {g + 1}"), Cell(str(dose)), Cell(_ratio(rng)))
        for g, dose in enumerate(doses)
    )
    table = Table(
        table_id=table_id,
        title=f"Body weight changes for {drug}",
        columns=("Group", "Dose", "Change"),
        rows=rows,
    )
    g = rng.randrange(len(doses))
    change = rows[g][2].text
    report = (
        f"{drug} at {doses[g]} mg/kg : mean body weight change of {change} "
        f"noted in group {g + 1} ( {table_id} ) ."
    )
    return PairedExample(f"tox-{index:04d}", (table,), report, split)


def make_tox_corpus(n_train: int = 43, n_test: int = 0, seed: int = 11) -> Corpus:
    rng = random.Random(seed)
    examples = [
        make_tox_example(i, rng, "train" if i < n_train else "test")
        for i in range(n_train + n_test)
    ]
    return Corpus(examples, provenance={"source": f"sample-tox-{seed}"})


# --- planted systematic errors for corrector / HIL experiments ---

@dataclass(frozen=True)
class PlantedError:
    correct: str
    wrong: str


# Wrong surfaces are deliberately dissimilar to every table token so only a
# learned rule (not nearest-value repair) can fix them.
DEFAULT_PLANTED_ERRORS = (
    PlantedError("DrugAlpha", "Bluewash"),
    PlantedError("DrugBeta", "Graywash"),
    PlantedError("DrugGamma", "Pinkwash"),
    PlantedError("Hemolysis", "Quartz"),
    PlantedError("Lipolysis", "Breeze"),
    PlantedError("Specificity", "Tundra"),
    PlantedError("Sensitivity", "Falcon"),
    PlantedError("Linearity", "Marble"),
    PlantedError("Recovery", "Cinder"),
    PlantedError("Stability", "Vortex"),
    PlantedError("Precision", "Meadow"),
    PlantedError("Carryover", "Onyx"),
    PlantedError("Dilution", "Zephyr"),
)


class PlantedErrorGenerator:
    """Generator that reproduces each reference with systematic value errors.

    Samples listed for an error emit the wrong surface in place of the
    correct one, with low confidence on the wrong tokens so uncertainty
    sampling has signal.  Lookup is by the title section of the assembled
    input.
    """

    name = "planted-error"

    def __init__(
        self,
        corpus: Corpus,
        affected: dict[str, Sequence[PlantedError]],
        error_confidence: float = 0.4,
    ):
        self.affected = {k: tuple(v) for k, v in affected.items()}
        self.error_confidence = error_confidence
        self._by_title: dict[str, PairedExample] = {}
        for ex in corpus.examples:
            tokens: list[str] = []
            for table in ex.tables:
                tokens.extend(table.title_tokens())
            self._by_title[detokenize(tokens)] = ex

    def run(self, input_tokens: Sequence[str]) -> GenerationResult:
        key = detokenize(list(split_sections(input_tokens)[0]))
        example = self._by_title.get(key)
        if example is None:
            raise GeneratorError(f"unknown table title {key!r}")
        return self.for_example(example)

    def for_example(self, example: PairedExample) -> GenerationResult:
        text = example.report
        wrong_surfaces = set()
        for error in self.affected.get(example.id, ()):
            text = text.replace(error.correct, error.wrong)
            wrong_surfaces.add(error.wrong)
        confidences = tuple(
            self.error_confidence if token in wrong_surfaces else 1.0
            for token in tokenize(text)
        )
        return GenerationResult(text, confidences)


def make_planted_error_setup(
    n_train: int = 30,
    n_test: int = 15,
    seed: int = 23,
    errors: Sequence[PlantedError] = DEFAULT_PLANTED_ERRORS,
    affected_train: int = 12,
    affected_test: int = 9,
) -> tuple[Corpus, PlantedErrorGenerator]:
    """Corpus plus generator with systematic errors on a minority of samples.

    Drug and condition names appear in both the report and the table, so
    the planted wrong surfaces are absent from the tables and correctable
    once the matching rule is learned.  The default affected_train covers
    every error type that can appear in the test split.
    """
    rng = random.Random(seed)
    drug_errors = [e for e in errors if e.correct in _DRUGS] or list(errors)
    examples: list[PairedExample] = []
    for i in range(n_train + n_test):
        split = "train" if i < n_train else "test"
        if i % 3 == 0:
            drug = drug_errors[(i // 3) % len(drug_errors)].correct
        else:
            drug = _DRUGS[3 + i % (len(_DRUGS) - 3)]
        condition = _CONDITIONS[i % len(_CONDITIONS)]
        table_id = f"Table{i + 1}"
        rows = tuple(
            (Cell(f"Group {r + 1}"), Cell(drug), Cell(_level(rng)))
            for r in range(3)
        )
        table = Table(
            table_id=table_id,
            title=f"{condition} study {i + 1} of {drug}",
            columns=("Group", "Compound", "Level"),
            rows=rows,
        )
        level = rows[0][2].text
        report = (
            f"{condition} of {drug} : no effect at {level} ng/mL "
            f"( {table_id} ) ."
        )
        examples.append(PairedExample(f"pe-{i:04d}", (table,), report, split))
    corpus = Corpus(examples, provenance={"source": f"sample-planted-{seed}"})

    affected: dict[str, list[PlantedError]] = {}
    train_with_drug = [
        ex for ex in corpus.train()
        if any(e.correct in ex.report for e in errors)
    ][:affected_train]
    for ex in train_with_drug:
        affected[ex.id] = [e for e in errors if e.correct in ex.report]
    test_with_drug = [
        ex for ex in corpus.test()
        if any(e.correct in ex.report for e in errors)
    ][:affected_test]
    for ex in test_with_drug:
        affected[ex.id] = [e for e in errors if e.correct in ex.report]
    return corpus, PlantedErrorGenerator(corpus, affected)
