"""tableforge: a workbench for table-to-text report pipelines.

Corpus handling, table preprocessing, value alignment, synthetic data
generation, a template generation baseline, evaluation metrics, draft
autocorrection and human-in-the-loop review."""

from .align import (
    Alignment,
    TableExtract,
    TypedValue,
    ValueKind,
    classify_value,
    difficulty_score,
    match_values,
    select_curriculum,
)
from .autocorrect import (
    CorrectionMemory,
    CorrectionResult,
    MemoryRule,
    apply_memory,
    correct_values,
    learn_corrections,
)
from .corpus import (
    Cell,
    Corpus,
    CorpusError,
    PairedExample,
    Table,
    ingest_corpus,
    pair_tables_to_paragraphs,
    split_corpus,
    write_corpus,
)
from .generate import (
    GenerationResult,
    Template,
    TemplateGenerator,
    assemble_generator_input,
    build_templates,
    fill_template,
    generate,
    ro_similarity,
    select_template,
)
from .hil import (
    HilRun,
    SelectionStrategy,
    oracle_annotator,
    sample_entropy,
    select_samples,
    sweep_fractions,
)
from .metrics import (
    MetricReport,
    RougeVariant,
    bleu,
    bleu_extract,
    evaluate_corpus,
    restore_extract,
    rouge,
    table_recall,
    ter,
)
from .preprocess import (
    AggregateRule,
    FlatTable,
    FlattenLimits,
    apply_aggregate_rules,
    calibrate_limits,
    dedup_consecutive,
    flatten_table,
    propagate_markup,
)
from .synth import (
    SlotDictionary,
    SynthConfig,
    build_slot_dictionary,
    generate_synthetic_corpus,
    jitter_numeric,
    scramble_alnum,
    synthesize_pair,
)
from .text import tokenize

__version__ = "0.1.0"
