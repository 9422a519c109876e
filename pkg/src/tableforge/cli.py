"""forge: command-line front end over the library.

Subcommands mirror the pipeline stages: ingest, pair, split, preprocess,
extract, synth, generate, evaluate, correct, hil sweep, serve.  Corpora are
JSONL files in the corpus line schema; results print as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _write_corpus_or_print(corpus, out: str | None) -> None:
    from .corpus import example_to_dict, write_corpus

    if out:
        write_corpus(corpus, out)
        print(json.dumps({"written": out, "examples": len(corpus.examples)}))
    else:
        for ex in corpus.examples:
            print(json.dumps(example_to_dict(ex), ensure_ascii=False))


def cmd_ingest(args) -> int:
    from .corpus import ingest_corpus

    corpus = ingest_corpus(args.path)
    splits = {"train": len(corpus.train()), "test": len(corpus.test())}
    print(json.dumps({"examples": len(corpus.examples), **splits}))
    return 0


def cmd_pair(args) -> int:
    from .corpus import Corpus, pair_tables_to_paragraphs, table_from_dict

    with open(args.tables_path, encoding="utf-8") as fh:
        tables = [
            table_from_dict(json.loads(line), f"line {i}")
            for i, line in enumerate(fh, start=1) if line.strip()
        ]
    paragraphs = [
        p.strip() for p in Path(args.text_path).read_text(encoding="utf-8").split("\n\n")
        if p.strip()
    ]
    examples = pair_tables_to_paragraphs(tables, paragraphs)
    _write_corpus_or_print(Corpus(examples), args.out)
    return 0


def cmd_split(args) -> int:
    from .corpus import ingest_corpus, split_corpus

    corpus = split_corpus(ingest_corpus(args.corpus), args.seed, args.test_fraction)
    _write_corpus_or_print(corpus, args.out)
    return 0


def cmd_preprocess(args) -> int:
    from .corpus import ingest_corpus
    from .preprocess import (
        AggregateRule,
        FlattenLimits,
        apply_aggregate_rules,
        dedup_consecutive,
        flatten_table,
        propagate_markup,
    )

    rules = []
    if args.rules:
        for obj in json.loads(Path(args.rules).read_text(encoding="utf-8")):
            rules.append(AggregateRule(obj["kind"], obj.get("parameters", {})))
    limits = FlattenLimits(args.max_rows, args.max_tokens_per_row)
    corpus = ingest_corpus(args.corpus)
    for ex in corpus.examples:
        for table in ex.tables:
            table = propagate_markup(apply_aggregate_rules(table, rules))
            flat = dedup_consecutive(flatten_table(table, limits))
            print(json.dumps(
                {"id": ex.id, "table_id": table.table_id, "tokens": list(flat.tokens)},
                ensure_ascii=False,
            ))
    return 0


def cmd_extract(args) -> int:
    from .align import match_values
    from .corpus import ingest_corpus

    corpus = ingest_corpus(args.corpus)
    for ex in corpus.examples:
        alignment = match_values(ex.tables, ex.report)
        print(json.dumps({
            "id": ex.id,
            "extract": [
                {"surface": v.surface, "kind": v.kind.value,
                 "source": list(v.source) if v.source else None}
                for v in alignment.extract.values
            ],
            "positions": list(alignment.report_positions),
        }, ensure_ascii=False))
    return 0


def cmd_synth(args) -> int:
    from .corpus import ingest_corpus
    from .synth import SynthConfig, generate_synthetic_corpus

    config = SynthConfig(
        per_example=args.per_example,
        seed=args.seed,
        jitter_relative_bound=args.jitter_bound,
    )
    corpus = generate_synthetic_corpus(ingest_corpus(args.corpus), config)
    _write_corpus_or_print(corpus, args.out)
    return 0


def cmd_generate(args) -> int:
    from .corpus import ingest_corpus
    from .generate import HttpGenerator, TemplateGenerator, generate
    from .hil import HilSession

    corpus = ingest_corpus(args.corpus)
    if args.generator == "template":
        generator = TemplateGenerator.from_corpus(corpus)
    else:
        if not args.endpoint:
            print("--endpoint is required for non-template generators", file=sys.stderr)
            return 2
        generator = HttpGenerator(args.generator, args.endpoint)
    session = HilSession(corpus, generator)
    examples = corpus.test() or corpus.examples
    for ex in examples:
        result = session.draft(ex)
        print(json.dumps({
            "id": ex.id,
            "text": result.text,
            "token_confidences": list(result.token_confidences),
        }, ensure_ascii=False))
    return 0


def _read_hypotheses(path: str) -> dict[str, str]:
    hyps = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                hyps[obj["id"]] = obj["text"]
    return hyps


def cmd_evaluate(args) -> int:
    from .align import match_values
    from .corpus import ingest_corpus
    from .metrics import evaluate_corpus

    corpus = ingest_corpus(args.corpus)
    hyps = _read_hypotheses(args.hyp)
    pairs = []
    for ex in corpus.examples:
        if ex.id in hyps:
            extract = match_values(ex.tables, ex.report).extract
            pairs.append((hyps[ex.id], ex, extract))
    if not pairs:
        print("no hypothesis ids match the corpus", file=sys.stderr)
        return 2
    print(json.dumps(evaluate_corpus(pairs).to_dict()))
    return 0


def cmd_correct(args) -> int:
    from .autocorrect import CorrectionMemory, correct_values, load_memory
    from .corpus import ingest_corpus

    corpus = ingest_corpus(args.corpus)
    memory = load_memory(args.memory) if args.memory else CorrectionMemory()
    hyps = _read_hypotheses(args.hyp)
    for ex in corpus.examples:
        if ex.id not in hyps:
            continue
        result = correct_values(hyps[ex.id], ex.tables, memory)
        print(json.dumps({
            "id": ex.id,
            "text": result.text,
            "edits": [
                {"token_index": e.token_index, "from": e.from_surface,
                 "to": e.to_surface, "reason": e.reason.value}
                for e in result.edits
            ],
        }, ensure_ascii=False))
    return 0


def cmd_hil_sweep(args) -> int:
    from .corpus import ingest_corpus
    from .hil import SelectionStrategy, oracle_annotator, sweep_fractions

    if not args.simulate_annotator:
        print("only --simulate-annotator runs are supported offline; "
              "use `forge serve` for live annotation", file=sys.stderr)
        return 2
    corpus = ingest_corpus(args.corpus)
    fractions = [float(f) for f in args.fractions.split(",")]
    run = sweep_fractions(
        corpus,
        SelectionStrategy(args.strategy),
        fractions,
        args.seed,
        oracle_annotator,
        cumulative=not args.independent,
    )
    header = f"{'fraction':>8}  {'recall':>7}  {'rouge1':>7}  {'bleu':>7}"
    print(header)
    for fraction, report in run.stage_metrics:
        print(f"{fraction:>8.2f}  {report.table_recall:>7.4f}  "
              f"{report.rouge1:>7.4f}  {report.bleu:>7.2f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ReviewService, create_app

    app = create_app(ReviewService(args.store))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize a corpus file")
    p.add_argument("path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pair", help="pair tables with describing paragraphs")
    p.add_argument("tables_path")
    p.add_argument("text_path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("split", help="assign train/test split labels")
    p.add_argument("corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("preprocess", help="flatten tables to token sequences")
    p.add_argument("corpus")
    p.add_argument("--max-rows", type=int, required=True)
    p.add_argument("--max-tokens-per-row", type=int, required=True)
    p.add_argument("--rules", help="JSON file of aggregate rules")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("extract", help="emit value alignments per example")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("synth", help="generate synthetic training pairs")
    p.add_argument("corpus")
    p.add_argument("--per-example", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter-bound", type=float, default=0.1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("generate", help="generate reports for a corpus")
    p.add_argument("corpus")
    p.add_argument("--generator", default="template")
    p.add_argument("--endpoint")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score hypotheses against a corpus")
    p.add_argument("--hyp", required=True)
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("correct", help="autocorrect hypotheses against tables")
    p.add_argument("--memory")
    p.add_argument("--corpus", required=True)
    p.add_argument("--hyp", required=True)
    p.set_defaults(func=cmd_correct)

    hil = sub.add_parser("hil", help="human-in-the-loop protocols")
    hil_sub = hil.add_subparsers(dest="hil_command", required=True)
    p = hil_sub.add_parser("sweep", help="run staged annotation-budget sweeps")
    p.add_argument("corpus")
    p.add_argument("--strategy", choices=["random", "uncertainty", "oracle"],
                   required=True)
    p.add_argument("--fractions", default="0,0.2,0.4,0.5,0.6,0.8,1.0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--simulate-annotator", action="store_true")
    p.add_argument("--independent", action="store_true")
    p.set_defaults(func=cmd_hil_sweep)

    p = sub.add_parser("serve", help="run the review HTTP service")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
