#!/usr/bin/env python3
"""Review service walkthrough: corpus upload, run creation, claim, annotate.

Drives the service object directly; `forge serve --store DIR` exposes the
same operations over HTTP for the review UI.
"""

import tempfile

from tableforge.corpus import example_to_dict
from tableforge.sampledata import make_assay_corpus
from tableforge.service import ReviewService

with tempfile.TemporaryDirectory() as store:
    service = ReviewService(store)
    corpus = make_assay_corpus(20, seed=4)
    corpus_id = service.add_corpus(
        [example_to_dict(ex) for ex in corpus.examples], "demo-corpus"
    )
    print("corpus:", corpus_id)

    run_id = service.create_run(corpus_id, "uncertainty", fraction=0.25, seed=1)
    print("run:   ", run_id, service.run_info(run_id)["tasks"])

    task = service.next_task(run_id)
    print("\nclaimed task", task.task_id, "for sample", task.sample_id)
    print("draft:", task.draft[:100], "...")

    corrected = task.draft.replace("ng/mL", "ng/mL", 1)  # reviewer kept it as-is
    service.submit_annotation(task.task_id, corrected)
    print("submitted annotation; task status:", service.get_task(task.task_id).status)

    report = service.run_metrics(run_id)
    print("\ntest-split metrics with the current memory:")
    for name, value in report.to_dict().items():
        print(f"  {name:>12}: {value:.4f}")

    replayed = ReviewService(store)
    print("\nevent-log replay reproduces", len(replayed.tasks), "task(s)")
