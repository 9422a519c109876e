"""Review service: runs, claimable annotation tasks and correction memory.

State is an append-only JSONL event log; replaying the log reproduces the
in-memory state exactly.  Task claiming is serialized behind a lock and
claims expire after a lease so abandoned tasks return to the queue.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from pydantic import BaseModel

from . import align
from .align import match_values
from .autocorrect import CorrectionMemory, apply_memory, correct_values, learn_corrections
from .corpus import Corpus, PairedExample, example_from_dict, example_to_dict
from .generate import TemplateGenerator
from .hil import PoolItem, SelectionStrategy, select_samples
from .metrics import MetricReport, evaluate_corpus

DEFAULT_LEASE_SECONDS = 1800.0


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _not_found(what: str, key: str) -> ServiceError:
    return ServiceError(404, "not_found", f"{what} {key!r} not found")


@dataclass
class ReviewTask:
    task_id: str
    run_id: str
    sample_id: str
    draft: str
    status: str = "pending"  # pending -> claimed -> done
    annotation: Optional[str] = None
    created_at: float = 0.0
    claimed_at: Optional[float] = None
    completed_at: Optional[float] = None


@dataclass
class RunState:
    run_id: str
    corpus_id: str
    strategy: SelectionStrategy
    fraction: float
    seed: int
    task_ids: list[str] = field(default_factory=list)
    memory: CorrectionMemory = field(default_factory=CorrectionMemory)


class ReviewService:
    """Event-sourced orchestration of corpora, runs and review tasks."""

    def __init__(
        self,
        store_dir: str | Path,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
        clock=time.time,
    ):
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.store_dir / "events.jsonl"
        self.lease_seconds = lease_seconds
        self.clock = clock
        self._lock = threading.Lock()
        self.corpora: dict[str, Corpus] = {}
        self.runs: dict[str, RunState] = {}
        self.tasks: dict[str, ReviewTask] = {}
        if self.log_path.exists():
            with self.log_path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._apply(json.loads(line))

    # -- event machinery --

    def _append(self, event: dict) -> None:
        self._apply(event)
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False))
            fh.write("\n")

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "corpus_added":
            examples = [
                example_from_dict(obj, f"corpus {event['corpus_id']} example {i}")
                for i, obj in enumerate(event["examples"])
            ]
            self.corpora[event["corpus_id"]] = Corpus(
                examples, provenance={"source": event["corpus_id"]}
            )
        elif kind == "run_created":
            run = RunState(
                run_id=event["run_id"],
                corpus_id=event["corpus_id"],
                strategy=SelectionStrategy(event["strategy"]),
                fraction=event["fraction"],
                seed=event["seed"],
            )
            self.runs[run.run_id] = run
            for t in event["tasks"]:
                task = ReviewTask(
                    task_id=t["task_id"],
                    run_id=run.run_id,
                    sample_id=t["sample_id"],
                    draft=t["draft"],
                    created_at=event["at"],
                )
                self.tasks[task.task_id] = task
                run.task_ids.append(task.task_id)
        elif kind == "task_claimed":
            task = self.tasks[event["task_id"]]
            task.status = "claimed"
            task.claimed_at = event["at"]
        elif kind == "task_done":
            task = self.tasks[event["task_id"]]
            task.status = "done"
            task.annotation = event["annotation"]
            task.completed_at = event["at"]
            run = self.runs[task.run_id]
            run.memory = apply_memory(
                run.memory, learn_corrections(task.draft, event["annotation"])
            )
        else:
            raise ValueError(f"unknown event type {kind!r}")

    # -- operations --

    def add_corpus(self, examples: Sequence[dict], corpus_id: Optional[str] = None) -> str:
        corpus_id = corpus_id or f"corpus-{uuid.uuid4().hex[:8]}"
        if corpus_id in self.corpora:
            raise ServiceError(409, "conflict", f"corpus {corpus_id!r} already exists")
        with self._lock:
            self._append({
                "type": "corpus_added",
                "corpus_id": corpus_id,
                "examples": list(examples),
                "at": self.clock(),
            })
        return corpus_id

    def create_run(
        self,
        corpus_id: str,
        strategy: SelectionStrategy | str,
        fraction: float,
        seed: int,
    ) -> str:
        if corpus_id not in self.corpora:
            raise _not_found("corpus", corpus_id)
        strategy = SelectionStrategy(strategy)
        corpus = self.corpora[corpus_id]
        generator = TemplateGenerator.from_corpus(corpus)
        pool = [
            PoolItem(ex, generator.for_tables(ex.tables), target=ex.report)
            for ex in corpus.train()
        ]
        selected = select_samples(pool, strategy, fraction, seed)
        run_id = f"run-{uuid.uuid4().hex[:8]}"
        tasks = [
            {
                "task_id": f"task-{uuid.uuid4().hex[:8]}",
                "sample_id": item.sample.id,
                "draft": item.result.text,
            }
            for item in selected
        ]
        with self._lock:
            self._append({
                "type": "run_created",
                "run_id": run_id,
                "corpus_id": corpus_id,
                "strategy": strategy.value,
                "fraction": fraction,
                "seed": seed,
                "tasks": tasks,
                "at": self.clock(),
            })
        return run_id

    def run_info(self, run_id: str) -> dict:
        run = self.runs.get(run_id)
        if run is None:
            raise _not_found("run", run_id)
        statuses = [self.tasks[t].status for t in run.task_ids]
        return {
            "run_id": run.run_id,
            "corpus_id": run.corpus_id,
            "strategy": run.strategy.value,
            "fraction": run.fraction,
            "seed": run.seed,
            "tasks": {
                "total": len(statuses),
                "pending": statuses.count("pending"),
                "claimed": statuses.count("claimed"),
                "done": statuses.count("done"),
            },
            "memory": [
                {
                    "from": rule.from_surface,
                    "to": rule.to_surface,
                    "left": rule.left,
                    "right": rule.right,
                    "weight": rule.weight,
                }
                for rule in run.memory.rules
            ],
        }

    def _claimable(self, task: ReviewTask, now: float) -> bool:
        if task.status == "pending":
            return True
        if task.status == "claimed" and task.claimed_at is not None:
            return now - task.claimed_at > self.lease_seconds
        return False

    def next_task(self, run_id: str) -> Optional[ReviewTask]:
        """Atomically claim one pending task; None when the queue is empty."""
        run = self.runs.get(run_id)
        if run is None:
            raise _not_found("run", run_id)
        with self._lock:
            now = self.clock()
            for task_id in run.task_ids:
                task = self.tasks[task_id]
                if self._claimable(task, now):
                    self._append({"type": "task_claimed", "task_id": task_id, "at": now})
                    return task
        return None

    def get_task(self, task_id: str) -> ReviewTask:
        task = self.tasks.get(task_id)
        if task is None:
            raise _not_found("task", task_id)
        return task

    def task_view(self, task: ReviewTask) -> dict:
        example = self._task_example(task)
        return {
            "task_id": task.task_id,
            "run_id": task.run_id,
            "sample_id": task.sample_id,
            "draft": task.draft,
            "tables": example_to_dict(example)["tables"],
            "status": task.status,
            "annotation": task.annotation,
            "created_at": task.created_at,
            "claimed_at": task.claimed_at,
            "completed_at": task.completed_at,
        }

    def _task_example(self, task: ReviewTask) -> PairedExample:
        corpus = self.corpora[self.runs[task.run_id].corpus_id]
        return corpus.by_id(task.sample_id)

    def submit_annotation(self, task_id: str, corrected_text: str) -> dict:
        task = self.tasks.get(task_id)
        if task is None:
            raise _not_found("task", task_id)
        with self._lock:
            if task.status == "pending":
                raise ServiceError(
                    409, "not_claimed", f"task {task_id!r} has not been claimed"
                )
            if task.status == "done":
                if task.annotation == corrected_text:
                    return {"task_id": task_id, "status": "done", "duplicate": True}
                raise ServiceError(
                    409, "conflict",
                    f"task {task_id!r} already annotated with different text",
                )
            self._append({
                "type": "task_done",
                "task_id": task_id,
                "annotation": corrected_text,
                "at": self.clock(),
            })
        return {"task_id": task_id, "status": "done", "duplicate": False}

    def run_metrics(self, run_id: str) -> MetricReport:
        """Test-split metrics with the run's current memory applied."""
        run = self.runs.get(run_id)
        if run is None:
            raise _not_found("run", run_id)
        corpus = self.corpora[run.corpus_id]
        test = corpus.test()
        if not test:
            raise ServiceError(409, "no_test_split", "corpus has no test examples")
        generator = TemplateGenerator.from_corpus(corpus)
        outputs = []
        for ex in test:
            draft = generator.for_tables(ex.tables)
            corrected = correct_values(draft, ex.tables, run.memory)
            extract = match_values(ex.tables, ex.report, align.DEFAULT_STOPLIST).extract
            outputs.append((corrected.text, ex, extract))
        return evaluate_corpus(outputs)


class CorpusBody(BaseModel):
    corpus_id: Optional[str] = None
    examples: list[dict]


class RunBody(BaseModel):
    corpus_id: str
    strategy: str
    fraction: float
    seed: int


class AnnotationBody(BaseModel):
    corrected_text: str


def create_app(service: ReviewService):
    """FastAPI app exposing the review API."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, Response

    app = FastAPI(title="tableforge review service")

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, err: ServiceError):
        return JSONResponse(
            status_code=err.status,
            content={"code": err.code, "message": err.message},
        )

    @app.post("/api/corpora")
    def post_corpus(body: CorpusBody):
        corpus_id = service.add_corpus(body.examples, body.corpus_id)
        return {"corpus_id": corpus_id}

    @app.post("/api/runs")
    def post_run(body: RunBody):
        run_id = service.create_run(
            body.corpus_id, body.strategy, body.fraction, body.seed
        )
        return service.run_info(run_id)

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        return service.run_info(run_id)

    @app.get("/api/runs/{run_id}/tasks/next")
    def get_next_task(run_id: str):
        task = service.next_task(run_id)
        if task is None:
            return Response(status_code=204)
        return service.task_view(task)

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str):
        return service.task_view(service.get_task(task_id))

    @app.post("/api/tasks/{task_id}/annotation")
    def post_annotation(task_id: str, body: AnnotationBody):
        return service.submit_annotation(task_id, body.corrected_text)

    @app.get("/api/runs/{run_id}/metrics")
    def get_metrics(run_id: str):
        return service.run_metrics(run_id).to_dict()

    return app
