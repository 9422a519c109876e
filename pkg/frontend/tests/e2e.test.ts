// End-to-end: real service, three seeded tasks, claim -> render -> edit ->
// submit, then check the learned memory rule.  Skips when python3 or the
// service package is unavailable.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";
import { summarizeEdits } from "../src/diff.js";
import { renderTaskView } from "../src/render.js";
import { tokenize } from "../src/tokenize.js";

const PORT = 8642;
const BASE = `http://127.0.0.1:${PORT}`;

function pythonAvailable(): boolean {
  const probe = spawnSync("python3", ["-c", "import tableforge, uvicorn"], {
    timeout: 20000,
  });
  return probe.status === 0;
}

function exampleLine(index: number): Record<string, unknown> {
  const level = 300 + index * 100;
  const run = `RunA${index + 1}`;
  const tableId = `Table${index + 1}`;
  return {
    id: `e2e-${index}`,
    split: "train",
    tables: [
      {
        table_id: tableId,
        title: `Interference check ${index + 1}`,
        columns: ["Run", "Level"],
        rows: [[{ text: run, emphasis: 0 }, { text: String(level), emphasis: 0 }]],
      },
    ],
    report: `The level was ${level} today in ${run} ( ${tableId} ) .`,
  };
}

const available = pythonAvailable();

describe.skipIf(!available)("review UI against a live service", () => {
  let service: ChildProcess;
  let store: string;

  beforeAll(async () => {
    store = mkdtempSync(join(tmpdir(), "review-e2e-"));
    service = spawn("python3", [
      "-c",
      [
        "import uvicorn",
        "from tableforge.service import ReviewService, create_app",
        `app = create_app(ReviewService(${JSON.stringify(store)}))`,
        `uvicorn.run(app, host='127.0.0.1', port=${PORT}, log_level='warning')`,
      ].join("\n"),
    ]);
    const deadline = Date.now() + 30000;
    for (;;) {
      try {
        const response = await fetch(`${BASE}/api/runs/probe`);
        if (response.status === 404) break;
      } catch {
        // not up yet
      }
      if (Date.now() > deadline) throw new Error("service did not start");
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
  }, 40000);

  afterAll(() => {
    service?.kill();
    rmSync(store, { recursive: true, force: true });
  });

  it("claims, renders, submits and teaches the expected rule", async () => {
    const corpusResponse = await fetch(`${BASE}/api/corpora`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        corpus_id: "e2e-corpus",
        examples: [0, 1, 2].map(exampleLine),
      }),
    });
    expect(corpusResponse.status).toBe(200);

    const runResponse = await fetch(`${BASE}/api/runs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        corpus_id: "e2e-corpus",
        strategy: "random",
        fraction: 1.0,
        seed: 1,
      }),
    });
    const runInfo = await runResponse.json();
    expect(runInfo.tasks.total).toBe(3);
    const runId: string = runInfo.run_id;

    const api = new ReviewApi(BASE);
    const task = await api.nextTask(runId);
    expect(task).not.toBeNull();

    // The template baseline reproduces the training report for its own
    // table, so the draft has the known shape.
    expect(task!.draft).toMatch(/^The level was \d+ today in RunA\d/);

    const html = renderTaskView(task!);
    expect(html).toContain("source-table");
    expect(html).toContain("draft-text");
    for (const cell of task!.tables[0].rows[0]) {
      expect(html).toContain(cell.text);
    }
    // the extract never reaches the DOM
    expect(html.toLowerCase()).not.toContain("extract");

    const level = tokenize(task!.draft).find((t) => /^\d+$/.test(t))!;
    const editedLevel = String(Number(level) + 5);
    const edited = task!.draft.replace(level, editedLevel);
    const summary = summarizeEdits(task!.draft, edited);
    expect(summary.total).toBe(1);
    expect(summary.substitutions).toEqual([{ from: level, to: editedLevel }]);

    const ack = await api.submitAnnotation(task!.task_id, edited);
    expect(ack.status).toBe("done");

    // annotation round-trips byte-identically
    const stored = await api.getTask(task!.task_id);
    expect(stored.annotation).toBe(edited);

    const info = await api.runInfo(runId);
    expect(info.memory).toEqual([
      { from: level, to: editedLevel, left: "was", right: "today", weight: 1 },
    ]);

    // drain the remaining two tasks, then the queue reports empty
    expect(await api.nextTask(runId)).not.toBeNull();
    expect(await api.nextTask(runId)).not.toBeNull();
    expect(await api.nextTask(runId)).toBeNull();
  }, 30000);
});

describe.skipIf(available)("environment", () => {
  it("skips the live-service flow when python3 is unavailable", () => {
    expect(available).toBe(false);
  });
});
