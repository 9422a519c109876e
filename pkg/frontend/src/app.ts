// Browser shell: one task at a time, claim -> edit -> summary -> submit.
// Local edits survive network failures; submission retries are idempotent
// on the service side.

import { ReviewApi, ServiceApiError, type TaskView } from "./api.js";
import { summarizeEdits } from "./diff.js";
import {
  renderEditSummary,
  renderEmptyQueue,
  renderRetryPrompt,
  renderTaskView,
} from "./render.js";

interface AppState {
  task: TaskView | null;
  editedText: string;
}

export class ReviewApp {
  private state: AppState = { task: null, editedText: "" };

  constructor(
    private readonly api: ReviewApi,
    private readonly runId: string,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    await this.claimNext();
  }

  private async claimNext(): Promise<void> {
    try {
      const task = await this.api.nextTask(this.runId);
      if (task === null) {
        this.state = { task: null, editedText: "" };
        this.root.innerHTML = renderEmptyQueue();
        return;
      }
      this.state = { task, editedText: task.draft };
      this.renderTask();
    } catch (err) {
      this.renderRetry(err, () => this.claimNext());
    }
  }

  private renderTask(): void {
    const task = this.state.task;
    if (!task) return;
    this.root.innerHTML =
      renderTaskView(task) +
      `<textarea id="editor" rows="8"></textarea>` +
      `<div id="summary"></div>` +
      `<button data-action="review">Review edits</button>` +
      `<button data-action="submit">Submit</button>`;
    const editor = this.root.querySelector<HTMLTextAreaElement>("#editor")!;
    editor.value = this.state.editedText;
    editor.addEventListener("input", () => {
      this.state.editedText = editor.value;
    });
    this.root
      .querySelector<HTMLButtonElement>('[data-action="review"]')!
      .addEventListener("click", () => this.showSummary());
    this.root
      .querySelector<HTMLButtonElement>('[data-action="submit"]')!
      .addEventListener("click", () => void this.submit());
  }

  private showSummary(): void {
    const task = this.state.task;
    if (!task) return;
    const summary = summarizeEdits(task.draft, this.state.editedText);
    this.root.querySelector("#summary")!.innerHTML = renderEditSummary(summary);
  }

  private async submit(): Promise<void> {
    const task = this.state.task;
    if (!task) return;
    try {
      await this.api.submitAnnotation(task.task_id, this.state.editedText);
      await this.claimNext();
    } catch (err) {
      if (err instanceof ServiceApiError && err.status === 409) {
        // already annotated differently elsewhere; reload the task state
        const fresh = await this.api.getTask(task.task_id);
        this.state = { task: fresh, editedText: fresh.annotation ?? fresh.draft };
        this.renderTask();
        return;
      }
      this.renderRetry(err, () => this.submit());
    }
  }

  private renderRetry(err: unknown, retry: () => Promise<void>): void {
    const message = err instanceof Error ? err.message : String(err);
    const edits = this.state.editedText;
    this.root.innerHTML = renderRetryPrompt(message);
    this.state.editedText = edits;
    this.root
      .querySelector<HTMLButtonElement>('[data-action="retry"]')!
      .addEventListener("click", () => void retry());
  }
}

export function mount(root: HTMLElement): void {
  const params = new URLSearchParams(window.location.search);
  const runId = params.get("run");
  const base = params.get("service") ?? "";
  if (!runId) {
    root.innerHTML = "<p>Pass ?run=RUN_ID (and optional &service=URL).</p>";
    return;
  }
  void new ReviewApp(new ReviewApi(base), runId, root).start();
}
