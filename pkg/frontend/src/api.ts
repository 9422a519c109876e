// Typed client for the review service HTTP API.

export interface TableCell {
  text: string;
  emphasis: number;
}

export interface TableData {
  table_id: string;
  title: string;
  columns: string[];
  rows: TableCell[][];
}

export interface TaskView {
  task_id: string;
  run_id: string;
  sample_id: string;
  draft: string;
  tables: TableData[];
  status: "pending" | "claimed" | "done";
  annotation: string | null;
}

export interface MemoryRule {
  from: string;
  to: string;
  left: string | null;
  right: string | null;
  weight: number;
}

export interface RunInfo {
  run_id: string;
  corpus_id: string;
  strategy: string;
  fraction: number;
  seed: number;
  tasks: { total: number; pending: number; claimed: number; done: number };
  memory: MemoryRule[];
}

export interface SubmitAck {
  task_id: string;
  status: string;
  duplicate: boolean;
}

export class ServiceApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

async function raiseForError(response: Response): Promise<void> {
  if (response.ok || response.status === 204) return;
  let code = "error";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body === "object") {
      code = body.code ?? code;
      message = body.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the defaults
  }
  throw new ServiceApiError(response.status, code, message);
}

export class ReviewApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  /** Claims the next pending task; null when the queue is empty. */
  async nextTask(runId: string): Promise<TaskView | null> {
    const response = await this.fetchImpl(
      this.url(`/api/runs/${encodeURIComponent(runId)}/tasks/next`),
    );
    await raiseForError(response);
    if (response.status === 204) return null;
    return (await response.json()) as TaskView;
  }

  async getTask(taskId: string): Promise<TaskView> {
    const response = await this.fetchImpl(
      this.url(`/api/tasks/${encodeURIComponent(taskId)}`),
    );
    await raiseForError(response);
    return (await response.json()) as TaskView;
  }

  /** Submits the corrected text exactly as provided, byte for byte. */
  async submitAnnotation(taskId: string, correctedText: string): Promise<SubmitAck> {
    const response = await this.fetchImpl(
      this.url(`/api/tasks/${encodeURIComponent(taskId)}/annotation`),
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ corrected_text: correctedText }),
      },
    );
    await raiseForError(response);
    return (await response.json()) as SubmitAck;
  }

  async runInfo(runId: string): Promise<RunInfo> {
    const response = await this.fetchImpl(
      this.url(`/api/runs/${encodeURIComponent(runId)}`),
    );
    await raiseForError(response);
    return (await response.json()) as RunInfo;
  }
}
