// HTML renderers for the correction screen.  Pure string builders so they
// are testable without a browser; the app shell assigns them to innerHTML.
//
// The table extract is intentionally never rendered or requested: experts
// review only the original table and the draft text.

import { classifyValue } from "./classify.js";
import type { EditSummary } from "./diff.js";
import { tokenSpans } from "./tokenize.js";
import type { TableData, TaskView } from "./api.js";

export const INSTRUCTION_BANNER =
  "Make as few edits as possible while keeping the report clinically valid.";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTable(table: TableData): string {
  const header = table.columns
    .map((column) => `<th>${escapeHtml(column)}</th>`)
    .join("");
  const body = table.rows
    .map((row) => {
      const cells = row
        .map((cell) => {
          const marks = cell.emphasis > 0 ? " <span class=\"emphasis-marks\">" +
            "*".repeat(cell.emphasis) + "</span>" : "";
          const cls = cell.emphasis > 0 ? " class=\"emphasized\"" : "";
          return `<td${cls}>${escapeHtml(cell.text)}${marks}</td>`;
        })
        .join("");
      return `<tr>${cells}</tr>`;
    })
    .join("");
  return (
    `<figure class="source-table" data-table-id="${escapeHtml(table.table_id)}">` +
    `<figcaption>${escapeHtml(table.title)}</figcaption>` +
    `<table><thead><tr>${header}</tr></thead><tbody>${body}</tbody></table>` +
    `</figure>`
  );
}

/** Draft text with value tokens wrapped in <mark> for reviewer attention. */
export function renderDraft(draft: string): string {
  const pieces: string[] = [];
  let cursor = 0;
  for (const { token, start, end } of tokenSpans(draft)) {
    pieces.push(escapeHtml(draft.slice(cursor, start)));
    const kind = classifyValue(token);
    if (kind !== null) {
      pieces.push(
        `<mark class="value" data-kind="${kind}">${escapeHtml(token)}</mark>`,
      );
    } else {
      pieces.push(escapeHtml(token));
    }
    cursor = end;
  }
  pieces.push(escapeHtml(draft.slice(cursor)));
  return `<p class="draft-text">${pieces.join("")}</p>`;
}

export function renderEditSummary(summary: EditSummary): string {
  if (summary.total === 0) {
    return `<p class="edit-summary">No edits.</p>`;
  }
  const items: string[] = [];
  for (const sub of summary.substitutions) {
    items.push(
      `<li class="substitution">${escapeHtml(sub.from)} &rarr; ${escapeHtml(sub.to)}</li>`,
    );
  }
  for (const token of summary.insertions) {
    items.push(`<li class="insertion">+ ${escapeHtml(token)}</li>`);
  }
  for (const token of summary.deletions) {
    items.push(`<li class="deletion">&minus; ${escapeHtml(token)}</li>`);
  }
  return (
    `<div class="edit-summary"><p>${summary.total} edit(s)</p>` +
    `<ul>${items.join("")}</ul></div>`
  );
}

export function renderTaskView(task: TaskView): string {
  const tables = task.tables.map(renderTable).join("");
  return (
    `<section class="task" data-task-id="${escapeHtml(task.task_id)}">` +
    `<aside class="banner">${escapeHtml(INSTRUCTION_BANNER)}</aside>` +
    `<div class="side-by-side">` +
    `<div class="tables">${tables}</div>` +
    `<div class="draft">${renderDraft(task.draft)}</div>` +
    `</div>` +
    `</section>`
  );
}

export function renderEmptyQueue(): string {
  return `<section class="empty-queue"><p>No tasks pending. All caught up.</p></section>`;
}

export function renderRetryPrompt(message: string): string {
  return (
    `<section class="retry-prompt"><p>Connection problem: ${escapeHtml(message)}</p>` +
    `<p>Your edits are kept locally.</p>` +
    `<button data-action="retry">Retry</button></section>`
  );
}
