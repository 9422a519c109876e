// Token-level diff for the pre-submission edit summary.

import { tokenize } from "./tokenize.js";

export type DiffOp =
  | { kind: "equal"; token: string }
  | { kind: "substitute"; from: string; to: string }
  | { kind: "delete"; from: string }
  | { kind: "insert"; to: string };

/** Edit-distance alignment; prefers matches, then substitution, deletion,
 * insertion, matching the rule-learning alignment on the service side. */
export function diffTokens(before: string[], after: string[]): DiffOp[] {
  const n = before.length;
  const m = after.length;
  const dist: number[][] = Array.from({ length: n + 1 }, () => new Array(m + 1).fill(0));
  for (let i = 0; i <= n; i++) dist[i][0] = i;
  for (let j = 0; j <= m; j++) dist[0][j] = j;
  for (let i = 1; i <= n; i++) {
    for (let j = 1; j <= m; j++) {
      dist[i][j] = Math.min(
        dist[i - 1][j - 1] + (before[i - 1] === after[j - 1] ? 0 : 1),
        dist[i - 1][j] + 1,
        dist[i][j - 1] + 1,
      );
    }
  }
  const ops: DiffOp[] = [];
  let i = n;
  let j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && dist[i][j] === dist[i - 1][j - 1] && before[i - 1] === after[j - 1]) {
      ops.push({ kind: "equal", token: before[i - 1] });
      i--; j--;
    } else if (i > 0 && j > 0 && dist[i][j] === dist[i - 1][j - 1] + 1) {
      ops.push({ kind: "substitute", from: before[i - 1], to: after[j - 1] });
      i--; j--;
    } else if (i > 0 && dist[i][j] === dist[i - 1][j] + 1) {
      ops.push({ kind: "delete", from: before[i - 1] });
      i--;
    } else {
      ops.push({ kind: "insert", to: after[j - 1] });
      j--;
    }
  }
  ops.reverse();
  return ops;
}

export interface EditSummary {
  substitutions: { from: string; to: string }[];
  insertions: string[];
  deletions: string[];
  total: number;
}

export function summarizeEdits(draft: string, edited: string): EditSummary {
  const ops = diffTokens(tokenize(draft), tokenize(edited));
  const summary: EditSummary = { substitutions: [], insertions: [], deletions: [], total: 0 };
  for (const op of ops) {
    if (op.kind === "substitute") summary.substitutions.push({ from: op.from, to: op.to });
    else if (op.kind === "insert") summary.insertions.push(op.to);
    else if (op.kind === "delete") summary.deletions.push(op.from);
  }
  summary.total =
    summary.substitutions.length + summary.insertions.length + summary.deletions.length;
  return summary;
}
