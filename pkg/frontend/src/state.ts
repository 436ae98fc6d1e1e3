// Pure view-model logic for the candidate table.  The server stays the
// source of truth: optimistic verdicts are provisional until the next
// fetched snapshot reconciles them.

import type { CandidateRow, DecisionInput, Verdict } from './types.js';

export function decisionRequest(lemma: string, verdict: Verdict, newLabel?: string): DecisionInput {
  const req: DecisionInput = { target: lemma, target_kind: 'term', verdict, author: 'ui' };
  if (verdict === 'rename' && newLabel) {
    req.new_label = newLabel;
  }
  return req;
}

export function applyOptimistic(
  rows: CandidateRow[],
  lemma: string,
  verdict: Verdict,
): CandidateRow[] {
  return rows.map((row) => (row.lemma === lemma ? { ...row, verdict } : row));
}

/** Server snapshot wins for every row it knows about. */
export function reconcile(local: CandidateRow[], server: CandidateRow[]): CandidateRow[] {
  const byLemma = new Map(server.map((row) => [row.lemma, row]));
  return local.map((row) => byLemma.get(row.lemma) ?? row);
}

/** Revert one row to the last server-confirmed snapshot (failed POST). */
export function revert(
  rows: CandidateRow[],
  snapshot: CandidateRow[],
  lemma: string,
): CandidateRow[] {
  const confirmed = snapshot.find((row) => row.lemma === lemma);
  return rows.map((row) => (row.lemma === lemma ? (confirmed ?? row) : row));
}

export function pendingCount(rows: CandidateRow[], snapshot: CandidateRow[]): number {
  const confirmed = new Map(snapshot.map((row) => [row.lemma, row.verdict]));
  return rows.filter((row) => row.verdict !== (confirmed.get(row.lemma) ?? null)).length;
}
