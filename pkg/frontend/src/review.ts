// Candidate review table: pure render; event wiring lives in main.ts.

import type { CandidateRow } from './types.js';

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

const VERDICT_BUTTONS = ['accept', 'reject', 'rename'] as const;

export function renderCandidateTable(rows: CandidateRow[], controlsDisabled: boolean): string {
  if (rows.length === 0) {
    return '<p class="empty-state">No scored candidates yet.</p>';
  }
  const body = rows
    .map((row) => {
      const buttons = VERDICT_BUTTONS.map((v) => {
        const active = row.verdict === v ? ' active' : '';
        const disabled = controlsDisabled ? ' disabled' : '';
        return `<button class="verdict ${v}${active}" data-lemma="${esc(row.lemma)}" data-verdict="${v}"${disabled}>${v}</button>`;
      }).join('');
      const verdict = row.verdict ?? '—';
      const rename = row.new_label ? ` → ${esc(row.new_label)}` : '';
      const snippet = row.snippets[0] ? esc(row.snippets[0]) : '';
      return (
        `<tr data-row-lemma="${esc(row.lemma)}" class="${row.verdict ?? ''}">` +
        `<td class="rank">${row.rank}</td>` +
        `<td class="lemma" title="${esc(row.surface)}">${esc(row.lemma)}</td>` +
        `<td class="num">${row.freq}</td>` +
        `<td class="num">${row.doc_freq}</td>` +
        `<td class="num">${(row.scores['cvalue'] ?? 0).toFixed(3)}</td>` +
        `<td class="num">${(row.scores['tfidf'] ?? 0).toFixed(4)}</td>` +
        `<td class="verdict-cell">${verdict}${rename}</td>` +
        `<td class="controls">${buttons}</td>` +
        `<td class="snippet">${snippet}</td></tr>`
      );
    })
    .join('');
  return (
    '<table class="candidates"><thead><tr>' +
    '<th>#</th><th>term</th><th>freq</th><th>docs</th><th>c-value</th><th>tf-idf</th>' +
    '<th>verdict</th><th></th><th>context</th>' +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}
