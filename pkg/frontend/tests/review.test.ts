import { describe, expect, it } from 'vitest';

import { renderCandidateTable } from '../src/review.js';
import type { CandidateRow } from '../src/types.js';

function row(lemma: string, rank: number, verdict: CandidateRow['verdict'] = null): CandidateRow {
  return {
    rank,
    lemma,
    surface: lemma.toUpperCase(),
    freq: 4,
    doc_freq: 2,
    scores: { cvalue: 2.5, tfidf: 0.01 },
    verdict,
    new_label: null,
    snippets: ['…the semantic network connects…'],
  };
}

describe('candidate table', () => {
  it('renders one row per candidate in rank order with verdict controls', () => {
    const html = renderCandidateTable([row('alpha', 1), row('beta', 2)], false);
    expect(html.indexOf('alpha')).toBeLessThan(html.indexOf('beta'));
    expect(html).toContain('data-lemma="alpha" data-verdict="reject"');
    expect(html).toContain('data-lemma="beta" data-verdict="accept"');
  });

  it('shows the persisted verdict fetched from the server', () => {
    const html = renderCandidateTable([row('alpha', 1, 'reject')], false);
    expect(html).toContain('class="reject"');
    expect(html).toContain('verdict reject active');
  });

  it('disables controls when asked', () => {
    const html = renderCandidateTable([row('alpha', 1)], true);
    expect(html).toContain('disabled');
  });

  it('renders an empty state without rows', () => {
    expect(renderCandidateTable([], false)).toContain('empty-state');
  });

  it('escapes lemma text', () => {
    const html = renderCandidateTable([row('a<b>&"c"', 1)], false);
    expect(html).toContain('a&lt;b&gt;&amp;&quot;c&quot;');
  });
});
