import { describe, expect, it } from 'vitest';

import { iterateControl, renderStrip, stageStrip } from '../src/progress.js';
import type { ProjectState } from '../src/types.js';

function project(overrides: Partial<ProjectState> = {}): ProjectState {
  return {
    name: 'demo',
    mode: 'accumulate',
    goal: 'domain',
    iteration: 0,
    busy: false,
    stages: {
      ingest: { status: 'done', detail: '20 documents' },
      assemble: { status: 'done', detail: '|X|=40' },
    },
    events: [],
    ...overrides,
  };
}

describe('stage strip', () => {
  it('orders stages by pipeline position', () => {
    const cells = stageStrip(project());
    expect(cells.map((c) => c.stage)).toEqual(['ingest', 'assemble']);
  });

  it('surfaces failure detail from the stage state', () => {
    const p = project({
      stages: { ingest: { status: 'failed', detail: 'corpus is empty' } },
    });
    const html = renderStrip(stageStrip(p));
    expect(html).toContain('failed');
    expect(html).toContain('corpus is empty');
  });
});

describe('iterate control', () => {
  it('enabled when idle with a completed assemble', () => {
    expect(iterateControl(project(), true)).toEqual({ disabled: false, reason: '' });
  });

  it('disabled with a reason while a run is active', () => {
    const control = iterateControl(project({ busy: true }), true);
    expect(control.disabled).toBe(true);
    expect(control.reason).toContain('in progress');
  });

  it('disabled when the API is unreachable', () => {
    const control = iterateControl(project(), false);
    expect(control.disabled).toBe(true);
    expect(control.reason).toContain('unreachable');
  });

  it('disabled before the first assemble completes', () => {
    const p = project({ stages: { ingest: { status: 'done', detail: '' } } });
    expect(iterateControl(p, true).disabled).toBe(true);
  });
});
