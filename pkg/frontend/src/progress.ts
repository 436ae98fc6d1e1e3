// Pipeline progress strip and the iterate control's enablement logic.

import type { ProjectState } from './types.js';

export const STAGE_ORDER = [
  'ingest',
  'analyze',
  'candidates',
  'score',
  'graph',
  'taxonomic',
  'associative',
  'assemble',
  'integrate',
];

export interface StageCell {
  stage: string;
  status: string;
  detail: string;
}

export function stageStrip(project: ProjectState): StageCell[] {
  return STAGE_ORDER.filter((s) => s in project.stages).map((stage) => ({
    stage,
    status: project.stages[stage].status,
    detail: project.stages[stage].detail,
  }));
}

export interface IterateControl {
  disabled: boolean;
  reason: string;
}

export function iterateControl(project: ProjectState | null, apiReachable: boolean): IterateControl {
  if (!apiReachable) {
    return { disabled: true, reason: 'API unreachable' };
  }
  if (!project) {
    return { disabled: true, reason: 'loading project state' };
  }
  if (project.busy) {
    return { disabled: true, reason: 'a run is already in progress' };
  }
  const assembled = project.stages['assemble'];
  if (!assembled || assembled.status !== 'done') {
    return { disabled: true, reason: 'no completed assemble stage yet' };
  }
  return { disabled: false, reason: '' };
}

export function renderStrip(cells: StageCell[]): string {
  return cells
    .map((c) => {
      const failure =
        c.status === 'failed' ? `<span class="failure">${escapeHtml(c.detail)}</span>` : '';
      return (
        `<div class="stage ${c.status}" title="${escapeHtml(c.detail)}">` +
        `<span class="name">${c.stage}</span><span class="status">${c.status}</span>${failure}</div>`
      );
    })
    .join('');
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
