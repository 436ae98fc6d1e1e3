// Wiring: polling, tab switching, event delegation.  All authoritative
// state lives on the server; this module only holds the latest snapshots.

import { ApiClient, ApiError } from './api.js';
import { nodeDetail, renderGraphSvg, renderNodeDetail } from './graph.js';
import { iterateControl, renderStrip, stageStrip } from './progress.js';
import { renderCandidateTable } from './review.js';
import { applyOptimistic, decisionRequest, revert } from './state.js';
import type { CandidateRow, GraphPayload, ProjectState, Verdict } from './types.js';

const POLL_MS = 2000;

const api = new ApiClient('');

let project: ProjectState | null = null;
let apiReachable = true;
let serverRows: CandidateRow[] = [];
let rows: CandidateRow[] = [];
let rowsIteration: number | null = null;
let graphPayload: GraphPayload | null = null;
let graphIteration: number | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setBanner(message: string | null): void {
  const banner = el<HTMLDivElement>('banner');
  banner.textContent = message ?? '';
  banner.classList.toggle('visible', message !== null);
}

async function refreshProject(): Promise<void> {
  try {
    project = await api.getProject();
    if (!apiReachable) {
      apiReachable = true;
      setBanner(null);
      void refreshCandidates();
    }
  } catch {
    apiReachable = false;
    setBanner('API unreachable — controls disabled, retrying…');
  }
  renderProgress();
  renderReview();
}

async function refreshCandidates(iteration?: number): Promise<void> {
  try {
    const body = await api.getCandidates(iteration);
    serverRows = body.candidates;
    rows = body.candidates;
    rowsIteration = body.iteration;
  } catch (err) {
    if (err instanceof ApiError && err.code === 'not-found') {
      serverRows = [];
      rows = [];
    }
  }
  renderReview();
}

async function refreshGraph(iteration?: number): Promise<void> {
  try {
    graphPayload = await api.getGraph(iteration);
    graphIteration = graphPayload.iteration ?? iteration ?? null;
  } catch {
    graphPayload = null;
  }
  renderGraph();
}

function renderProgress(): void {
  if (project) {
    el('stage-strip').innerHTML = renderStrip(stageStrip(project));
    el('iteration-label').textContent = `iteration ${project.iteration}`;
  }
  const control = iterateControl(project, apiReachable);
  const button = el<HTMLButtonElement>('iterate-button');
  button.disabled = control.disabled;
  el('iterate-reason').textContent = control.reason;
  const failed = project
    ? Object.entries(project.stages).find(([, st]) => st.status === 'failed')
    : undefined;
  el('failure-detail').textContent = failed ? `${failed[0]}: ${failed[1].detail}` : '';
}

function renderReview(): void {
  el('review-table').innerHTML = renderCandidateTable(rows, !apiReachable);
  if (rowsIteration !== null) {
    el('candidates-iteration').textContent = `candidates of iteration ${rowsIteration}`;
  }
}

function renderGraph(): void {
  const host = el('graph-host');
  if (!graphPayload) {
    host.innerHTML = '<p class="empty-state">No assembled ontology yet.</p>';
    return;
  }
  host.innerHTML = renderGraphSvg(graphPayload);
  const counts = `${graphPayload.nodes.length} concepts, ${graphPayload.links.length} relations`;
  el('graph-counts').textContent = counts;
}

async function onVerdictClick(lemma: string, verdict: Verdict): Promise<void> {
  let newLabel: string | undefined;
  if (verdict === 'rename') {
    newLabel = window.prompt(`rename "${lemma}" to:`, lemma) ?? undefined;
    if (!newLabel) return;
  }
  const snapshot = serverRows;
  rows = applyOptimistic(rows, lemma, verdict);
  renderReview();
  try {
    await api.postDecisions([decisionRequest(lemma, verdict, newLabel)]);
    await refreshCandidates(rowsIteration ?? undefined);
  } catch (err) {
    rows = revert(rows, snapshot, lemma);
    renderReview();
    const message = err instanceof ApiError ? err.message : String(err);
    toast(`decision rejected: ${message}`);
  }
}

async function onIterate(): Promise<void> {
  const button = el<HTMLButtonElement>('iterate-button');
  if (button.disabled) return;
  try {
    const res = await api.postIterate();
    toast(`iteration ${res.iteration} started (${res.decisions} decisions)`);
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err);
    toast(`iterate refused: ${message}`);
  }
  void refreshProject();
}

function toast(message: string): void {
  const node = el('toast');
  node.textContent = message;
  node.classList.add('visible');
  window.setTimeout(() => node.classList.remove('visible'), 4000);
}

function switchTab(name: string): void {
  for (const tab of document.querySelectorAll<HTMLElement>('[data-screen]')) {
    tab.classList.toggle('active', tab.dataset['screen'] === name);
  }
  for (const button of document.querySelectorAll<HTMLElement>('[data-tab]')) {
    button.classList.toggle('active', button.dataset['tab'] === name);
  }
  if (name === 'graph') {
    void refreshGraph(currentGraphIteration());
  }
}

function currentGraphIteration(): number | undefined {
  const input = el<HTMLInputElement>('graph-iteration');
  return input.value === '' ? undefined : Number(input.value);
}

export function bootstrap(): void {
  el('review-table').addEventListener('click', (evt) => {
    const target = evt.target as HTMLElement;
    const lemma = target.dataset['lemma'];
    const verdict = target.dataset['verdict'] as Verdict | undefined;
    if (lemma && verdict) void onVerdictClick(lemma, verdict);
  });
  el('graph-host').addEventListener('click', (evt) => {
    const group = (evt.target as HTMLElement).closest('[data-node-id]') as HTMLElement | null;
    if (group && graphPayload) {
      const detail = nodeDetail(graphPayload, group.dataset['nodeId'] ?? '');
      el('node-detail').innerHTML = detail ? renderNodeDetail(detail) : '';
    }
  });
  el('iterate-button').addEventListener('click', () => void onIterate());
  el<HTMLInputElement>('graph-iteration').addEventListener('change', () =>
    void refreshGraph(currentGraphIteration()),
  );
  for (const button of document.querySelectorAll<HTMLElement>('[data-tab]')) {
    button.addEventListener('click', () => switchTab(button.dataset['tab'] ?? 'review'));
  }
  void refreshProject();
  void refreshCandidates();
  void refreshGraph();
  window.setInterval(() => void refreshProject(), POLL_MS);
}

if (typeof document !== 'undefined' && document.getElementById('review-table')) {
  bootstrap();
}
