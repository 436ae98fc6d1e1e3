// Ontograph rendering: pure payload -> SVG markup, plus the node detail
// model.  Hierarchical edges are drawn solid with arrowheads, associative
// edges dashed, so the two relation families stay visually distinct.

import { layoutGraph } from './layout.js';
import type { GraphLayout } from './layout.js';
import type { GraphNode, GraphPayload } from './types.js';

const HIERARCHICAL = new Set(['is_a', 'part_of']);

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function edgeClass(relType: string): string {
  return HIERARCHICAL.has(relType) ? `edge hierarchy ${relType}` : 'edge associative';
}

export function renderGraphSvg(payload: GraphPayload, layout?: GraphLayout): string {
  if (payload.nodes.length === 0) {
    return '<p class="empty-state">The ontology is empty; run the pipeline first.</p>';
  }
  const placed = layout ?? layoutGraph(payload);
  const labels = new Map(payload.nodes.map((n) => [n.id, n.label]));
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${placed.width} ${placed.height}" class="ontograph" role="img">`,
    '<defs><marker id="arrow" viewBox="0 0 8 8" refX="7" refY="4" markerWidth="6" markerHeight="6" orient="auto"><path d="M0,0 L8,4 L0,8 z"/></marker></defs>',
  );
  for (const link of placed.links) {
    const marker = HIERARCHICAL.has(link.rel_type) ? ' marker-end="url(#arrow)"' : '';
    parts.push(
      `<line class="${edgeClass(link.rel_type)}" x1="${link.x1}" y1="${link.y1}" ` +
        `x2="${link.x2}" y2="${link.y2}" data-rel="${esc(link.rel_type)}"${marker}></line>`,
    );
  }
  for (const node of placed.nodes) {
    const label = labels.get(node.id) ?? node.id;
    parts.push(
      `<g class="node" data-node-id="${esc(node.id)}" transform="translate(${node.x},${node.y})">` +
        `<circle r="7"></circle><text dx="9" dy="4">${esc(label)}</text></g>`,
    );
  }
  parts.push('</svg>');
  return parts.join('\n');
}

export interface NodeDetail {
  label: string;
  kind: string;
  glosses: { gloss: string; source: string }[];
  provenance: { doc: string; start: number; end: number }[];
}

export function nodeDetail(payload: GraphPayload, nodeId: string): NodeDetail | null {
  const node: GraphNode | undefined = payload.nodes.find((n) => n.id === nodeId);
  if (!node) {
    return null;
  }
  return {
    label: node.label,
    kind: node.kind,
    glosses: node.interpretations,
    provenance: node.provenance,
  };
}

export function renderNodeDetail(detail: NodeDetail): string {
  const glosses = detail.glosses.length
    ? detail.glosses
        .map((g) => `<li>${esc(g.gloss)} <span class="source">— ${esc(g.source)}</span></li>`)
        .join('')
    : '<li class="empty">no interpretations</li>';
  const prov = detail.provenance.length
    ? detail.provenance
        .map((p) => `<li>${esc(p.doc)} [${p.start}–${p.end}]</li>`)
        .join('')
    : '<li class="empty">no provenance</li>';
  return (
    `<h3>${esc(detail.label)} <span class="kind">${esc(detail.kind)}</span></h3>` +
    `<h4>Interpretations</h4><ul>${glosses}</ul>` +
    `<h4>Provenance</h4><ul class="prov">${prov}</ul>`
  );
}
