import { describe, expect, it } from 'vitest';

import { edgeClass, nodeDetail, renderGraphSvg, renderNodeDetail } from '../src/graph.js';
import { layoutGraph, mulberry32 } from '../src/layout.js';
import type { GraphPayload } from '../src/types.js';

function payload(): GraphPayload {
  return {
    name: 'demo',
    kind: 'domain',
    nodes: [
      {
        id: 'n1',
        label: 'semantic network',
        kind: 'object',
        interpretations: [
          { gloss: 'a graph of concepts', source: 'demo-glossary' },
          { gloss: 'second gloss', source: 'other' },
        ],
        provenance: [{ doc: 'd1', start: 4, end: 20 }],
      },
      { id: 'n2', label: 'network', kind: 'object', interpretations: [], provenance: [] },
      { id: 'n3', label: 'curation', kind: 'process', interpretations: [], provenance: [] },
    ],
    links: [
      { source: 'n1', target: 'n2', rel_type: 'is_a', confidence: 0.7 },
      { source: 'n1', target: 'n3', rel_type: 'associated_with', confidence: 0.4 },
    ],
  };
}

describe('deterministic layout', () => {
  it('mulberry32 reproduces the same sequence per seed', () => {
    const a = mulberry32(42);
    const b = mulberry32(42);
    const c = mulberry32(7);
    const seqA = [a(), a(), a()];
    const seqB = [b(), b(), b()];
    expect(seqA).toEqual(seqB);
    expect(seqA).not.toEqual([c(), c(), c()]);
  });

  it('same payload and seed produce identical positions', () => {
    const one = layoutGraph(payload(), 900, 600, 42);
    const two = layoutGraph(payload(), 900, 600, 42);
    expect(one).toEqual(two);
  });

  it('keeps every node inside the viewport', () => {
    const out = layoutGraph(payload(), 300, 200, 1);
    for (const n of out.nodes) {
      expect(n.x).toBeGreaterThanOrEqual(0);
      expect(n.x).toBeLessThanOrEqual(300);
      expect(n.y).toBeGreaterThanOrEqual(0);
      expect(n.y).toBeLessThanOrEqual(200);
    }
  });
});

describe('graph rendering', () => {
  it('renders exactly the payload node and edge counts', () => {
    const p = payload();
    const svg = renderGraphSvg(p);
    const circles = svg.match(/<circle /g) ?? [];
    const lines = svg.match(/<line /g) ?? [];
    expect(circles.length).toBe(p.nodes.length);
    expect(lines.length).toBe(p.links.length);
  });

  it('distinguishes hierarchical from associative edges', () => {
    expect(edgeClass('is_a')).toContain('hierarchy');
    expect(edgeClass('part_of')).toContain('hierarchy');
    expect(edgeClass('associated_with')).toContain('associative');
    const svg = renderGraphSvg(payload());
    expect(svg).toContain('edge hierarchy is_a');
    expect(svg).toContain('edge associative');
    expect(svg).toContain('marker-end="url(#arrow)"');
  });

  it('shows an empty state for an empty ontology', () => {
    const svg = renderGraphSvg({ name: 'x', kind: 'domain', nodes: [], links: [] });
    expect(svg).toContain('empty-state');
    expect(svg).not.toContain('<svg');
  });

  it('escapes labels', () => {
    const p = payload();
    p.nodes[0].label = 'a <b> & "c"';
    expect(renderGraphSvg(p)).toContain('a &lt;b&gt; &amp; &quot;c&quot;');
  });
});

describe('node detail panel', () => {
  it('lists every gloss and provenance span', () => {
    const detail = nodeDetail(payload(), 'n1');
    expect(detail).not.toBeNull();
    expect(detail!.glosses).toHaveLength(2);
    const html = renderNodeDetail(detail!);
    expect(html).toContain('a graph of concepts');
    expect(html).toContain('second gloss');
    expect(html).toContain('d1 [4–20]');
  });

  it('returns null for unknown nodes', () => {
    expect(nodeDetail(payload(), 'ghost')).toBeNull();
  });
});
