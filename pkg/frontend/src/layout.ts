// Deterministic force-directed layout: a seeded PRNG places the nodes and a
// fixed number of relaxation rounds moves them, so the same graph renders
// identically on every load (screenshots stay comparable).

import type { GraphPayload } from './types.js';

export interface PlacedNode {
  id: string;
  x: number;
  y: number;
}

export interface PlacedLink {
  source: string;
  target: string;
  rel_type: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface GraphLayout {
  width: number;
  height: number;
  nodes: PlacedNode[];
  links: PlacedLink[];
}

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const ROUNDS = 120;
const SPRING = 0.02;
const SPRING_LENGTH = 90;
const REPULSION = 2200;
const CENTERING = 0.012;

export function layoutGraph(
  payload: GraphPayload,
  width = 900,
  height = 600,
  seed = 42,
): GraphLayout {
  const rand = mulberry32(seed);
  const nodes = payload.nodes.map((n) => ({
    id: n.id,
    x: width * (0.1 + 0.8 * rand()),
    y: height * (0.1 + 0.8 * rand()),
    vx: 0,
    vy: 0,
  }));
  const index = new Map(nodes.map((n, i) => [n.id, i]));
  const edges = payload.links
    .filter((l) => index.has(l.source) && index.has(l.target))
    .map((l) => ({ ...l, si: index.get(l.source)!, ti: index.get(l.target)! }));

  for (let round = 0; round < ROUNDS; round++) {
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const a = nodes[i];
        const b = nodes[j];
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        const d2 = Math.max(dx * dx + dy * dy, 1);
        const force = REPULSION / d2;
        const d = Math.sqrt(d2);
        dx /= d;
        dy /= d;
        a.vx += dx * force;
        a.vy += dy * force;
        b.vx -= dx * force;
        b.vy -= dy * force;
      }
    }
    for (const e of edges) {
      const a = nodes[e.si];
      const b = nodes[e.ti];
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      const stretch = (d - SPRING_LENGTH) * SPRING;
      a.vx += (dx / d) * stretch;
      a.vy += (dy / d) * stretch;
      b.vx -= (dx / d) * stretch;
      b.vy -= (dy / d) * stretch;
    }
    for (const n of nodes) {
      n.vx += (width / 2 - n.x) * CENTERING;
      n.vy += (height / 2 - n.y) * CENTERING;
      n.x += Math.max(-12, Math.min(12, n.vx));
      n.y += Math.max(-12, Math.min(12, n.vy));
      n.vx *= 0.5;
      n.vy *= 0.5;
      n.x = Math.max(20, Math.min(width - 20, n.x));
      n.y = Math.max(20, Math.min(height - 20, n.y));
    }
  }

  const placed = nodes.map((n) => ({ id: n.id, x: round2(n.x), y: round2(n.y) }));
  const byId = new Map(placed.map((n) => [n.id, n]));
  const links = edges.map((e) => {
    const a = byId.get(e.source)!;
    const b = byId.get(e.target)!;
    return {
      source: e.source,
      target: e.target,
      rel_type: e.rel_type,
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
    };
  });
  return { width, height, nodes: placed, links };
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}
