import type { CapacityDoc } from "./types.js";

// Hasse diagram layout for a capacity over the subset lattice.
// Layers are cardinality levels, full set on top, empty set anchored
// at the bottom with value 0. Only covering edges (|T| = |S| + 1)
// are drawn.

export interface LatticeNode {
  key: string; // "1,3"
  mask: number;
  members: number[];
  card: number;
  value: number;
  fixed: boolean; // empty and full set are anchors, not coefficients
  x: number; // 0..1
  y: number; // 0..1, 0 is the top layer
}

export interface LatticeEdge {
  from: string; // lower node key
  to: string;
}

function maskOf(members: number[]): number {
  let m = 0;
  for (const e of members) m |= 1 << (e - 1);
  return m;
}

function parseKey(key: string): number[] {
  if (key.trim() === "") return [];
  return key.split(",").map((s) => {
    const v = Number(s);
    if (!Number.isInteger(v) || v < 1) throw new Error(`bad subset key: ${key}`);
    return v;
  });
}

function keyOf(members: number[]): string {
  return members.join(",");
}

export class Lattice {
  readonly n: number;
  readonly nodes: LatticeNode[];
  readonly edges: LatticeEdge[];

  constructor(doc: CapacityDoc) {
    this.n = doc.n;
    const byMask = new Map<number, LatticeNode>();

    // empty set is implicit in the document
    byMask.set(0, {
      key: "",
      mask: 0,
      members: [],
      card: 0,
      value: 0,
      fixed: true,
      x: 0.5,
      y: 1,
    });

    const full = (1 << this.n) - 1;
    for (const [key, value] of Object.entries(doc.coefficients)) {
      const members = parseKey(key);
      const mask = maskOf(members);
      byMask.set(mask, {
        key,
        mask,
        members,
        card: members.length,
        value,
        fixed: mask === full,
        x: 0,
        y: 0,
      });
    }
    if (!byMask.has(full)) throw new Error("capacity document lacks the full set");

    // canonical order inside a layer: lexicographic on the member tuple
    const layers: LatticeNode[][] = [];
    for (let card = 0; card <= this.n; card++) {
      const layer = [...byMask.values()].filter((nd) => nd.card === card);
      layer.sort((a, b) => {
        for (let i = 0; i < Math.min(a.members.length, b.members.length); i++) {
          if (a.members[i] !== b.members[i]) return a.members[i] - b.members[i];
        }
        return a.members.length - b.members.length;
      });
      layers.push(layer);
    }

    for (let card = 0; card <= this.n; card++) {
      const layer = layers[card];
      layer.forEach((nd, idx) => {
        nd.x = (idx + 1) / (layer.length + 1);
        nd.y = this.n === 0 ? 0 : (this.n - card) / this.n;
      });
    }

    this.nodes = layers.flat();

    // covering relation: add one element
    this.edges = [];
    for (const nd of this.nodes) {
      for (let e = 1; e <= this.n; e++) {
        const bit = 1 << (e - 1);
        if (nd.mask & bit) continue;
        const up = byMask.get(nd.mask | bit);
        if (up) this.edges.push({ from: nd.key, to: up.key });
      }
    }
  }

  /** Nodes carrying identified coefficients (proper nonempty subsets). */
  coefficientNodes(): LatticeNode[] {
    return this.nodes.filter((nd) => !nd.fixed);
  }

  layerCount(): number {
    return this.n + 1;
  }

  node(key: string): LatticeNode {
    const found = this.nodes.find((nd) => nd.key === key);
    if (!found) throw new Error(`no lattice node ${key}`);
    return found;
  }
}

/** Fill color for a coefficient in [0, 1], light to saturated blue. */
export function coefficientColor(value: number): string {
  const v = Math.min(1, Math.max(0, value));
  const light = 93 - 55 * v;
  return `hsl(213, 62%, ${light.toFixed(1)}%)`;
}

export { keyOf as subsetKey, maskOf as subsetMask, parseKey as parseSubsetKey };
