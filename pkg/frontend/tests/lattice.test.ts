import { describe, expect, it } from "vitest";
import { coefficientColor, Lattice, parseSubsetKey, subsetMask } from "../src/lattice.js";
import type { CapacityDoc } from "../src/types.js";

function evenDoc(n: number): CapacityDoc {
  const coefficients: Record<string, number> = {};
  const full = (1 << n) - 1;
  for (let mask = 1; mask <= full; mask++) {
    const members: number[] = [];
    for (let e = 1; e <= n; e++) if (mask & (1 << (e - 1))) members.push(e);
    coefficients[members.join(",")] = mask === full ? 1 : members.length / n;
  }
  return { n, coefficients };
}

describe("lattice layout", () => {
  it("renders 30 coefficient nodes for five criteria", () => {
    const lattice = new Lattice(evenDoc(5));
    expect(lattice.nodes).toHaveLength(32); // every subset, empty included
    expect(lattice.coefficientNodes()).toHaveLength(30);
    expect(lattice.layerCount()).toBe(6);
  });

  it("anchors the empty and full set, never the coefficients", () => {
    const lattice = new Lattice(evenDoc(4));
    const fixed = lattice.nodes.filter((nd) => nd.fixed).map((nd) => nd.key);
    expect(fixed.sort()).toEqual(["", "1,2,3,4"]);
    expect(lattice.node("1,2,3,4").value).toBe(1);
    expect(lattice.node("").value).toBe(0);
  });

  it("only draws covering edges, one element apart", () => {
    const n = 5;
    const lattice = new Lattice(evenDoc(n));
    // every subset S has n - |S| upward covers
    expect(lattice.edges).toHaveLength(n * 2 ** (n - 1));
    for (const edge of lattice.edges) {
      const below = lattice.node(edge.from);
      const above = lattice.node(edge.to);
      expect(above.card).toBe(below.card + 1);
      expect(above.mask & below.mask).toBe(below.mask);
    }
  });

  it("stacks layers by cardinality, full set on top", () => {
    const lattice = new Lattice(evenDoc(4));
    for (const node of lattice.nodes) {
      expect(node.y).toBeCloseTo((4 - node.card) / 4, 12);
    }
  });

  it("spreads a layer evenly inside the frame", () => {
    const lattice = new Lattice(evenDoc(5));
    const pairs = lattice.nodes.filter((nd) => nd.card === 2);
    expect(pairs).toHaveLength(10);
    const xs = pairs.map((nd) => nd.x);
    for (let i = 1; i < xs.length; i++) expect(xs[i]).toBeGreaterThan(xs[i - 1]);
    expect(Math.min(...xs)).toBeGreaterThan(0);
    expect(Math.max(...xs)).toBeLessThan(1);
  });

  it("orders a layer lexicographically by members", () => {
    const lattice = new Lattice(evenDoc(3));
    const keys = lattice.nodes.filter((nd) => nd.card === 2).map((nd) => nd.key);
    expect(keys).toEqual(["1,2", "1,3", "2,3"]);
  });

  it("carries document values onto the nodes", () => {
    const doc = evenDoc(4);
    doc.coefficients["1,3"] = 0.77;
    const lattice = new Lattice(doc);
    expect(lattice.node("1,3").value).toBe(0.77);
  });

  it("rejects documents without the full set", () => {
    const doc = evenDoc(3);
    delete doc.coefficients["1,2,3"];
    expect(() => new Lattice(doc)).toThrow(/full set/);
  });

  it("rejects malformed subset keys", () => {
    expect(() => parseSubsetKey("0,2")).toThrow(/bad subset key/);
    expect(() => parseSubsetKey("1,x")).toThrow(/bad subset key/);
    expect(subsetMask([1, 3])).toBe(0b101);
  });
});

describe("coefficient color ramp", () => {
  const lightness = (color: string): number => {
    const match = color.match(/ (\d+(?:\.\d+)?)%\)$/);
    if (!match) throw new Error(`unexpected color ${color}`);
    return Number(match[1]);
  };

  it("darkens monotonically toward 1", () => {
    expect(lightness(coefficientColor(0))).toBeGreaterThan(lightness(coefficientColor(0.5)));
    expect(lightness(coefficientColor(0.5))).toBeGreaterThan(lightness(coefficientColor(1)));
  });

  it("clamps values outside the unit range", () => {
    expect(coefficientColor(-3)).toBe(coefficientColor(0));
    expect(coefficientColor(7)).toBe(coefficientColor(1));
  });
});
