import { KIND_RANGES, isKnownTerm, termBounds, type Kind } from "./terms.js";
import type { LinguisticRecord } from "./types.js";

/**
 * Constraint editor model. A draft is one row of the editor; it either
 * carries a linguistic term or a raw bound override, never both. Drafts
 * with problems are blocked inline and never serialized.
 */

export interface ConstraintDraft {
  kind: Kind;
  a: number[];
  b: number[];
  term: string | null;
  lo: number | null;
  hi: number | null;
  twoSided: boolean;
}

export function emptyDraft(kind: Kind = "importance"): ConstraintDraft {
  return { kind, a: [], b: [], term: null, lo: null, hi: null, twoSided: false };
}

function subsetProblems(side: "a" | "b", ids: number[], n: number): string[] {
  const out: string[] = [];
  if (ids.length === 0) out.push(`side ${side} is empty`);
  for (const id of ids) {
    if (!Number.isInteger(id) || id < 1 || id > n) {
      out.push(`side ${side} references criterion ${id}, session has 1..${n}`);
    }
  }
  if (new Set(ids).size !== ids.length) out.push(`side ${side} repeats a criterion`);
  return out;
}

/** Everything wrong with a draft; empty means it can be serialized. */
export function draftProblems(draft: ConstraintDraft, n: number): string[] {
  const out = [...subsetProblems("a", draft.a, n), ...subsetProblems("b", draft.b, n)];
  const aSet = new Set(draft.a);
  const bSet = new Set(draft.b);
  if (draft.kind === "importance") {
    if (aSet.size === bSet.size && [...aSet].every((id) => bSet.has(id))) {
      out.push("importance compares a subset with itself");
    }
  } else {
    const overlap = [...aSet].filter((id) => bSet.has(id));
    if (overlap.length) {
      out.push(`${draft.kind} sides share criteria {${overlap.join(",")}}`);
    }
  }

  const hasRaw = draft.lo !== null || draft.hi !== null;
  if (draft.term !== null && hasRaw) {
    out.push("choose a phrase or raw bounds, not both");
  } else if (draft.term !== null) {
    if (!isKnownTerm(draft.kind, draft.term)) {
      out.push(`no ${draft.kind} phrase "${draft.term}"`);
    }
  } else if (hasRaw) {
    const [rangeLo, rangeHi] = KIND_RANGES[draft.kind];
    const lo = draft.lo ?? rangeLo;
    const hi = draft.hi ?? rangeHi;
    if (!Number.isFinite(lo) || !Number.isFinite(hi)) out.push("raw bounds must be numbers");
    else {
      if (lo > hi) out.push(`raw bounds are inverted (${lo} > ${hi})`);
      if (lo < rangeLo || hi > rangeHi) {
        out.push(`raw bounds leave the ${draft.kind} range [${rangeLo}, ${rangeHi}]`);
      }
    }
  } else {
    out.push("pick a phrase or enter raw bounds");
  }
  return out;
}

/** The bound pair a draft will apply, for preview next to the pickers. */
export function draftBounds(draft: ConstraintDraft): [number, number] | null {
  if (draft.term !== null) {
    if (!isKnownTerm(draft.kind, draft.term)) return null;
    const [lo, hi] = termBounds(draft.kind, draft.term);
    return [lo, hi];
  }
  if (draft.lo === null && draft.hi === null) return null;
  const [rangeLo, rangeHi] = KIND_RANGES[draft.kind];
  return [draft.lo ?? rangeLo, draft.hi ?? rangeHi];
}

export function draftRecord(draft: ConstraintDraft): LinguisticRecord {
  const rec: LinguisticRecord = {
    kind: draft.kind,
    a: [...draft.a].sort((x, y) => x - y),
    b: [...draft.b].sort((x, y) => x - y),
  };
  if (draft.term !== null) {
    rec.term = draft.term;
  } else {
    if (draft.lo !== null) rec.lo = draft.lo;
    if (draft.hi !== null) rec.hi = draft.hi;
    if (draft.twoSided) rec.two_sided = true;
  }
  return rec;
}

export function draftFromRecord(rec: LinguisticRecord): ConstraintDraft {
  return {
    kind: rec.kind as Kind,
    a: [...rec.a],
    b: [...rec.b],
    term: rec.term ?? null,
    lo: rec.lo ?? null,
    hi: rec.hi ?? null,
    twoSided: rec.two_sided ?? false,
  };
}

// Cycle check over the importance statements, run before submit so a
// contradictory loop is caught without a server round trip. A band
// [lo, hi] on mu(a)/mu(b) gives two directed ratio bounds: a over b is
// at least lo, b over a is at least 1/hi. Around any loop the ratios
// multiply to exactly 1, so the statements are contradictory iff some
// loop has a lower-bound product above 1. In logs that is a positive
// weight cycle, which Bellman-Ford finds. "same level" loops multiply
// 0.9 per hop and stay feasible; three "more important" hops multiply
// to 1.3^3 and are blocked.

interface RatioEdge {
  from: string;
  to: string;
  weight: number; // log of the lower bound on mu(from)/mu(to)
}

const CYCLE_TOL = 1e-9;

function ratioEdges(drafts: ConstraintDraft[]): RatioEdge[] {
  const out: RatioEdge[] = [];
  for (const draft of drafts) {
    if (draft.kind !== "importance") continue;
    const bounds = draftBounds(draft);
    if (!bounds) continue;
    const [lo, hi] = bounds;
    const a = [...draft.a].sort((x, y) => x - y).join(",");
    const b = [...draft.b].sort((x, y) => x - y).join(",");
    if (lo > 0) out.push({ from: a, to: b, weight: Math.log(lo) });
    if (hi > 0) out.push({ from: b, to: a, weight: -Math.log(hi) });
  }
  return out;
}

/**
 * Find a contradictory importance loop, returned as the subset labels
 * along it, or null when some weighting satisfies every statement.
 */
export function importanceCycle(drafts: ConstraintDraft[]): string[] | null {
  const edges = ratioEdges(drafts);
  const nodes = [...new Set(edges.flatMap((e) => [e.from, e.to]))];
  if (!nodes.length) return null;

  // Bellman-Ford on negated weights; a relaxation on the extra pass
  // marks a positive cycle. Virtual source reaches every node at 0.
  const dist = new Map(nodes.map((node) => [node, 0]));
  const pred = new Map<string, string>();
  let marked: string | null = null;
  for (let pass = 0; pass <= nodes.length; pass++) {
    marked = null;
    for (const edge of edges) {
      const candidate = (dist.get(edge.from) ?? 0) - edge.weight;
      if (candidate < (dist.get(edge.to) ?? 0) - CYCLE_TOL) {
        dist.set(edge.to, candidate);
        pred.set(edge.to, edge.from);
        marked = edge.to;
      }
    }
    if (!marked) return null;
  }

  // marked is reachable from the cycle; walk predecessors into it
  let probe = marked as string;
  for (let k = 0; k < nodes.length; k++) probe = pred.get(probe) ?? probe;
  const loop = [probe];
  for (let at = pred.get(probe); at && at !== probe; at = pred.get(at)) {
    loop.push(at);
  }
  loop.push(probe);
  return loop.reverse();
}
