/**
 * Linguistic vocabulary for constraint statements.
 *
 * The phrase tables mirror the server's exactly: each picker option maps
 * to the bound pair the solver will apply, so what the user sees is what
 * the identification uses. Importance bounds the ratio mu(a)/mu(b);
 * dependence and synergy bound mu(a u b) against mu(a) + mu(b).
 */

export type Kind = "importance" | "dependence" | "synergy";

export const KINDS: readonly Kind[] = ["importance", "dependence", "synergy"];

export type Bounds = readonly [number, number];

const IMPORTANCE: Record<string, Bounds> = {
  "same level": [0.9, 1.1],
  "a is a little more important than b": [1.1, 1.3],
  "a is more important than b": [1.3, 1.7],
  "a is quite more important than b": [1.7, 1.9],
};

const DEPENDENCE: Record<string, Bounds> = {
  "highly dependent": [0.0, 0.0],
  dependent: [0.0, 0.5],
  "a little dependent": [0.5, 1.0],
  independent: [1.0, 1.0],
};

const SYNERGY: Record<string, Bounds> = {
  "high support": [1.0, 1.0],
  support: [0.5, 1.0],
  "a little support": [0.0, 0.5],
};

const TABLES: Record<Kind, Record<string, Bounds>> = {
  importance: IMPORTANCE,
  dependence: DEPENDENCE,
  synergy: SYNERGY,
};

/** Raw-override bounds must stay inside the kind's linguistic range. */
export const KIND_RANGES: Record<Kind, Bounds> = {
  importance: [0.9, 1.9],
  dependence: [0.0, 1.0],
  synergy: [0.0, 1.0],
};

export function normalizeKind(kind: string): Kind {
  let k = kind.trim().toLowerCase();
  if (k === "relative-importance") k = "importance";
  if (k === "importance" || k === "dependence" || k === "synergy") return k;
  throw new Error(`unknown constraint kind: ${kind}`);
}

/** Picker options for one kind, in table order. */
export function termsFor(kind: Kind): string[] {
  return Object.keys(TABLES[kind]);
}

/** The exact bound pair a phrase stands for. */
export function termBounds(kind: Kind, term: string): Bounds {
  const bounds = TABLES[kind][term.trim().toLowerCase()];
  if (!bounds) throw new Error(`unknown ${kind} term: ${term}`);
  return bounds;
}

export function isKnownTerm(kind: Kind, term: string): boolean {
  return term.trim().toLowerCase() in TABLES[kind];
}

/** Short display label, e.g. "more important [1.3, 1.7]". */
export function termLabel(kind: Kind, term: string): string {
  const [lo, hi] = termBounds(kind, term);
  return `${term}  [${lo}, ${hi}]`;
}
