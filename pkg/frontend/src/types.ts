/** Wire document shapes for the capacity-studio session API. */

export type Method = "sugeno" | "learn" | "semantic";

export interface CapacityDoc {
  n: number;
  /** Subset key "1,3" (ascending, comma-joined) to coefficient. */
  coefficients: Record<string, number>;
}

export interface IndicesDoc {
  shapley: number[];
  shapley_scaled: number[];
  interactions: Record<string, number>;
  pair_labels: Record<string, string>;
  /** Per-criterion flags, index-aligned with the criteria. */
  veto: boolean[];
  pass: boolean[];
}

export interface KktDoc {
  stationarity: number;
  primal: number;
  complementarity: number;
  dual: number;
}

export interface ResultDoc {
  method: Method;
  status: string;
  capacity: CapacityDoc;
  fit_error: number | null;
  objective: number | null;
  kkt: KktDoc | null;
  active_constraints: string[];
  indices: IndicesDoc;
  diagnostics: Record<string, unknown>;
  revision: number;
}

export interface LinguisticRecord {
  kind: string;
  a: number[];
  b: number[];
  term?: string;
  lo?: number;
  hi?: number;
  two_sided?: boolean;
}

export interface PreferenceRecord {
  type: "ranking" | "shapley_order" | "shapley_equal" | "interaction_order" | "interaction_equal";
  [field: string]: unknown;
}

export interface IntervalRecord {
  sample: number | string;
  delta?: number;
}

export interface SampleRecord {
  f: number[];
  y: number;
  label?: string;
}

export interface ConstraintSet {
  linguistic: LinguisticRecord[];
  preferences: PreferenceRecord[];
  intervals: IntervalRecord[];
}

export interface ConceptRecord {
  name: string;
  values: number[];
  constraints_met?: boolean | boolean[];
}

export interface ConceptsDoc {
  criteria: string[];
  concepts: ConceptRecord[];
}

export interface SessionDoc {
  id: string;
  criteria: string[];
  n: number;
  revision: number;
  constraints: ConstraintSet;
  samples: SampleRecord[];
  concepts: ConceptsDoc | null;
  densities: Record<string, unknown> | null;
  results: Partial<Record<Method, ResultDoc>>;
  history: ResultDoc[];
}

export interface IndicesResponse {
  method: Method;
  computed_at: number;
  indices: IndicesDoc;
  revision: number;
}

export interface RankedRow {
  rank: number;
  name: string;
  score: number;
  values: number[];
  constraints_met: boolean[];
}

export interface RankResponse {
  capacity_source: string;
  ranking: RankedRow[];
  revision: number;
}

export interface InfeasibilityReport {
  max_violation: number;
  worst_constraints: { constraint: string; violation: number }[];
  suggested_relaxation?: string[];
}
