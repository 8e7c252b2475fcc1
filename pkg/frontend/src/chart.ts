import type { IndicesDoc } from "./types.js";

// Pure geometry for the index views. The render layer turns these
// into SVG; tests check the numbers without a DOM.

export interface Bar {
  name: string;
  value: number; // shapley weight
  scaled: number; // value * n
  x: number;
  y: number;
  width: number;
  height: number;
  aboveAverage: boolean;
}

export interface ShapleyChart {
  bars: Bar[];
  /** y of the phi * n = 1 guide line (average weight 1/n). */
  guideY: number;
  width: number;
  height: number;
  maxValue: number;
}

export function shapleyChart(
  shapley: number[],
  names: string[],
  width = 420,
  height = 180,
): ShapleyChart {
  const n = shapley.length;
  if (n === 0 || names.length !== n) {
    throw new Error(`shapley chart needs matching names, got ${names.length} for ${n}`);
  }
  const average = 1 / n;
  // keep the guide comfortably inside the frame
  const maxValue = Math.max(2 * average, ...shapley) * 1.08;
  const slot = width / n;
  const barWidth = slot * 0.6;
  const bars = shapley.map((phi, i) => {
    const h = (phi / maxValue) * height;
    return {
      name: names[i],
      value: phi,
      scaled: phi * n,
      x: i * slot + (slot - barWidth) / 2,
      y: height - h,
      width: barWidth,
      height: h,
      aboveAverage: phi * n > 1 + 1e-12,
    };
  });
  return {
    bars,
    guideY: height - (average / maxValue) * height,
    width,
    height,
    maxValue,
  };
}

export type InteractionSign = "positive" | "negative" | "zero";

export interface HeatCell {
  i: number;
  j: number;
  value: number;
  sign: InteractionSign;
  color: string;
  row: number; // grid placement, 0-based
  col: number;
}

export function interactionSign(value: number, tol = 1e-9): InteractionSign {
  if (value > tol) return "positive";
  if (value < -tol) return "negative";
  return "zero";
}

/** Diverging fill: red for negative, blue for positive, faint near zero. */
export function interactionColor(value: number, scale: number): string {
  const t = scale <= 0 ? 0 : Math.min(1, Math.abs(value) / scale);
  const light = 94 - 46 * t;
  const hue = value >= 0 ? 213 : 8;
  return `hsl(${hue}, 64%, ${light.toFixed(1)}%)`;
}

export function interactionCells(n: number, indices: IndicesDoc): HeatCell[] {
  const values = Object.values(indices.interactions).map(Math.abs);
  const scale = Math.max(0.05, ...values);
  const cells: HeatCell[] = [];
  for (let i = 1; i <= n; i++) {
    for (let j = i + 1; j <= n; j++) {
      const value = indices.interactions[`${i},${j}`];
      if (value === undefined) throw new Error(`missing interaction ${i},${j}`);
      cells.push({
        i,
        j,
        value,
        sign: interactionSign(value),
        color: interactionColor(value, scale),
        row: i - 1,
        col: j - 1,
      });
    }
  }
  return cells;
}

/** Names whose per-criterion flag is set, e.g. the veto list. */
export function flaggedNames(flags: boolean[], names: string[]): string[] {
  return names.filter((_, i) => flags[i]);
}

export interface OverlayRow {
  name: string;
  left: number;
  right: number;
  delta: number;
}

/** Side by side shapley comparison between two identification results. */
export function methodOverlay(
  names: string[],
  left: IndicesDoc,
  right: IndicesDoc,
): OverlayRow[] {
  if (left.shapley.length !== names.length || right.shapley.length !== names.length) {
    throw new Error("overlay needs results over the same criteria");
  }
  return names.map((name, i) => ({
    name,
    left: left.shapley[i],
    right: right.shapley[i],
    delta: right.shapley[i] - left.shapley[i],
  }));
}
