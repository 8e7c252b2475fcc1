import { flaggedNames, interactionCells, methodOverlay, shapleyChart } from "./chart.js";
import { coefficientColor, Lattice } from "./lattice.js";
import type {
  CapacityDoc,
  IndicesDoc,
  InfeasibilityReport,
  RankedRow,
  ResultDoc,
} from "./types.js";

// DOM builders for the result views. Everything here renders documents
// the server produced; nothing recomputes capacities or indices.

type Child = Node | string | null | undefined;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "text") node.textContent = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    if (child == null) continue;
    node.append(child);
  }
  return node;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svg(tag: string, attrs: Record<string, string> = {}, ...children: Child[]): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  for (const child of children) {
    if (child == null) continue;
    node.append(child);
  }
  return node;
}

function fmt(value: number, digits = 4): string {
  return value.toFixed(digits);
}

/** Subset lattice colored by coefficient, layered by cardinality. */
export function renderLattice(doc: CapacityDoc, names: string[]): HTMLElement {
  const lattice = new Lattice(doc);
  const perLayer = new Map<number, number>();
  for (const node of lattice.nodes) {
    perLayer.set(node.card, (perLayer.get(node.card) ?? 0) + 1);
  }
  const widest = Math.max(...perLayer.values());
  const width = Math.max(460, 64 * widest);
  const height = 90 * lattice.layerCount();
  const pad = 34;
  const px = (x: number) => pad + x * (width - 2 * pad);
  const py = (y: number) => pad + y * (height - 2 * pad);

  const root = svg("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "lattice",
    role: "img",
  });
  for (const edge of lattice.edges) {
    const a = lattice.node(edge.from);
    const b = lattice.node(edge.to);
    root.append(
      svg("line", {
        x1: String(px(a.x)),
        y1: String(py(a.y)),
        x2: String(px(b.x)),
        y2: String(py(b.y)),
        class: "lattice-edge",
      }),
    );
  }
  for (const node of lattice.nodes) {
    const label = node.card === 1 ? names[node.members[0] - 1] ?? node.key : node.key;
    const group = svg("g", {
      class: node.fixed ? "lattice-node fixed" : "lattice-node",
      "data-subset": node.key,
    });
    group.append(
      svg("circle", {
        cx: String(px(node.x)),
        cy: String(py(node.y)),
        r: "13",
        fill: coefficientColor(node.value),
      }),
      svg("text", {
        x: String(px(node.x)),
        y: String(py(node.y) + 26),
        "text-anchor": "middle",
        class: "lattice-label",
      }, label || "empty"),
      svg("title", {}, `{${node.key || ""}} = ${fmt(node.value)}`),
    );
    root.append(group);
  }

  const host = el("div", { class: "panel-body" });
  host.append(root);
  host.append(
    el("p", {
      class: "hint",
      text: `${lattice.coefficientNodes().length} coefficients over ${lattice.layerCount()} layers; darker means closer to 1`,
    }),
  );
  return host;
}

/** Bar chart of shapley weights with the average guide (phi times n above 1 matters). */
export function renderShapley(indices: IndicesDoc, names: string[]): HTMLElement {
  const chart = shapleyChart(indices.shapley, names);
  const pad = 26;
  const root = svg("svg", {
    viewBox: `0 0 ${chart.width + 2 * pad} ${chart.height + 2 * pad}`,
    class: "shapley",
    role: "img",
  });
  for (const bar of chart.bars) {
    root.append(
      svg("rect", {
        x: String(pad + bar.x),
        y: String(pad + bar.y),
        width: String(bar.width),
        height: String(Math.max(bar.height, 0.5)),
        class: bar.aboveAverage ? "bar above" : "bar",
        "data-name": bar.name,
      }, svg("title", {}, `${bar.name}: phi = ${fmt(bar.value)}, scaled ${fmt(bar.scaled, 3)}`)),
      svg("text", {
        x: String(pad + bar.x + bar.width / 2),
        y: String(pad + chart.height + 15),
        "text-anchor": "middle",
        class: "axis-label",
      }, bar.name),
      svg("text", {
        x: String(pad + bar.x + bar.width / 2),
        y: String(pad + bar.y - 4),
        "text-anchor": "middle",
        class: "bar-value",
      }, fmt(bar.value, 3)),
    );
  }
  root.append(
    svg("line", {
      x1: String(pad),
      y1: String(pad + chart.guideY),
      x2: String(pad + chart.width),
      y2: String(pad + chart.guideY),
      class: "guide",
    }),
    svg("text", {
      x: String(pad + chart.width + 2),
      y: String(pad + chart.guideY + 4),
      class: "guide-label",
    }, "avg"),
  );
  const host = el("div", { class: "panel-body" });
  host.append(root);
  host.append(el("p", { class: "hint", text: "bars above the guide carry more than average weight" }));
  return host;
}

/** Upper triangle of pairwise interactions plus the label summary. */
export function renderInteractions(indices: IndicesDoc, names: string[]): HTMLElement {
  const n = names.length;
  const cells = interactionCells(n, indices);
  const byPair = new Map(cells.map((c) => [`${c.i},${c.j}`, c]));

  const table = el("table", { class: "heatmap" });
  const head = el("tr", {}, el("th"));
  for (let j = 2; j <= n; j++) head.append(el("th", { text: names[j - 1] }));
  table.append(head);
  for (let i = 1; i < n; i++) {
    const row = el("tr", {}, el("th", { text: names[i - 1] }));
    for (let j = 2; j <= n; j++) {
      if (j <= i) {
        row.append(el("td", { class: "blank" }));
        continue;
      }
      const cell = byPair.get(`${i},${j}`);
      if (!cell) continue;
      const td = el("td", {
        class: `cell ${cell.sign}`,
        title: `I(${names[i - 1]}, ${names[j - 1]}) = ${fmt(cell.value)} (${indices.pair_labels[`${i},${j}`] ?? ""})`,
        text: fmt(cell.value, 3),
      });
      td.style.background = cell.color;
      row.append(td);
    }
    table.append(row);
  }

  const host = el("div", { class: "panel-body" });
  host.append(table);
  const notes: string[] = [];
  const veto = flaggedNames(indices.veto, names);
  const passing = flaggedNames(indices.pass, names);
  if (veto.length) notes.push(`veto behavior: ${veto.join(", ")}`);
  if (passing.length) notes.push(`pass behavior: ${passing.join(", ")}`);
  if (notes.length) host.append(el("p", { class: "hint", text: notes.join("; ") }));
  return host;
}

export function renderOverlay(
  names: string[],
  leftMethod: string,
  left: IndicesDoc,
  rightMethod: string,
  right: IndicesDoc,
): HTMLElement {
  const rows = methodOverlay(names, left, right);
  const table = el("table", { class: "overlay" });
  table.append(
    el("tr", {},
      el("th", { text: "criterion" }),
      el("th", { text: `phi (${leftMethod})` }),
      el("th", { text: `phi (${rightMethod})` }),
      el("th", { text: "delta" }),
    ),
  );
  for (const row of rows) {
    table.append(
      el("tr", {},
        el("td", { text: row.name }),
        el("td", { text: fmt(row.left) }),
        el("td", { text: fmt(row.right) }),
        el("td", { text: (row.delta >= 0 ? "+" : "") + fmt(row.delta) }),
      ),
    );
  }
  const host = el("div", { class: "panel-body" });
  host.append(table);
  return host;
}

export function renderRanking(source: string, rows: RankedRow[]): HTMLElement {
  const table = el("table", { class: "ranking" });
  table.append(
    el("tr", {},
      el("th", { text: "#" }),
      el("th", { text: "concept" }),
      el("th", { text: "score" }),
      el("th", { text: "gates" }),
    ),
  );
  for (const row of rows) {
    table.append(
      el("tr", {},
        el("td", { text: String(row.rank) }),
        el("td", { text: row.name }),
        el("td", { text: fmt(row.score) }),
        el("td", { text: row.constraints_met.every(Boolean) ? "met" : "failed" }),
      ),
    );
  }
  const host = el("div", { class: "panel-body" });
  host.append(el("p", { class: "hint", text: `capacity source: ${source}` }));
  host.append(table);
  return host;
}

export function renderReport(report: InfeasibilityReport): HTMLElement {
  const host = el("div", { class: "infeasible" });
  host.append(el("h3", { text: "constraint system is infeasible" }));
  host.append(el("p", { text: `largest violation ${fmt(report.max_violation, 4)}` }));
  const list = el("ul");
  for (const item of report.worst_constraints) {
    list.append(el("li", { text: `${item.constraint} (by ${fmt(item.violation, 4)})` }));
  }
  host.append(list);
  if (report.suggested_relaxation?.length) {
    host.append(
      el("p", { text: `dropping these restores feasibility: ${report.suggested_relaxation.join("; ")}` }),
    );
  }
  return host;
}

export function renderResultMeta(result: ResultDoc, stale: boolean): HTMLElement {
  const meta = el("div", { class: "result-meta" });
  meta.append(el("span", { class: "badge", text: result.method }));
  meta.append(el("span", { class: "badge", text: `status: ${result.status}` }));
  meta.append(el("span", { class: "badge", text: `revision ${result.revision}` }));
  if (result.fit_error != null) {
    meta.append(el("span", { class: "badge", text: `fit error ${fmt(result.fit_error, 5)}` }));
  }
  if (stale) {
    meta.append(el("span", {
      class: "badge stale",
      text: "stale: constraints changed since this solve",
    }));
  }
  return meta;
}

export function emptyState(): HTMLElement {
  return el("div", { class: "empty-state" },
    el("p", { text: "No identification yet." }),
    el("p", {
      text: "Enter constraints on the left and run semantic identification, or upload samples and densities for the other methods.",
    }),
  );
}
