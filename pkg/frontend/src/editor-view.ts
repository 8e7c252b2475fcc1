import {
  draftBounds,
  draftProblems,
  importanceCycle,
  type ConstraintDraft,
} from "./editor.js";
import { el } from "./render.js";
import { KINDS, termsFor, type Kind } from "./terms.js";

// Editor widgets for the linguistic statement list. One row per draft:
// kind select, two subset pickers, the phrase picker with its bound
// preview, and the raw bound override. Problems render inline and the
// caller disables save while any row has them or the set has a cycle.

export interface EditorHooks {
  update(index: number, draft: ConstraintDraft): void;
  remove(index: number): void;
  add(): void;
}

const RAW_OPTION = "(raw bounds)";

function subsetPicker(
  side: "a" | "b",
  chosen: number[],
  names: string[],
  onChange: (ids: number[]) => void,
): HTMLElement {
  const box = el("span", { class: "subset-picker" }, el("b", { text: side }));
  names.forEach((name, idx) => {
    const id = idx + 1;
    const input = el("input", { type: "checkbox" });
    input.checked = chosen.includes(id);
    input.addEventListener("change", () => {
      const next = names
        .map((_, k) => k + 1)
        .filter((cid) => (cid === id ? input.checked : chosen.includes(cid)));
      onChange(next);
    });
    box.append(el("label", {}, input, name));
  });
  return box;
}

function termPicker(draft: ConstraintDraft, onChange: (term: string | null) => void): HTMLElement {
  const select = el("select", { class: "term-picker" });
  for (const term of termsFor(draft.kind)) {
    const option = el("option", { value: term, text: term });
    if (draft.term === term) option.selected = true;
    select.append(option);
  }
  const raw = el("option", { value: RAW_OPTION, text: RAW_OPTION });
  if (draft.term === null) raw.selected = true;
  select.append(raw);
  select.addEventListener("change", () => {
    onChange(select.value === RAW_OPTION ? null : select.value);
  });
  return select;
}

function numberInput(
  value: number | null,
  placeholder: string,
  onChange: (v: number | null) => void,
): HTMLInputElement {
  const input = el("input", { type: "number", step: "0.05", placeholder, class: "raw-bound" });
  if (value !== null) input.value = String(value);
  input.addEventListener("change", () => {
    input.value === "" ? onChange(null) : onChange(Number(input.value));
  });
  return input;
}

function draftRow(
  draft: ConstraintDraft,
  index: number,
  names: string[],
  hooks: EditorHooks,
): HTMLElement {
  const row = el("div", { class: "constraint-row" });

  const kindSelect = el("select", { class: "kind-picker" });
  for (const kind of KINDS) {
    const option = el("option", { value: kind, text: kind });
    if (draft.kind === kind) option.selected = true;
    kindSelect.append(option);
  }
  kindSelect.addEventListener("change", () => {
    // phrase tables differ per kind, so switching resets the phrase
    hooks.update(index, { ...draft, kind: kindSelect.value as Kind, term: null });
  });

  row.append(
    kindSelect,
    subsetPicker("a", draft.a, names, (ids) => hooks.update(index, { ...draft, a: ids })),
    subsetPicker("b", draft.b, names, (ids) => hooks.update(index, { ...draft, b: ids })),
    termPicker(draft, (term) => hooks.update(index, { ...draft, term, lo: null, hi: null })),
  );

  if (draft.term === null) {
    const two = el("input", { type: "checkbox", title: "force both bound rows" });
    two.checked = draft.twoSided;
    two.addEventListener("change", () => hooks.update(index, { ...draft, twoSided: two.checked }));
    row.append(
      numberInput(draft.lo, "lo", (lo) => hooks.update(index, { ...draft, lo })),
      numberInput(draft.hi, "hi", (hi) => hooks.update(index, { ...draft, hi })),
      el("label", { class: "two-sided" }, two, "two-sided"),
    );
  }

  const bounds = draftBounds(draft);
  if (bounds) {
    row.append(el("span", { class: "bounds-preview", text: `[${bounds[0]}, ${bounds[1]}]` }));
  }

  const remove = el("button", { type: "button", class: "remove", text: "remove" });
  remove.addEventListener("click", () => hooks.remove(index));
  row.append(remove);

  const problems = draftProblems(draft, names.length);
  if (problems.length) {
    row.append(el("div", { class: "problems", text: problems.join("; ") }));
  }
  return row;
}

export interface EditorStatus {
  blocked: boolean;
  message: string | null;
}

/** Validity of the whole draft list, shown next to the save button. */
export function editorStatus(drafts: ConstraintDraft[], n: number): EditorStatus {
  const broken = drafts.filter((d) => draftProblems(d, n).length > 0).length;
  if (broken) {
    return { blocked: true, message: `${broken} statement(s) need fixing before save` };
  }
  const cycle = importanceCycle(drafts);
  if (cycle) {
    const path = cycle.map((key) => `{${key}}`).join(" > ");
    return { blocked: true, message: `importance statements contradict in a loop: ${path}` };
  }
  return { blocked: false, message: null };
}

export function renderEditor(
  drafts: ConstraintDraft[],
  names: string[],
  hooks: EditorHooks,
): HTMLElement {
  const host = el("div", { class: "editor" });
  drafts.forEach((draft, index) => host.append(draftRow(draft, index, names, hooks)));
  const add = el("button", { type: "button", class: "add", text: "add statement" });
  add.addEventListener("click", () => hooks.add());
  host.append(add);
  return host;
}
