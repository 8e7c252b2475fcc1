import { ApiClient, ApiError, InfeasibleApiError, StaleRevisionError } from "./api.js";
import { draftFromRecord, draftRecord, emptyDraft, type ConstraintDraft } from "./editor.js";
import { editorStatus, renderEditor } from "./editor-view.js";
import {
  el,
  emptyState,
  renderInteractions,
  renderLattice,
  renderOverlay,
  renderRanking,
  renderReport,
  renderResultMeta,
  renderShapley,
} from "./render.js";
import {
  adoptSession,
  currentResult,
  initialState,
  overlayResult,
  showStaleFlag,
  solvedMethods,
  type UiState,
} from "./state.js";
import type { InfeasibilityReport, Method, RankResponse } from "./types.js";

/**
 * Single page application over the session service. The page keeps a
 * mirror of the session document plus editor drafts and re-renders on
 * every change; all identification happens on the server.
 */

interface Buffers {
  criteria: string;
  preferences: string;
  intervals: string;
  samples: string;
  densities: string;
  concepts: string;
}

export class App {
  private readonly api: ApiClient;
  private readonly root: HTMLElement;
  private state: UiState = initialState();
  private drafts: ConstraintDraft[] = [];
  private buffers: Buffers = {
    criteria: "MIQ, RS, CX, FX, CT",
    preferences: "[]",
    intervals: "[]",
    samples: "[]",
    densities: "",
    concepts: "",
  };
  private ranking: RankResponse | null = null;
  private report: InfeasibilityReport | null = null;
  private capacityJson: string | null = null;
  private busy = false;

  constructor(root: HTMLElement, api: ApiClient = new ApiClient()) {
    this.root = root;
    this.api = api;
    this.render();
  }

  private setError(message: string | null): void {
    this.state = { ...this.state, lastError: message };
    this.render();
  }

  /** Wraps a server call with busy handling and the 409 reload prompt. */
  private async run(action: () => Promise<void>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await action();
      this.state = { ...this.state, lastError: null };
    } catch (err) {
      if (err instanceof StaleRevisionError) {
        const reload = window.confirm(
          `Someone else moved this session to revision ${err.revision}. Reload the latest state? Unsaved edits stay in the editor.`,
        );
        if (reload) await this.refresh();
        else this.state = { ...this.state, lastError: err.message };
      } else if (err instanceof InfeasibleApiError) {
        this.report = err.report;
        this.state = { ...this.state, lastError: err.detail };
      } else if (err instanceof ApiError) {
        this.state = { ...this.state, lastError: err.message };
      } else {
        this.state = { ...this.state, lastError: String(err) };
      }
    } finally {
      this.busy = false;
      this.render();
    }
  }

  private async refresh(): Promise<void> {
    if (!this.state.session) return;
    const doc = await this.api.getSession(this.state.session.id);
    this.state = adoptSession(this.state, doc);
  }

  private async createSession(): Promise<void> {
    const names = this.buffers.criteria.split(",").map((s) => s.trim()).filter(Boolean);
    const doc = await this.api.createSession(names);
    this.state = adoptSession(initialState(), doc);
    this.drafts = doc.constraints.linguistic.map(draftFromRecord);
    this.ranking = null;
    this.report = null;
    this.capacityJson = null;
  }

  private parseBuffer(name: keyof Buffers, fallback: unknown): unknown {
    const text = this.buffers[name].trim();
    if (!text) return fallback;
    try {
      return JSON.parse(text);
    } catch {
      throw new ApiError(0, `${name} field is not valid JSON`);
    }
  }

  private async saveConstraints(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const doc = await this.api.putConstraints(
      session.id,
      {
        linguistic: this.drafts.map(draftRecord),
        preferences: this.parseBuffer("preferences", []) as never,
        intervals: this.parseBuffer("intervals", []) as never,
      },
      session.revision,
    );
    this.state = { ...adoptSession(this.state, doc), pendingEdits: false };
  }

  private async uploadSamples(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const doc = await this.api.postSamples(
      session.id,
      this.parseBuffer("samples", []) as never,
      session.revision,
    );
    this.state = adoptSession(this.state, doc);
  }

  private async uploadConcepts(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const doc = await this.api.postConcepts(
      session.id,
      this.parseBuffer("concepts", null) as never,
      session.revision,
    );
    this.state = adoptSession(this.state, doc);
  }

  private async identify(method: Method): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const body =
      method === "sugeno" && this.buffers.densities.trim()
        ? { densities: this.parseBuffer("densities", null) }
        : undefined;
    await this.api.identify(session.id, method, session.revision, body);
    this.report = null;
    this.capacityJson = null;
    await this.refresh();
    this.state = { ...this.state, viewing: method };
  }

  private async rank(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const method = this.state.viewing ?? undefined;
    this.ranking = await this.api.rank(session.id, method ? { method } : {});
  }

  private async showCapacity(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    this.capacityJson = await this.api.capacityText(session.id, this.state.viewing ?? undefined);
  }

  private markDirty(): void {
    this.state = { ...this.state, pendingEdits: true };
    this.render();
  }

  private textarea(name: keyof Buffers, rows: number, placeholder: string): HTMLTextAreaElement {
    const area = el("textarea", { rows: String(rows), placeholder });
    area.value = this.buffers[name];
    area.addEventListener("input", () => {
      this.buffers[name] = area.value;
    });
    return area;
  }

  private button(label: string, onClick: () => void, disabled = false): HTMLButtonElement {
    const b = el("button", { type: "button", text: label });
    b.disabled = disabled || this.busy;
    b.addEventListener("click", onClick);
    return b;
  }

  private renderSessionBar(): HTMLElement {
    const bar = el("div", { class: "session-bar" });
    const input = el("input", { type: "text", class: "criteria-input" });
    input.value = this.buffers.criteria;
    input.addEventListener("input", () => {
      this.buffers.criteria = input.value;
    });
    bar.append(
      el("label", { text: "criteria " }, input),
      this.button("new session", () => void this.run(() => this.createSession())),
    );
    const session = this.state.session;
    if (session) {
      bar.append(
        el("span", { class: "badge", text: `session ${session.id.slice(0, 8)}` }),
        el("span", { class: "badge", text: `revision ${session.revision}` }),
        this.button("refresh", () => void this.run(() => this.refresh())),
      );
      if (this.state.pendingEdits) {
        bar.append(el("span", { class: "badge pending", text: "unsaved edits" }));
      }
    }
    return bar;
  }

  private renderEditorPanel(session: NonNullable<UiState["session"]>): HTMLElement {
    const panel = el("section", { class: "panel" }, el("h2", { text: "constraints" }));
    panel.append(
      renderEditor(this.drafts, session.criteria, {
        update: (index, draft) => {
          this.drafts[index] = draft;
          this.markDirty();
        },
        remove: (index) => {
          this.drafts.splice(index, 1);
          this.markDirty();
        },
        add: () => {
          this.drafts.push(emptyDraft());
          this.markDirty();
        },
      }),
    );
    const status = editorStatus(this.drafts, session.n);
    if (status.message) panel.append(el("div", { class: "problems", text: status.message }));
    panel.append(
      el("details", {},
        el("summary", { text: "preferences and interval scores (JSON)" }),
        this.textarea("preferences", 4, '[{"type": "shapley_order", "more": 1, "less": 2}]'),
        this.textarea("intervals", 3, '[{"sample": 1, "delta": 0.35}]'),
      ),
      this.button("save constraints", () => void this.run(() => this.saveConstraints()), status.blocked),
    );

    panel.append(
      el("h2", { text: "data" }),
      el("details", {},
        el("summary", { text: "samples (JSON)" }),
        this.textarea("samples", 4, '[{"f": [0.2, 0.6, 0.9], "y": 0.7}]'),
        this.button("upload samples", () => void this.run(() => this.uploadSamples())),
      ),
      el("details", {},
        el("summary", { text: "concepts (JSON)" }),
        this.textarea("concepts", 4, '{"criteria": [...], "concepts": [...]}'),
        this.button("upload concepts", () => void this.run(() => this.uploadConcepts())),
      ),
      el("details", {},
        el("summary", { text: "singleton densities for sugeno (JSON)" }),
        this.textarea("densities", 3, '{"n": 5, "densities": [0.3, 0.3, 0.2, 0.2, 0.25]}'),
      ),
    );

    const identifyRow = el("div", { class: "identify-row" });
    for (const method of ["semantic", "learn", "sugeno"] as Method[]) {
      identifyRow.append(this.button(`identify ${method}`, () => void this.run(() => this.identify(method))));
    }
    panel.append(el("h2", { text: "identify" }), identifyRow);
    return panel;
  }

  private renderResultPanel(session: NonNullable<UiState["session"]>): HTMLElement {
    const panel = el("section", { class: "panel results" }, el("h2", { text: "result" }));
    const solved = solvedMethods(session);
    const result = currentResult(this.state);

    if (solved.length) {
      const picker = el("div", { class: "view-pickers" });
      const viewSelect = el("select");
      for (const method of solved) {
        const option = el("option", { value: method, text: method });
        if (this.state.viewing === method) option.selected = true;
        viewSelect.append(option);
      }
      viewSelect.addEventListener("change", () => {
        this.state = { ...this.state, viewing: viewSelect.value as Method };
        this.ranking = null;
        this.capacityJson = null;
        this.render();
      });
      picker.append(el("label", { text: "view " }, viewSelect));

      const overlaySelect = el("select");
      overlaySelect.append(el("option", { value: "", text: "(none)" }));
      for (const method of solved.filter((m) => m !== this.state.viewing)) {
        const option = el("option", { value: method, text: method });
        if (this.state.overlay === method) option.selected = true;
        overlaySelect.append(option);
      }
      overlaySelect.addEventListener("change", () => {
        this.state = {
          ...this.state,
          overlay: (overlaySelect.value || null) as Method | null,
        };
        this.render();
      });
      picker.append(el("label", { text: "compare with " }, overlaySelect));
      panel.append(picker);
    }

    if (this.report) panel.append(renderReport(this.report));

    if (!result) {
      if (!this.report) panel.append(emptyState());
      return panel;
    }

    panel.append(renderResultMeta(result, showStaleFlag(this.state)));
    panel.append(el("h3", { text: "capacity lattice" }));
    panel.append(renderLattice(result.capacity, session.criteria));
    panel.append(el("h3", { text: "criterion weights" }));
    panel.append(renderShapley(result.indices, session.criteria));
    panel.append(el("h3", { text: "pairwise interactions" }));
    panel.append(renderInteractions(result.indices, session.criteria));

    const other = overlayResult(this.state);
    if (other && this.state.overlay) {
      panel.append(el("h3", { text: "method comparison" }));
      panel.append(
        renderOverlay(session.criteria, result.method, result.indices, other.method, other.indices),
      );
    }

    const actions = el("div", { class: "result-actions" });
    actions.append(
      this.button("rank concepts", () => void this.run(() => this.rank()), session.concepts === null),
      this.button("show capacity json", () => void this.run(() => this.showCapacity())),
    );
    panel.append(actions);

    if (this.ranking) {
      panel.append(el("h3", { text: "concept ranking" }));
      panel.append(renderRanking(this.ranking.capacity_source, this.ranking.ranking));
    }
    if (this.capacityJson) {
      panel.append(el("pre", { class: "capacity-json", text: this.capacityJson }));
    }
    return panel;
  }

  render(): void {
    this.root.replaceChildren();
    this.root.append(el("h1", { text: "capacity studio" }));
    this.root.append(this.renderSessionBar());
    if (this.state.lastError) {
      this.root.append(el("div", { class: "error-banner", text: this.state.lastError }));
    }
    const session = this.state.session;
    if (!session) {
      this.root.append(
        el("p", {
          class: "hint",
          text: "Name the criteria and start a session to begin eliciting a capacity.",
        }),
      );
      return;
    }
    const columns = el("div", { class: "columns" });
    columns.append(this.renderEditorPanel(session), this.renderResultPanel(session));
    this.root.append(columns);
  }
}

export function mount(rootId = "app"): App {
  const root = document.getElementById(rootId);
  if (!root) throw new Error(`no #${rootId} element to mount on`);
  return new App(root);
}
