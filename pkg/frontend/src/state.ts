import type { Method, ResultDoc, SessionDoc } from "./types.js";

/**
 * Client-side mirror of one session. The server owns the truth; this
 * tracks what the views need between refreshes: the last session
 * document, which result is on screen, local edits not yet saved, and
 * whether the shown result predates the constraints it sits next to.
 */

export interface UiState {
  session: SessionDoc | null;
  /** Method whose result is displayed; null shows the empty state. */
  viewing: Method | null;
  /** Second method for the side by side overlay. */
  overlay: Method | null;
  /** Editor rows differ from the last saved constraint set. */
  pendingEdits: boolean;
  lastError: string | null;
}

export function initialState(): UiState {
  return {
    session: null,
    viewing: null,
    overlay: null,
    pendingEdits: false,
    lastError: null,
  };
}

export function currentResult(state: UiState): ResultDoc | null {
  if (!state.session || !state.viewing) return null;
  return state.session.results[state.viewing] ?? null;
}

export function overlayResult(state: UiState): ResultDoc | null {
  if (!state.session || !state.overlay) return null;
  return state.session.results[state.overlay] ?? null;
}

/** A result computed at an older revision than the session holds now. */
export function resultIsStale(result: ResultDoc, session: SessionDoc): boolean {
  return result.revision !== session.revision;
}

/**
 * Whether the staleness flag should show on the result panel: the
 * constraints moved on (saved edits bumped the revision) or the editor
 * holds unsaved rows. Either way the picture no longer matches what
 * identification saw.
 */
export function showStaleFlag(state: UiState): boolean {
  const result = currentResult(state);
  if (!result || !state.session) return false;
  return state.pendingEdits || resultIsStale(result, state.session);
}

/** Methods that already have a result, for view and overlay pickers. */
export function solvedMethods(session: SessionDoc): Method[] {
  const order: Method[] = ["semantic", "learn", "sugeno"];
  return order.filter((m) => session.results[m] !== undefined);
}

export function adoptSession(state: UiState, session: SessionDoc): UiState {
  const solved = solvedMethods(session);
  let viewing = state.viewing;
  if (viewing && !solved.includes(viewing)) viewing = null;
  if (!viewing && solved.length) viewing = solved[0];
  let overlay = state.overlay;
  if (overlay && (!solved.includes(overlay) || overlay === viewing)) overlay = null;
  return { ...state, session, viewing, overlay, lastError: null };
}
