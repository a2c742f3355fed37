// Explorer state: derived solely from service responses plus local UI
// selections.  No optimistic updates -- a state transition happens only when
// the service confirms it; rejected actions surface as a toast and leave the
// rest untouched.

import { SessionApi, isError } from './api.js';
import type { Action, LogEntry, ProtocolError, SessionView } from './types.js';

export interface HistoryEntry {
  label: string;
  summary: string;
}

export interface ComparisonSlot {
  label: string;
  view: SessionView;
}

export interface ExplorerState {
  view: SessionView | null;
  inputError: ProtocolError | null; // create-time errors, rendered inline
  toast: string | null;             // non-destructive 409 notices
  history: HistoryEntry[];
  comparisons: ComparisonSlot[];    // up to 2 finalized/abandoned branches
  actionLog: LogEntry[];            // replayable server-side
}

export const initialState: ExplorerState = {
  view: null,
  inputError: null,
  toast: null,
  history: [],
  comparisons: [],
  actionLog: [],
};

function describe(view: SessionView): string {
  if (view.status === 'finalized' && view.antiderivative) {
    return `finalized: ${view.antiderivative.ascii}`;
  }
  if (view.hints.length > 0) {
    return view.hints[0].text;
  }
  if (view.table) {
    return `table has ${view.table.rows.length} row(s)`;
  }
  return 'choose a split';
}

export async function startSession(
  api: SessionApi,
  integrand: string,
  varName: string,
  state: ExplorerState = initialState,
): Promise<ExplorerState> {
  const reply = await api.createSession(integrand, varName);
  if (isError(reply.body)) {
    return { ...state, view: null, inputError: reply.body, actionLog: [] };
  }
  const view = reply.body;
  return {
    ...state,
    view,
    inputError: null,
    toast: null,
    history: [{ label: 'start', summary: describe(view) }],
    actionLog: [{ seq: 0, action: { type: 'create', integrand, var: varName } }],
  };
}

export async function applyAction(
  api: SessionApi,
  state: ExplorerState,
  action: Action,
): Promise<ExplorerState> {
  if (state.view === null) {
    return { ...state, toast: 'no active session' };
  }
  const reply = await api.act(state.view.id, action);
  if (isError(reply.body)) {
    // 409 and friends: keep everything, surface the message
    return { ...state, toast: reply.body.message };
  }
  const view = reply.body;
  return {
    ...state,
    view,
    toast: null,
    history: [...state.history, { label: action.type, summary: describe(view) }],
    actionLog: [...state.actionLog, { seq: state.actionLog.length, action }],
  };
}

export function snapshotComparison(state: ExplorerState, label: string): ExplorerState {
  if (state.view === null) {
    return state;
  }
  const slot = { label, view: state.view };
  const comparisons = [...state.comparisons, slot].slice(-2);
  return { ...state, comparisons };
}

export function emitActionLog(state: ExplorerState): string {
  return state.actionLog.map((e) => JSON.stringify(e)).join('\n');
}
