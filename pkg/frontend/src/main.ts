// Bootstrap: wire the explorer to a local session service.

import { SessionApi, httpTransport } from './api.js';
import {
  ExplorerState, applyAction, emitActionLog, initialState, snapshotComparison,
  startSession,
} from './state.js';
import { mount } from './dom.js';
import { renderExplorer, renderTaylorTable } from './view.js';
import type { Action, TaylorTablePayload } from './types.js';

const SERVICE_URL = (window as unknown as { IBP_SERVICE_URL?: string }).IBP_SERVICE_URL
  ?? 'http://127.0.0.1:7341';

const api = new SessionApi(httpTransport(SERVICE_URL));
let state: ExplorerState = initialState;

const root = document.getElementById('explorer') as HTMLElement;
const form = document.getElementById('problem-form') as HTMLFormElement;
const logButton = document.getElementById('download-log') as HTMLButtonElement;
const compareButton = document.getElementById('compare') as HTMLButtonElement;
const taylorInput = document.getElementById('taylor-json') as HTMLTextAreaElement;
const taylorButton = document.getElementById('show-taylor') as HTMLButtonElement;
const taylorRoot = document.getElementById('taylor-view') as HTMLElement;

function redraw(): void {
  mount(root, renderExplorer(state), dispatch);
  const freeForm = root.querySelector('[data-role="free-split"]');
  if (freeForm) {
    freeForm.addEventListener('submit', (ev) => {
      ev.preventDefault();
      const data = new FormData(freeForm as HTMLFormElement);
      const u = String(data.get('u') ?? '').trim();
      const dv = String(data.get('dv') ?? '').trim();
      if (u) {
        dispatch(dv ? { type: 'choose_split', u, dv } : { type: 'choose_split', u });
      }
    });
  }
}

function dispatch(action: Action): void {
  void applyAction(api, state, action).then((next) => {
    state = next;
    redraw();
  });
}

form.addEventListener('submit', (ev) => {
  ev.preventDefault();
  const data = new FormData(form);
  const integrand = String(data.get('integrand') ?? '').trim();
  const varName = String(data.get('var') ?? 'x').trim() || 'x';
  void startSession(api, integrand, varName, state).then((next) => {
    state = next;
    redraw();
  });
});

logButton.addEventListener('click', () => {
  const text = emitActionLog(state);
  const blob = new Blob([text + '\n'], { type: 'application/jsonl' });
  const a = document.createElement('a');
  a.href = URL.createObjectURL(blob);
  a.download = `ibp-session-${state.view?.id ?? 'log'}.jsonl`;
  a.click();
  URL.revokeObjectURL(a.href);
});

compareButton.addEventListener('click', () => {
  state = snapshotComparison(state, state.view?.status ?? 'branch');
  redraw();
});

taylorButton.addEventListener('click', () => {
  try {
    const payload = JSON.parse(taylorInput.value) as TaylorTablePayload;
    mount(taylorRoot, renderTaylorTable(payload), dispatch);
  } catch {
    taylorRoot.textContent = 'paste the JSON output of: ibp --json taylor ...';
  }
});

redraw();
