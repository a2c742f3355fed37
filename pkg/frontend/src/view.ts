// Pure view layer: state in, DOM description out.  Every expression string
// placed in a node comes verbatim from a service response (math nodes carry
// the service's latex for the typesetter and the ascii as fallback text).

import type { ExplorerState } from './state.js';
import type { Action, SessionView, TaylorTablePayload } from './types.js';

export interface VNode {
  tag: string;
  attrs?: Record<string, string>;
  children?: Array<VNode | string>;
  action?: Action;          // dispatched on click/Enter; rendered as <button>
  math?: { latex: string; ascii: string };
}

function h(tag: string, attrs?: Record<string, string>, ...children: Array<VNode | string>): VNode {
  return { tag, attrs, children };
}

function mathNode(cell: { ascii: string; latex: string }, cls = 'math'): VNode {
  return { tag: 'span', attrs: { class: cls }, math: { latex: cell.latex, ascii: cell.ascii } };
}

function button(label: string, action: Action, cls = 'action'): VNode {
  return { tag: 'button', attrs: { class: cls, type: 'button' }, children: [label], action };
}

export function renderSuggestions(view: SessionView): VNode {
  const cards = view.suggested_splits.map((sp, i) =>
    h(
      'div',
      { class: 'suggestion-card' },
      h('div', { class: 'rank' }, `#${i + 1} · u is ${sp.lipet_class}`),
      h('div', { class: 'split-u' }, 'u = ', mathNode(sp.u)),
      h('div', { class: 'split-dv' }, 'dv = ', mathNode(sp.dv), ` d${view.problem.var}`),
      button('use this split', { type: 'choose_split', index: sp.index }),
    ),
  );
  return h(
    'section',
    { class: 'suggestions' },
    h('h2', {}, 'choose u and dv'),
    ...cards,
    h(
      'form',
      { class: 'free-split', 'data-role': 'free-split' },
      h('label', {}, 'u = ', h('input', { name: 'u', type: 'text' })),
      h('label', {}, 'dv = ', h('input', { name: 'dv', type: 'text', placeholder: 'integrand / u' })),
      h('button', { type: 'submit' }, 'start table'),
    ),
  );
}

export function renderTableView(view: SessionView): VNode {
  if (view.table === null) {
    return renderSuggestions(view);
  }
  const rows: VNode[] = [
    h(
      'tr',
      { class: 'head' },
      h('th', {}, '+/- (alt.)'),
      h('th', {}, 'u (diff.)'),
      h('th', {}, 'dv (int.)'),
    ),
  ];
  view.table.rows.forEach((row, j) => {
    const last = j === view.table!.rows.length - 1;
    rows.push(
      h(
        'tr',
        { class: last && view.table!.rows.length > 1 ? 'row residual-row' : 'row' },
        h('td', { class: 'sign' }, row.sign),
        h('td', { class: 'u-cell', 'data-row': String(j + 1) }, mathNode(row.u)),
        h('td', { class: 'dv-cell', 'data-row': String(j + 1) }, mathNode(row.dv)),
      ),
    );
    if (!last) {
      // diagonal pairing: row j's u meets row j+1's dv
      rows.push(
        h(
          'tr',
          { class: 'diagonal' },
          h('td', {}),
          h('td', { class: 'arrow', 'data-from-u': String(j + 1), 'data-to-dv': String(j + 2) }, '↘'),
          h('td', {}),
        ),
      );
    }
  });
  const parts: Array<VNode | string> = [h('table', { class: 'ibp-table' }, ...rows)];
  if (view.residual) {
    parts.push(
      h(
        'div',
        { class: 'residual', 'data-role': 'residual' },
        `bottom row: ${view.residual.sign < 0 ? '-' : '+'} ∫ `,
        mathNode(view.residual.integrand),
        ` d${view.problem.var}`,
      ),
    );
  }
  return h('section', { class: 'table-view' }, ...parts);
}

export function renderBanner(view: SessionView): VNode | null {
  if (view.status === 'finalized' && view.antiderivative) {
    return h(
      'div',
      { class: 'banner banner-finalized', role: 'status' },
      'verified antiderivative: ',
      mathNode(view.antiderivative),
      ` + C`,
    );
  }
  if (view.hints.length === 0) {
    return null;
  }
  const hint = view.hints[0];
  const extra: Array<VNode | string> = [];
  if (hint.tag === 'self_similar' && hint.c !== undefined) {
    extra.push(h('span', { class: 'ratio' }, ` (c = ${hint.c})`));
  }
  if (hint.tag === 'harder') {
    extra.push(
      h('span', { class: 'scores' },
        ` residual ${hint.residual_score} vs original ${hint.original_score}`),
    );
  }
  return h('div', { class: `banner banner-${hint.tag}`, role: 'status' }, hint.text, ...extra);
}

export function renderControls(view: SessionView): VNode {
  const buttons: VNode[] = [];
  if (view.status === 'open' && view.table !== null) {
    buttons.push(button('step', { type: 'step' }));
    const hint = view.hints[0];
    if (hint !== undefined && hint.can_stop) {
      const mode = hint.stop_mode ?? 'auto';
      const label = hint.tag === 'self_similar' ? 'solve' : 'stop';
      buttons.push(button(label, { type: 'stop', mode }, 'action stop'));
    }
  }
  if (view.status === 'open' && view.undo_depth > 0) {
    buttons.push(button('undo', { type: 'undo' }));
  }
  if (view.status === 'open') {
    buttons.push(button('abandon', { type: 'abandon' }, 'action danger'));
  }
  return h('div', { class: 'controls' }, ...buttons);
}

export function renderHistory(state: ExplorerState): VNode {
  return h(
    'aside',
    { class: 'history' },
    h('h2', {}, 'derivation history'),
    h(
      'ol',
      {},
      ...state.history.map((e) => h('li', {}, h('b', {}, e.label), ` — ${e.summary}`)),
    ),
  );
}

export function renderComparisons(state: ExplorerState): VNode | null {
  if (state.comparisons.length === 0) {
    return null;
  }
  return h(
    'section',
    { class: 'comparisons' },
    h('h2', {}, 'side by side'),
    ...state.comparisons.map((slot) =>
      h('div', { class: 'comparison-slot' }, h('h3', {}, slot.label), renderTableView(slot.view)),
    ),
  );
}

export function renderTaylorTable(payload: TaylorTablePayload): VNode {
  const rows: VNode[] = [
    h('tr', { class: 'head' }, h('th', {}, '+/-'), h('th', {}, 'u'), h('th', {}, 'dv')),
  ];
  for (const row of payload.table?.rows ?? []) {
    rows.push(
      h(
        'tr',
        { class: 'row' },
        h('td', { class: 'sign' }, row.sign),
        h('td', { class: 'u-cell' }, mathNode({ ascii: row.u, latex: row.u_latex })),
        h('td', { class: 'dv-cell' }, mathNode({ ascii: row.dv, latex: row.dv_latex })),
      ),
    );
  }
  return h(
    'section',
    { class: 'taylor-replay' },
    h('h2', {}, `pinned table (order ${payload.order}, center ${payload.center})`),
    h('table', { class: 'ibp-table' }, ...rows),
    h('div', {}, 'polynomial: ',
      mathNode({ ascii: payload.polynomial, latex: payload.polynomial_latex })),
    h('div', {}, 'remainder integrand: ',
      mathNode({ ascii: payload.remainder_integrand, latex: payload.remainder_integrand_latex })),
  );
}

export function renderExplorer(state: ExplorerState): VNode {
  const children: Array<VNode | string> = [];
  if (state.inputError) {
    const span = state.inputError.span;
    children.push(
      h(
        'div',
        { class: 'input-error', 'data-start': String(span?.start ?? ''), 'data-end': String(span?.end ?? '') },
        state.inputError.message,
      ),
    );
  }
  if (state.toast) {
    children.push(h('div', { class: 'toast', role: 'alert' }, state.toast));
  }
  if (state.view) {
    children.push(
      h('div', { class: 'problem' }, '∫ ', mathNode({
        ascii: state.view.problem.integrand,
        latex: state.view.problem.latex,
      }), ` d${state.view.problem.var}`),
    );
    const banner = renderBanner(state.view);
    if (banner) {
      children.push(banner);
    }
    children.push(renderTableView(state.view));
    children.push(renderControls(state.view));
    children.push(renderHistory(state));
    const cmp = renderComparisons(state);
    if (cmp) {
      children.push(cmp);
    }
  }
  return h('main', { class: 'explorer' }, ...children);
}

export function collectText(node: VNode | string, out: string[] = []): string[] {
  if (typeof node === 'string') {
    out.push(node);
    return out;
  }
  if (node.math) {
    out.push(node.math.ascii, node.math.latex);
  }
  for (const child of node.children ?? []) {
    collectText(child, out);
  }
  return out;
}

export function collectActionNodes(node: VNode | string, out: VNode[] = []): VNode[] {
  if (typeof node === 'string') {
    return out;
  }
  if (node.action) {
    out.push(node);
  }
  for (const child of node.children ?? []) {
    collectActionNodes(child, out);
  }
  return out;
}
