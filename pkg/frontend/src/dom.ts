// Thin adapter from view descriptions to real DOM nodes.  Math spans hand
// the service's latex to a client-side typesetter when one is loaded
// (window.katex); otherwise the ascii form is shown as text.

import type { Action } from './types.js';
import type { VNode } from './view.js';

declare global {
  interface Window {
    katex?: { render(tex: string, el: HTMLElement, opts?: object): void };
  }
}

export type Dispatch = (action: Action) => void;

export function toElement(node: VNode | string, dispatch: Dispatch): Node {
  if (typeof node === 'string') {
    return document.createTextNode(node);
  }
  const el = document.createElement(node.action ? 'button' : node.tag);
  for (const [k, v] of Object.entries(node.attrs ?? {})) {
    el.setAttribute(k, v);
  }
  if (node.action) {
    el.setAttribute('type', 'button');
    el.addEventListener('click', () => dispatch(node.action as Action));
  }
  if (node.math) {
    if (window.katex) {
      try {
        window.katex.render(node.math.latex, el as HTMLElement, { throwOnError: false });
      } catch {
        el.textContent = node.math.ascii;
      }
    } else {
      el.textContent = node.math.ascii;
    }
    el.setAttribute('data-ascii', node.math.ascii);
  }
  for (const child of node.children ?? []) {
    el.appendChild(toElement(child, dispatch));
  }
  return el;
}

export function mount(root: HTMLElement, node: VNode, dispatch: Dispatch): void {
  root.replaceChildren(toElement(node, dispatch));
}
