import { readFileSync } from 'node:fs';
import { expect } from 'vitest';

import type { Transport } from '../src/api.js';

export interface Exchange {
  request: { method: string; path: string; body?: unknown };
  response: { status: number; body: unknown };
}

export interface Fixture {
  name: string;
  exchanges: Exchange[];
  client_log?: Array<{ seq: number; action: Record<string, unknown> }>;
  replay?: { antiderivative: { ascii: string; latex: string } | null; status: string };
}

export function loadFixture(name: string): Fixture {
  const url = new URL(`./fixtures/${name}.json`, import.meta.url);
  return JSON.parse(readFileSync(url, 'utf8')) as Fixture;
}

function canonical(v: unknown): string {
  if (v === undefined) {
    return 'undefined';
  }
  return JSON.stringify(v, (_key, value) =>
    value && typeof value === 'object' && !Array.isArray(value)
      ? Object.fromEntries(Object.entries(value).sort(([a], [b]) => (a < b ? -1 : 1)))
      : value,
  );
}

/** Transport that replays a recorded fixture and insists the client sends
 *  exactly the documented protocol, byte for byte (modulo the session id). */
export function fixtureTransport(fixture: Fixture): Transport & { done(): void } {
  let cursor = 0;
  let sessionId: string | null = null;
  const transport = async (method: string, path: string, body?: unknown) => {
    expect(cursor, `unexpected extra request ${method} ${path}`).toBeLessThan(
      fixture.exchanges.length,
    );
    const exchange = fixture.exchanges[cursor];
    cursor += 1;
    const expectedPath = sessionId === null
      ? exchange.request.path
      : exchange.request.path.replace('{id}', sessionId);
    expect(method).toBe(exchange.request.method);
    expect(path).toBe(expectedPath);
    expect(canonical(body)).toBe(canonical(exchange.request.body));
    const responseBody = exchange.response.body as { id?: string };
    if (sessionId === null && responseBody && typeof responseBody.id === 'string') {
      sessionId = responseBody.id;
    }
    return { status: exchange.response.status, body: exchange.response.body };
  };
  return Object.assign(transport, {
    done() {
      expect(cursor, 'not all recorded exchanges were replayed').toBe(fixture.exchanges.length);
    },
  });
}

/** Every string that appears anywhere in the recorded service responses. */
export function responseStrings(fixture: Fixture): Set<string> {
  const out = new Set<string>();
  const walk = (v: unknown): void => {
    if (typeof v === 'string') {
      out.add(v);
    } else if (Array.isArray(v)) {
      v.forEach(walk);
    } else if (v && typeof v === 'object') {
      Object.values(v).forEach(walk);
    }
  };
  fixture.exchanges.forEach((e) => walk(e.response.body));
  return out;
}
