// Client for the session service.  The transport is injectable so tests can
// replay recorded exchanges; the HTTP transport is a thin fetch wrapper.

import type { Action, ProtocolError, SessionView } from './types.js';

export interface Reply<T> {
  status: number;
  body: T | ProtocolError;
}

export type Transport = (
  method: string,
  path: string,
  body?: unknown,
) => Promise<{ status: number; body: unknown }>;

export function httpTransport(baseUrl: string): Transport {
  return async (method, path, body) => {
    const res = await fetch(baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await res.json().catch(() => ({ code: 'bad_json', message: 'unparseable response' }));
    return { status: res.status, body: data };
  };
}

export class SessionApi {
  constructor(private transport: Transport) {}

  async createSession(integrand: string, varName: string): Promise<Reply<SessionView>> {
    const r = await this.transport('POST', '/session', { integrand, var: varName });
    return r as Reply<SessionView>;
  }

  async act(id: string, action: Action): Promise<Reply<SessionView>> {
    const r = await this.transport('POST', `/session/${id}/act`, { action });
    return r as Reply<SessionView>;
  }

  async state(id: string): Promise<Reply<SessionView>> {
    const r = await this.transport('GET', `/session/${id}`);
    return r as Reply<SessionView>;
  }

  async abandon(id: string): Promise<Reply<SessionView>> {
    const r = await this.transport('DELETE', `/session/${id}`);
    return r as Reply<SessionView>;
  }
}

export function isError(body: unknown): body is ProtocolError {
  return typeof body === 'object' && body !== null && 'code' in body && 'message' in body;
}
