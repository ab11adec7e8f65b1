// Thin client over the service endpoints. All methods raise ApiError with
// the server's error code when the response is not OK.

import type { ConnectionSummary, ResponseBundle, StateView } from './types.js';

export class ApiError extends Error {
  code: string;
  status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(base + path, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
  } catch (err) {
    throw new ApiError(0, 'NetworkError', String(err));
  }
  if (!response.ok) {
    let code = 'HttpError';
    let message = `${response.status}`;
    try {
      const body = await response.json();
      if (body?.detail?.code) {
        code = body.detail.code;
        message = body.detail.message ?? message;
      }
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, code, message);
  }
  return response.json() as Promise<T>;
}

export class Client {
  constructor(readonly base: string = '') {}

  createSession(): Promise<{ session_id: string }> {
    return request(this.base, '/sessions', { method: 'POST' });
  }

  sendMessage(sessionId: string, text: string, payload?: Record<string, unknown>): Promise<ResponseBundle> {
    return request(this.base, `/sessions/${sessionId}/messages`, {
      method: 'POST',
      body: JSON.stringify({ text, payload: payload ?? null }),
    });
  }

  getState(sessionId: string): Promise<StateView> {
    return request(this.base, `/sessions/${sessionId}/state`);
  }

  registerConnection(sessionId: string, dialect: string, location: string): Promise<ConnectionSummary> {
    return request(this.base, `/sessions/${sessionId}/connections`, {
      method: 'POST',
      body: JSON.stringify({ dialect, location, read_only: true }),
    });
  }

  exportUrl(sessionId: string, chartId: string, format: 'json' | 'csv'): string {
    return `${this.base}/sessions/${sessionId}/charts/${chartId}/export?format=${format}`;
  }
}
