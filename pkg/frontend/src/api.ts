// Thin typed client over the service endpoints. The UI talks to the server
// through this module only.

import type {
  ApiErrorBody,
  DesignDoc,
  GraphDump,
  NewElementBody,
  SessionState,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public path: string = '$',
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    const data = text ? JSON.parse(text) : null;
    if (!resp.ok) {
      const err = (data ?? {}) as Partial<ApiErrorBody>;
      throw new ApiError(resp.status, err.code ?? 'error', err.message ?? resp.statusText, err.path);
    }
    return data as T;
  }

  createDesign(document: DesignDoc): Promise<{ id: string }> {
    return this.request('POST', '/designs', document);
  }

  getDesign(id: string): Promise<DesignDoc> {
    return this.request('GET', `/designs/${id}`);
  }

  designGraph(id: string, alpha = 0.1, seed = 0): Promise<GraphDump> {
    return this.request('POST', `/designs/${id}/graph?alpha=${alpha}&seed=${seed}`);
  }

  createSession(designId: string, backend = 'solver', alpha = 0.1): Promise<SessionState> {
    return this.request('POST', '/sessions', { design_id: designId, backend, alpha });
  }

  getSession(id: string): Promise<SessionState> {
    return this.request('GET', `/sessions/${id}`);
  }

  applyEdit(
    sessionId: string,
    body: { op?: string; instruction?: string; backend?: string; new_element?: NewElementBody },
  ): Promise<SessionState> {
    return this.request('POST', `/sessions/${sessionId}/edits`, body);
  }

  undo(sessionId: string): Promise<SessionState> {
    return this.request('POST', `/sessions/${sessionId}/undo`);
  }

  redo(sessionId: string): Promise<SessionState> {
    return this.request('POST', `/sessions/${sessionId}/redo`);
  }

  translate(sessionId: string, instruction: string): Promise<{ operations: string[] }> {
    return this.request('POST', `/sessions/${sessionId}/translate`, { instruction });
  }
}
