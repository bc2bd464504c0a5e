// Typed client for the consultation service. The fetch function is injected
// so tests can run against a scripted transport.

import type {
  AnalysisReportDto,
  PreviewDto,
  ReplayStep,
  SessionAdvanced,
  SessionCreated,
  SessionSnapshot,
  TraceDto,
  TreeResponse,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }

  get isVersionConflict(): boolean {
    return this.status === 409;
  }
}

async function decode<T>(response: Response): Promise<T> {
  let payload: unknown = null;
  try {
    payload = await response.json();
  } catch {
    payload = null;
  }
  if (!response.ok) {
    const envelope = (payload ?? {}) as { error_code?: string; message?: string };
    throw new ApiError(
      response.status,
      envelope.error_code ?? 'HttpError',
      envelope.message ?? `request failed with status ${response.status}`,
    );
  }
  return payload as T;
}

export class Client {
  constructor(
    private readonly base: string,
    private readonly fetchLike: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async call<T>(method: 'GET' | 'POST', path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchLike(this.base + path, {
        method,
        headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, 'Network', err instanceof Error ? err.message : String(err));
    }
    return decode<T>(response);
  }

  tree(): Promise<TreeResponse> {
    return this.call('GET', '/api/tree');
  }

  check(): Promise<AnalysisReportDto> {
    return this.call('POST', '/api/check', {});
  }

  evaluate(facts: Record<string, unknown>): Promise<{ trace: TraceDto }> {
    return this.call('POST', '/api/eval', { facts });
  }

  createSession(replay?: ReplayStep[]): Promise<SessionCreated> {
    return this.call('POST', '/api/session', replay?.length ? { replay } : {});
  }

  getSession(id: string): Promise<SessionSnapshot> {
    return this.call('GET', `/api/session/${id}`);
  }

  answer(id: string, version: number, reply: 'yes' | 'no'): Promise<SessionAdvanced> {
    return this.call('POST', `/api/session/${id}/answer`, { version, reply });
  }

  undo(id: string, version: number): Promise<SessionAdvanced> {
    return this.call('POST', `/api/session/${id}/undo`, { version });
  }

  whatIf(id: string, reply: 'yes' | 'no'): Promise<{ preview: PreviewDto }> {
    return this.call('POST', `/api/session/${id}/what_if`, { reply });
  }
}
