// Thin typed client; every mutation in the UI flows through postDecisions
// or postIterate, nothing else.

import type {
  CandidatesResponse,
  DecisionInput,
  GraphPayload,
  ProjectState,
} from './types.js';

export class ApiError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let code = 'http-error';
    let message = `${resp.status}`;
    try {
      const body = await resp.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(code, message, resp.status);
  }
  return resp.json() as Promise<T>;
}

export class ApiClient {
  constructor(private base: string = '') {}

  private url(path: string, iteration?: number): string {
    const suffix = iteration === undefined ? '' : `?iteration=${iteration}`;
    return `${this.base}${path}${suffix}`;
  }

  getProject(): Promise<ProjectState> {
    return fetch(this.url('/api/project')).then((r) => asJson<ProjectState>(r));
  }

  getCandidates(iteration?: number): Promise<CandidatesResponse> {
    return fetch(this.url('/api/candidates', iteration)).then((r) =>
      asJson<CandidatesResponse>(r),
    );
  }

  getGraph(iteration?: number): Promise<GraphPayload> {
    return fetch(this.url('/api/graph', iteration)).then((r) => asJson<GraphPayload>(r));
  }

  postDecisions(decisions: DecisionInput[]): Promise<{ accepted: number; pending: number }> {
    return fetch(this.url('/api/decisions'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ decisions }),
    }).then((r) => asJson(r));
  }

  postIterate(): Promise<{ iteration: number; status: string; decisions: number }> {
    return fetch(this.url('/api/iterate'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({}),
    }).then((r) => asJson(r));
  }
}
