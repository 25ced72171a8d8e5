// Typed client for the annotation service JSON API. One method per
// endpoint the UI touches; errors surface as ApiError with the HTTP
// status so callers can route conflicts and expired leases.

export interface TaskPayload {
  pair_id?: string;
  premise_id?: string;
  premise_text: string;
  hypothesis_text?: string;
  label?: string;
}

export interface Task {
  task_id: string;
  kind: 'label' | 'validate' | 'write';
  batch_id: string;
  payload: TaskPayload;
  lease_expires: number | null;
}

export interface Meta {
  service: string;
  version: string;
  labels: string[];
  write_fields: string[];
}

export interface SubmitAck {
  record_id: string;
  task_id: string;
  status: string;
}

export interface Progress {
  batch_id: string;
  kind: string;
  total: number;
  open: number;
  assigned: number;
  done: number;
  records: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

export class ApiClient {
  constructor(private baseUrl: string, private token = '') {}

  setToken(token: string): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    const res = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await res.text();
    if (!res.ok) {
      let detail = text;
      try {
        detail = JSON.parse(text).detail ?? text;
      } catch {
        // non-JSON error body, keep raw text
      }
      throw new ApiError(res.status, detail);
    }
    return text ? JSON.parse(text) : (undefined as T);
  }

  meta(): Promise<Meta> {
    return this.request('GET', '/api/meta');
  }

  register(name: string): Promise<{ worker_id: string; token: string }> {
    return this.request('POST', '/api/workers', { name });
  }

  nextTask(workerId: string, batchId: string): Promise<{ task: Task | null }> {
    const q = `worker=${encodeURIComponent(workerId)}&batch=${encodeURIComponent(batchId)}`;
    return this.request('GET', `/api/tasks/next?${q}`);
  }

  submitResponse(
    taskId: string,
    response: Record<string, string>,
    idempotencyKey: string,
  ): Promise<SubmitAck> {
    return this.request('POST', '/api/responses', {
      task_id: taskId,
      response,
      idempotency_key: idempotencyKey,
    });
  }

  progress(batchId: string): Promise<Progress> {
    return this.request('GET', `/api/batches/${encodeURIComponent(batchId)}/progress`);
  }
}
