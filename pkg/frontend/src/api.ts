/**
 * Typed client for the rostering service HTTP API.
 *
 * All optimization logic lives on the server; this module only moves JSON
 * and CSV payloads across the wire and parses the NDJSON progress stream.
 */

export interface FieldSpec {
  type: "integer" | "number" | "string" | "boolean" | "array";
  min?: number;
  max?: number;
  default?: unknown;
  enum?: string[];
  items?: number;
}

export interface Schema {
  config: Record<string, FieldSpec>;
  job_kinds: string[];
  job_states: string[];
}

export interface JobMeta {
  id: string;
  kind: string;
  state: string;
  config: Record<string, unknown>;
  error: string | null;
  created_at: number;
}

export interface ProgressEvent {
  elapsed_s: number;
  phase: string;
  incumbent: number | null;
  bound: number | null;
  gap: number | null;
  detail: string;
}

export interface FinalStateEvent {
  final_state: string;
}

export type StreamEvent = ProgressEvent | FinalStateEvent;

export interface EmployeeStatistics {
  employee: number;
  shift_counts: Record<string, number>;
  weekend_counts: Record<string, number>;
  rest_days: number;
  preferences_stated: number;
  preference_satisfaction: number | null;
}

export interface JobResult {
  status: string;
  objective: Record<string, number>;
  gap: number;
  lower_bound: number;
  phase_timings: Record<string, number>;
  feasible: boolean;
  statistics: EmployeeStatistics[];
}

export interface ChangeSpec {
  employee: number;
  kind: string;
  blocks: number[];
  values: number[];
  effective_from: number;
}

export interface InstanceDoc {
  format_version: number;
  weeks: number;
  n_employees: number;
  n_shift_types: number;
  shift_labels: string[];
  shift_kinds: string[];
  preferences: number[][];
  [key: string]: unknown;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export function isFinalState(ev: StreamEvent): ev is FinalStateEvent {
  return "final_state" in ev;
}

/**
 * Split an NDJSON byte stream into parsed events. `carry` holds any partial
 * trailing line between chunks; pass the returned carry into the next call.
 */
export function parseNdjsonChunk(
  chunk: string,
  carry: string,
): { events: StreamEvent[]; carry: string } {
  const text = carry + chunk;
  const lines = text.split("\n");
  const rest = lines.pop() ?? "";
  const events: StreamEvent[] = [];
  for (const line of lines) {
    const trimmed = line.trim();
    if (trimmed) events.push(JSON.parse(trimmed) as StreamEvent);
  }
  return { events, carry: rest };
}

/** Parse a complete NDJSON document (e.g. a stored trace file). */
export function parseNdjson(text: string): StreamEvent[] {
  const { events, carry } = parseNdjsonChunk(text, "");
  if (carry.trim()) events.push(JSON.parse(carry.trim()) as StreamEvent);
  return events;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = globalThis.fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}/api/v1${path}`;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchFn(this.url(path), init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body: keep the status text */
      }
      throw new ApiError(resp.status, detail);
    }
    return resp;
  }

  async getSchema(): Promise<Schema> {
    return (await this.request("/schema")).json();
  }

  async createJob(payload: {
    toy?: boolean;
    instance?: InstanceDoc;
    config?: Record<string, unknown>;
  }): Promise<JobMeta> {
    const resp = await this.request("/jobs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return resp.json();
  }

  async listJobs(): Promise<JobMeta[]> {
    return (await this.request("/jobs")).json();
  }

  async getJob(id: string): Promise<JobMeta> {
    return (await this.request(`/jobs/${id}`)).json();
  }

  async cancelJob(id: string): Promise<JobMeta> {
    return (await this.request(`/jobs/${id}/cancel`, { method: "POST" })).json();
  }

  async getInstance(id: string): Promise<InstanceDoc> {
    return (await this.request(`/jobs/${id}/instance`)).json();
  }

  async getResult(id: string): Promise<JobResult> {
    return (await this.request(`/jobs/${id}/result`)).json();
  }

  async getRosterCsv(id: string): Promise<string> {
    return (await this.request(`/jobs/${id}/roster.csv`)).text();
  }

  async postChanges(
    id: string,
    changes: ChangeSpec[],
    config?: Record<string, unknown>,
  ): Promise<JobMeta> {
    const resp = await this.request(`/jobs/${id}/changes`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ changes, config }),
    });
    return resp.json();
  }

  /** Yield progress events as they arrive; ends after the final_state line. */
  async *streamProgress(id: string): AsyncGenerator<StreamEvent> {
    const resp = await this.request(`/jobs/${id}/progress`);
    if (!resp.body) {
      for (const ev of parseNdjson(await resp.text())) yield ev;
      return;
    }
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let carry = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      const parsed = parseNdjsonChunk(decoder.decode(value, { stream: true }), carry);
      carry = parsed.carry;
      for (const ev of parsed.events) yield ev;
    }
    if (carry.trim()) yield JSON.parse(carry.trim()) as StreamEvent;
  }
}
