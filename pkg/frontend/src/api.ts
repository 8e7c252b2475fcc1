import type {
  ConceptsDoc,
  ConstraintSet,
  IndicesResponse,
  InfeasibilityReport,
  Method,
  RankResponse,
  ResultDoc,
  SampleRecord,
  SessionDoc,
} from "./types.js";

/**
 * Typed client for the capacity-studio session service. All capacity
 * math happens server side; this module only moves documents.
 *
 * Mutating calls send If-Match with the revision the caller last saw.
 * A 409 surfaces as StaleRevisionError carrying the server's current
 * revision so the caller can reload and replay. A 422 surfaces as
 * InfeasibleApiError with the relaxation report.
 */

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

export class StaleRevisionError extends ApiError {
  /** Revision the server is actually at. */
  readonly revision: number;

  constructor(detail: string, revision: number) {
    super(409, detail);
    this.revision = revision;
  }
}

export class InfeasibleApiError extends ApiError {
  readonly report: InfeasibilityReport;

  constructor(detail: string, report: InfeasibilityReport) {
    super(422, detail);
    this.report = report;
  }
}

async function parseBody(response: Response): Promise<Record<string, unknown>> {
  try {
    return (await response.json()) as Record<string, unknown>;
  } catch {
    return {};
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    const impl = fetchImpl ?? globalThis.fetch;
    if (!impl) throw new Error("no fetch implementation available");
    this.fetchImpl = impl.bind(globalThis);
  }

  private async send(
    method: string,
    path: string,
    body?: unknown,
    ifMatch?: number,
  ): Promise<Record<string, unknown>> {
    const headers: Record<string, string> = {};
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    if (ifMatch !== undefined) headers["If-Match"] = `"${ifMatch}"`;
    const response = await this.fetchImpl(this.base + path, init);
    const doc = await parseBody(response);
    if (response.ok) return doc;

    const detail = typeof doc.detail === "string" ? doc.detail : response.statusText;
    if (response.status === 409 && typeof doc.revision === "number") {
      throw new StaleRevisionError(detail, doc.revision);
    }
    if (response.status === 422 && doc.report) {
      throw new InfeasibleApiError(detail, doc.report as InfeasibilityReport);
    }
    throw new ApiError(response.status, detail);
  }

  async createSession(criteria: string[]): Promise<SessionDoc> {
    return (await this.send("POST", "/sessions", { criteria })) as unknown as SessionDoc;
  }

  async getSession(id: string): Promise<SessionDoc> {
    return (await this.send("GET", `/sessions/${id}`)) as unknown as SessionDoc;
  }

  async deleteSession(id: string, revision?: number): Promise<void> {
    await this.send("DELETE", `/sessions/${id}`, undefined, revision);
  }

  /** Replaces the whole constraint set; returns the fresh session. */
  async putConstraints(
    id: string,
    constraints: Partial<ConstraintSet>,
    revision: number,
  ): Promise<SessionDoc> {
    const doc = await this.send("PUT", `/sessions/${id}/constraints`, constraints, revision);
    return doc as unknown as SessionDoc;
  }

  async postSamples(
    id: string,
    samples: SampleRecord[],
    revision: number,
  ): Promise<SessionDoc> {
    const doc = await this.send("POST", `/sessions/${id}/samples`, samples, revision);
    return doc as unknown as SessionDoc;
  }

  async postConcepts(
    id: string,
    concepts: ConceptsDoc,
    revision: number,
  ): Promise<SessionDoc> {
    const doc = await this.send("POST", `/sessions/${id}/concepts`, concepts, revision);
    return doc as unknown as SessionDoc;
  }

  /** Runs identification server side; body only for sugeno densities. */
  async identify(
    id: string,
    method: Method,
    revision: number,
    body?: unknown,
  ): Promise<ResultDoc> {
    const doc = await this.send(
      "POST",
      `/sessions/${id}/identify?method=${method}`,
      body ?? {},
      revision,
    );
    return doc as unknown as ResultDoc;
  }

  async indices(id: string, method?: Method): Promise<IndicesResponse> {
    const query = method ? `?method=${method}` : "";
    const doc = await this.send("GET", `/sessions/${id}/indices${query}`);
    return doc as unknown as IndicesResponse;
  }

  /** Canonical capacity JSON, byte identical with the CLI output. */
  async capacityText(id: string, method?: Method): Promise<string> {
    const query = method ? `?method=${method}` : "";
    const response = await this.fetchImpl(`${this.base}/sessions/${id}/capacity${query}`);
    if (!response.ok) {
      const doc = await parseBody(response);
      const detail = typeof doc.detail === "string" ? doc.detail : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return await response.text();
  }

  async rank(id: string, body?: Record<string, unknown>): Promise<RankResponse> {
    const doc = await this.send("POST", `/sessions/${id}/rank`, body ?? {});
    return doc as unknown as RankResponse;
  }
}
