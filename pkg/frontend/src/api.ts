import type {
  ApiErrorDoc,
  ComposeResponse,
  RefineResponse,
  RegistryDoc,
  RequestDoc,
  SessionDoc,
  SimilarityReportDoc,
  WorkflowDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: ApiErrorDoc;

  constructor(status: number, detail: ApiErrorDoc) {
    super(`${detail.code}: ${detail.message}`);
    this.status = status;
    this.code = detail.code;
    this.detail = detail;
  }
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export interface ComposeParams {
  registry: string | RegistryDoc;
  problem: {
    initial: { resource: string; format: string }[];
    goal: { resource: string; format: string }[];
    horizon?: number;
  };
  session?: boolean;
  ranking?: {
    order?: string[];
    weights?: Partial<Record<"rt" | "tp" | "av" | "re", number>>;
    av_mode?: "min" | "product";
  };
}

/** Thin typed client over the engine's HTTP API. */
export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const doc = (await res.json()) as T | ApiErrorDoc;
    if (res.status >= 400) throw new ApiError(res.status, doc as ApiErrorDoc);
    return doc as T;
  }

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path);
    const doc = (await res.json()) as T | ApiErrorDoc;
    if (res.status >= 400) throw new ApiError(res.status, doc as ApiErrorDoc);
    return doc as T;
  }

  health(): Promise<{ status: string; sessions: number }> {
    return this.get("/health");
  }

  putRegistry(doc: RegistryDoc): Promise<{ id: string }> {
    return this.post("/registries", doc);
  }

  compose(params: ComposeParams): Promise<ComposeResponse> {
    return this.post("/compose", params);
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.get(`/sessions/${sessionId}`);
  }

  refine(
    sessionId: string,
    requests: RequestDoc[],
    options: { mode?: "approx" | "exact"; horizon?: number } = {},
  ): Promise<RefineResponse> {
    return this.post(`/sessions/${sessionId}/refine`, {
      requests,
      ...options,
    });
  }

  select(
    sessionId: string,
    workflow: WorkflowDoc,
    requests: RequestDoc[] = [],
  ): Promise<SessionDoc> {
    return this.post(`/sessions/${sessionId}/select`, { workflow, requests });
  }

  similarity(
    registry: string | RegistryDoc,
    workflowA: WorkflowDoc,
    workflowB: WorkflowDoc,
  ): Promise<SimilarityReportDoc> {
    return this.post("/similarity", {
      registry,
      workflow_a: workflowA,
      workflow_b: workflowB,
    });
  }
}
