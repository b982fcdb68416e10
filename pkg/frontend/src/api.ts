import type {
  CandidateJson,
  ClassGraphJson,
  ComparisonJson,
  CycleReportJson,
  DraftJson,
  EvaluationJson,
  PathsJson,
  PatchOp,
  SelectionJson,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly violations: string[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(path, init);
  } catch (err) {
    throw new ApiError(0, `API unreachable: ${String(err)}`);
  }
  if (!response.ok) {
    let message = `${response.status}`;
    let violations: string[] = [];
    try {
      const body = (await response.json()) as { error?: string; violations?: string[] };
      message = body.error ?? message;
      violations = body.violations ?? [];
    } catch {
      // error body was not JSON; keep the status text
    }
    throw new ApiError(response.status, message, violations);
  }
  return (await response.json()) as T;
}

function jsonInit(method: string, body: unknown): RequestInit {
  return {
    method,
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  };
}

export const api = {
  graph: () => request<ClassGraphJson>("/api/graph"),
  paths: (limit = 50) => request<PathsJson>(`/api/paths?limit=${limit}`),
  cycles: () => request<CycleReportJson>("/api/cycles"),
  candidates: () => request<{ candidates: CandidateJson[] }>("/api/candidates"),
  drafts: () => request<{ drafts: DraftJson[] }>("/api/drafts"),
  draft: (id: string) => request<DraftJson>(`/api/drafts/${id}`),
  createDraft: (body: { label?: string; services?: Record<string, string[]>; from_candidate?: string }) =>
    request<DraftJson>("/api/drafts", jsonInit("POST", body)),
  patchDraft: (id: string, operations: PatchOp[], version?: number) =>
    request<DraftJson>(`/api/drafts/${id}`, jsonInit("PATCH", { operations, version })),
  evaluate: (id: string) => request<EvaluationJson>(`/api/drafts/${id}/evaluate`, { method: "POST" }),
  compare: (ids?: string[]) =>
    request<ComparisonJson>(
      ids && ids.length ? `/api/compare?ids=${encodeURIComponent(ids.join(","))}` : "/api/compare",
    ),
  selection: () => request<SelectionJson>("/api/selection"),
  select: (id: string) => request<{ id: string }>("/api/selection", jsonInit("PUT", { id })),
};

export type Api = typeof api;
