// Payload shapes of the workbench HTTP API. The UI renders these values
// verbatim; it never computes a metric itself.

export interface NodeRefJson {
  kind: string;
  container: string;
  member: string;
}

export interface ClassNodeJson {
  container: string;
  kind: string;
}

export interface ClassEdgeJson {
  source: string;
  target: string;
  weight: number;
}

export interface ClassGraphJson {
  nodes: ClassNodeJson[];
  edges: ClassEdgeJson[];
}

export interface PathRowJson {
  path: string[];
  signature: NodeRefJson[];
  frequency: number;
}

export interface PathsJson {
  total: number;
  rows: PathRowJson[];
}

export interface SelfLoopJson {
  container: string;
  weight: number;
}

export interface BreakSuggestionJson {
  source: string;
  target: string;
  weight: number;
  rationale: string;
}

export interface CycleReportJson {
  sccs: string[][];
  self_loops: SelfLoopJson[];
  cycles: string[][];
  truncated: boolean;
  suggested_breaks: BreakSuggestionJson[];
}

export interface ServiceMetricsJson {
  service: string;
  cla: number;
  links: number;
  cbm: string | null;
  dup: number;
  external_call_instances: number;
  fec: string | null;
  zero_class: boolean;
}

export interface SystemMetricsJson {
  internal_calls: number;
  external_calls: number;
  external_weight: number | string;
  load: number | string;
  duplicated_classes_total: number;
}

export interface ValidationJson {
  ok: boolean;
  errors: string[];
  warnings: string[];
}

export interface SummaryJson {
  mean_cbm: string;
  max_cla: number;
  duplicated_classes_total: number;
  load: number | string;
}

export interface ExternalEdgeJson {
  source: string;
  target: string;
  weight: number;
  source_service: string;
  target_service: string | null;
}

export interface EvaluationJson {
  id: string;
  label: string;
  provenance: string;
  validation: ValidationJson;
  services: ServiceMetricsJson[];
  system: SystemMetricsJson;
  summary: SummaryJson;
  pareto_optimal: boolean;
  unassigned_containers: string[];
  external_edges: ExternalEdgeJson[];
}

export interface ComparisonJson {
  objectives: string[];
  note: string;
  path_count: number | null;
  candidates: EvaluationJson[];
}

export interface DraftJson {
  id: string;
  label: string;
  version: number;
  services: Record<string, string[]>;
}

export interface CandidateJson {
  id: string;
  label: string;
  provenance: string;
  services: Record<string, string[]>;
}

export interface SelectionJson {
  id: string | null;
}

export type PatchOp =
  | { op: "assign"; container: string; service: string }
  | { op: "unassign"; container: string; service?: string }
  | { op: "duplicate"; container: string; services: string[] }
  | { op: "rename_service"; from: string; to: string }
  | { op: "merge_services"; services: string[]; into: string };
