/** Document shapes mirrored from the HTTP API (the server is the source of
 * truth; the UI only consumes and re-emits these). */

export interface NodeDoc {
  id: string;
  service: string;
  step: number;
}

export interface EdgeDoc {
  src: string;
  dst: string;
  out_port: string;
  in_port: string;
}

export interface InitialMarkerDoc {
  resource: string;
  format: string;
  dst: string | null;
  in_port: string | null;
}

export interface GoalMarkerDoc {
  resource: string;
  format: string;
}

export interface WorkflowDoc {
  nodes: NodeDoc[];
  edges: EdgeDoc[];
  initial: InitialMarkerDoc[];
  goal: GoalMarkerDoc[];
}

export interface QoSDoc {
  rt: number;
  tp: number;
  av: number;
  re: number;
}

export interface ServiceDoc {
  name: string;
  class: string;
  input_formats: Record<string, string>;
  output_formats: Record<string, string>;
  qos: QoSDoc;
  description: string;
}

export interface ServiceClassDoc {
  name: string;
  parent: string | null;
  inputs: { port: string; class: string }[];
  outputs: { port: string; class: string }[];
  description: string;
}

export interface RegistryDoc {
  formats: { name: string }[];
  resource_classes: { name: string; parent: string | null }[];
  service_classes: ServiceClassDoc[];
  services: ServiceDoc[];
}

export type RequestDoc =
  | { type: "avoid"; target: string }
  | { type: "include"; target: string }
  | { type: "order_before"; first: string; second: string }
  | {
      type: "change_io";
      initial?: { resource: string; format: string }[];
      goal?: { resource: string; format: string }[];
    };

export interface SimilarityReportDoc {
  node_level: number;
  edge_level: number;
  topo_level: number;
  combined: number;
  edit_distance: number;
  edit_distance_exact: boolean;
  node_ids_a: string[];
  node_ids_b: string[];
  node_matrix: number[][];
}

export interface ComposeCandidateDoc {
  workflow: WorkflowDoc;
  qos: QoSDoc;
  score?: number;
}

export interface ComposeResponse {
  registry_id: string;
  candidates: ComposeCandidateDoc[];
  session_id?: string;
}

export interface RefineCandidateDoc {
  workflow: WorkflowDoc;
  similarity: SimilarityReportDoc | null;
  score: number;
}

export interface RefineResponse {
  mode: "approx" | "exact";
  truncated: boolean;
  original: WorkflowDoc;
  candidates: RefineCandidateDoc[];
}

export interface SessionDoc {
  id: string;
  registry_id: string;
  current: WorkflowDoc;
  history: { requests: RequestDoc[]; chosen: WorkflowDoc; timestamp: number }[];
}

export interface ApiErrorDoc {
  code: string;
  message: string;
  [extra: string]: unknown;
}
