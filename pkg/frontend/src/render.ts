import type { RegistryDoc, ServiceDoc, WorkflowDoc } from "./types.js";

export interface DagNode {
  id: string;
  service: string;
  step: number;
  layer: number;
  /** Row within the layer (0-based, top to bottom). */
  row: number;
  x: number;
  y: number;
  /** True when the service's class preserves the resource class but changes
   * the data format (inserted for format repair); visually tagged. */
  converter: boolean;
  /** Metadata revealed on node click, when a registry document is given. */
  meta?: {
    class: string;
    description: string;
    qos: ServiceDoc["qos"];
    input_formats: Record<string, string>;
    output_formats: Record<string, string>;
  };
}

export interface DagEdge {
  /** Source node id, or "input" pseudo-terminal for initial resources. */
  src: string;
  dst: string;
  label: string;
}

export interface DagView {
  kind: "dag";
  nodes: DagNode[];
  edges: DagEdge[];
  goals: { resource: string; format: string }[];
}

export interface EmptyView {
  kind: "empty";
  message: string;
}

export interface ErrorView {
  kind: "error";
  message: string;
}

export type WorkflowView = DagView | EmptyView | ErrorView;

export const LAYER_WIDTH = 180;
export const ROW_HEIGHT = 90;

function isConverter(service: ServiceDoc, registry: RegistryDoc): boolean {
  const cls = registry.service_classes.find((c) => c.name === service.class);
  if (!cls || cls.inputs.length !== 1 || cls.outputs.length !== 1) return false;
  const input = cls.inputs[0]!;
  const output = cls.outputs[0]!;
  if (input.class !== output.class) return false;
  const inFmt = service.input_formats[input.port];
  const outFmt = service.output_formats[output.port];
  return inFmt !== undefined && outFmt !== undefined && inFmt !== outFmt;
}

function validate(doc: WorkflowDoc): string | null {
  if (!Array.isArray(doc.nodes) || !Array.isArray(doc.edges)) {
    return "workflow document must carry nodes and edges arrays";
  }
  const ids = new Set<string>();
  for (const n of doc.nodes) {
    if (typeof n.id !== "string" || typeof n.service !== "string") {
      return "every node needs a string id and service";
    }
    if (ids.has(n.id)) return `duplicate node id ${n.id}`;
    ids.add(n.id);
  }
  for (const e of doc.edges) {
    if (!ids.has(e.src)) return `edge references unknown node ${e.src}`;
    if (!ids.has(e.dst)) return `edge references unknown node ${e.dst}`;
  }
  return null;
}

/** Lay out and label a workflow document as a left-to-right layered DAG.
 * Layering follows the step index (matching the engine's plan order); the
 * rendered graph is node- and edge-isomorphic to the document, with consumed
 * initial resources drawn as labeled arrows from an input terminal. */
export function renderWorkflow(
  doc: WorkflowDoc,
  registry?: RegistryDoc,
): WorkflowView {
  let error: string | null;
  try {
    error = validate(doc);
  } catch {
    error = "malformed workflow document";
  }
  if (error !== null) return { kind: "error", message: error };
  if (doc.nodes.length === 0) {
    return { kind: "empty", message: "no services in this workflow yet" };
  }

  const byService = new Map<string, ServiceDoc>(
    (registry?.services ?? []).map((s) => [s.name, s]),
  );

  const sorted = [...doc.nodes].sort(
    (a, b) => a.step - b.step || a.id.localeCompare(b.id),
  );
  const rows = new Map<number, number>();
  const nodes: DagNode[] = sorted.map((n) => {
    const layer = n.step;
    const row = rows.get(layer) ?? 0;
    rows.set(layer, row + 1);
    const service = byService.get(n.service);
    return {
      id: n.id,
      service: n.service,
      step: n.step,
      layer,
      row,
      x: layer * LAYER_WIDTH,
      y: row * ROW_HEIGHT,
      converter:
        service !== undefined && registry !== undefined
          ? isConverter(service, registry)
          : false,
      ...(service !== undefined
        ? {
            meta: {
              class: service.class,
              description: service.description,
              qos: service.qos,
              input_formats: service.input_formats,
              output_formats: service.output_formats,
            },
          }
        : {}),
    };
  });

  const edges: DagEdge[] = doc.edges.map((e) => ({
    src: e.src,
    dst: e.dst,
    label: `${e.out_port} -> ${e.in_port}`,
  }));
  for (const marker of doc.initial ?? []) {
    if (marker.dst !== null && marker.in_port !== null) {
      edges.push({
        src: "input",
        dst: marker.dst,
        label: `${marker.resource}:${marker.format} -> ${marker.in_port}`,
      });
    }
  }

  return {
    kind: "dag",
    nodes,
    edges,
    goals: (doc.goal ?? []).map((g) => ({
      resource: g.resource,
      format: g.format,
    })),
  };
}

/** Serialize a DAG view to standalone SVG for embedding. */
export function toSvg(view: WorkflowView): string {
  if (view.kind === "error") {
    return `<svg xmlns="http://www.w3.org/2000/svg"><text class="error" x="10" y="20">${escapeXml(view.message)}</text></svg>`;
  }
  if (view.kind === "empty") {
    return `<svg xmlns="http://www.w3.org/2000/svg"><text class="empty" x="10" y="20">${escapeXml(view.message)}</text></svg>`;
  }
  const pos = new Map(view.nodes.map((n) => [n.id, n]));
  const parts: string[] = [];
  for (const e of view.edges) {
    const a = pos.get(e.src);
    const b = pos.get(e.dst);
    const x1 = a ? a.x + 60 : 0;
    const y1 = a ? a.y + 20 : b ? b.y + 20 : 0;
    const x2 = b ? b.x : 0;
    const y2 = b ? b.y + 20 : 0;
    parts.push(
      `<g class="edge"><line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}"/>` +
        `<text x="${(x1 + x2) / 2}" y="${(y1 + y2) / 2 - 4}">${escapeXml(e.label)}</text></g>`,
    );
  }
  for (const n of view.nodes) {
    const cls = n.converter ? "node converter" : "node";
    parts.push(
      `<g class="${cls}" data-id="${escapeXml(n.id)}">` +
        `<rect x="${n.x}" y="${n.y}" width="120" height="40" rx="6"/>` +
        `<text x="${n.x + 8}" y="${n.y + 24}">${escapeXml(n.service)}</text></g>`,
    );
  }
  const width = Math.max(...view.nodes.map((n) => n.x)) + LAYER_WIDTH;
  const height = Math.max(...view.nodes.map((n) => n.y)) + ROW_HEIGHT;
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">` +
    parts.join("") +
    `</svg>`
  );
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
