import type { QoSDoc, RefineResponse, WorkflowDoc } from "./types.js";

export interface GalleryItem {
  /** 1-based rank, in the order the server returned (already sorted by
   * similarity descending). */
  rank: number;
  workflow: WorkflowDoc;
  /** Similarity score badge shown on the card. */
  score: number;
  /** Per-level breakdown; null in approximate mode. */
  breakdown: {
    node: number;
    edge: number;
    topo: number;
    editDistance: number;
    exact: boolean;
  } | null;
  /** Short service-chain caption. */
  caption: string;
}

export interface Gallery {
  mode: "approx" | "exact";
  truncated: boolean;
  items: GalleryItem[];
}

export function serviceChain(workflow: WorkflowDoc): string {
  return [...workflow.nodes]
    .sort((a, b) => a.step - b.step || a.id.localeCompare(b.id))
    .map((n) => n.service)
    .join(" -> ");
}

/** Aggregate workflow QoS client-side only for display captions; the
 * authoritative numbers always come from the server's compose/rank output. */
export function displayQoS(
  workflow: WorkflowDoc,
  qosByService: Map<string, QoSDoc>,
): QoSDoc | null {
  const vectors = workflow.nodes.map((n) => qosByService.get(n.service));
  if (vectors.some((v) => v === undefined) || vectors.length === 0) return null;
  const vs = vectors as QoSDoc[];
  return {
    rt: vs.reduce((acc, v) => acc + v.rt, 0),
    tp: vs.reduce((acc, v) => acc + v.tp, 0) / vs.length,
    av: Math.min(...vs.map((v) => v.av)),
    re: vs.reduce((acc, v) => acc + v.re, 0) / vs.length,
  };
}

/** Build the candidate gallery from a refine response, preserving the
 * server's ordering. */
export function buildGallery(response: RefineResponse): Gallery {
  return {
    mode: response.mode,
    truncated: response.truncated,
    items: response.candidates.map((cand, i) => ({
      rank: i + 1,
      workflow: cand.workflow,
      score: cand.score,
      breakdown:
        cand.similarity === null
          ? null
          : {
              node: cand.similarity.node_level,
              edge: cand.similarity.edge_level,
              topo: cand.similarity.topo_level,
              editDistance: cand.similarity.edit_distance,
              exact: cand.similarity.edit_distance_exact,
            },
      caption: serviceChain(cand.workflow),
    })),
  };
}
